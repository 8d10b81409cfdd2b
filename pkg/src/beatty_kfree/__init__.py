"""k-free integers along Beatty sequences: sieves, exponential sums, smoothing,
discrepancy, and certified fixed-point arithmetic underneath all of it."""

from .beatty import (
    BeattyParams,
    beatty_term,
    beatty_terms_block,
    count_kfree_beatty,
    count_kfree_beatty_scaled,
    is_member,
    member_flags_block,
    member_witness,
    parse_beta,
)
from .cfrac import (
    PHI,
    SQRT2,
    SQRT3,
    Convergent,
    DecimalString,
    IrrationalSpec,
    PartialQuotients,
    QuadraticIrrational,
    TypeEstimate,
    cf_expand,
    convergents,
    dirichlet_approx,
    estimate_type,
    make_quadratic,
    parse_irrational,
    to_fixed,
)
from .discrepancy import (
    DiscrepancyResult,
    PointSet,
    build_pointset,
    decay_fit,
    extreme_discrepancy,
    extreme_discrepancy_oracle,
    star_discrepancy,
)
from .errors import (
    DegenerateFit,
    InvalidDelta,
    MemoryBudgetExceeded,
    PrecisionExhausted,
)
from .expsums import (
    BoundReport,
    HyperbolaSplit,
    ThetaApprox,
    double_kfree_sum_hyperbola,
    double_kfree_sum_naive,
    double_sum_bound_check,
    linear_exp_sum,
    min_sum_flat,
    min_sum_scaled,
    mobius_exp_sum,
    split_parameter,
)
from .fixed import (
    ComplexSum,
    FixedReal,
    chunked_complex_sum,
    frac_vector,
    kahan_add,
    unit_exp,
)
from .kfree import (
    KFreeTable,
    MoebiusTable,
    count_kfree,
    kfree_indicator_moebius,
    kfree_indicator_moebius_range,
    sieve_kfree,
    sieve_moebius,
    zeta,
)
from .smoothing import (
    SmoothedIndicator,
    StepIndicator,
    build_smoothed,
    coefficient_bound,
    default_delta,
    default_truncation,
    eval_smoothed,
    eval_truncated_series,
    exceptional_count,
    smoothed_beatty_count,
)

__version__ = "0.1.0"
