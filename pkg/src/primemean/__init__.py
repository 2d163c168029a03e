"""primemean: exact geometric means of multiplicative functions.

For a positive multiplicative f, the geometric mean G_f(n) of f(1)..f(n)
satisfies an exact prime-sum identity:

    n log G_f(n) = sum_{p <= n} floor(n/p) log f(p)
                 + sum_{p^a <= n, a >= 2} floor(n/p^a) log(f(p^a)/f(p^(a-1)))

This package evaluates that identity at scale with compensated streaming
accumulation, computes the constants appearing in the classical asymptotic
expansions of such means (Euler's gamma, the Meissel-Mertens constant, the
Mertens log-sum constant, model-dependent prime series) with certified tail
bounds, and verifies the expansions numerically at desk scale.
"""

from .constants import (
    ConstantValue,
    c_q,
    eta0,
    euler_gamma,
    leading_constant,
    meissel_mertens,
    meissel_mertens_limit,
    mertens_e,
    mertens_e_limit,
    rho_f,
    saffari_a,
)
from .checks import (
    ACCEPTANCE_CHECKS,
    CHECK_NAMES,
    CheckContext,
    CheckOptions,
    CheckResult,
    run_all,
    run_check,
)
from .errors import (
    AccumulationError,
    CacheFormatError,
    GridError,
    IllConditionedFitError,
    ModelSpecError,
    PrecisionError,
    PrimemeanError,
    UnknownCheckError,
)
from .multfunc import (
    BUILTIN_NAMES,
    FunctionValue,
    PrimeModel,
    builtin,
    error_profile_check,
    load_model_file,
    log_ratio_prime_power,
    value_at,
)
from .primesums import (
    CheckpointGrid,
    SumsReport,
    bruteforce_prefix,
    default_cache_path,
    identity_prefix,
    load_report,
    log_geomean_bruteforce,
    log_geomean_identity,
    mertens_m_of_x,
    omega_summatory,
    r_sum,
    rs_inequality_check,
    rs_inequality_sweep,
    save_report,
    sums_stream,
    u_of_x,
)
from .series import (
    MAX_ORDER,
    Expansion,
    FitResult,
    fit_coefficients,
    geomean_expansion_eval,
    geomean_expansion_log,
    li_coeffs,
    lj_coeffs,
    lj_recurrence_check,
    s2_coeffs_from_d,
    series_exp,
)
from .sieve import (
    DEFAULT_MAX_BOUND,
    DEFAULT_SEGMENT_SIZE,
    SPF_CAP,
    PrimeStream,
    SpfTable,
    factorize,
    primes_up_to,
    spf_build,
    stream_segmented,
)

__version__ = "0.1.0"

__all__ = [
    # errors
    "AccumulationError",
    "CacheFormatError",
    "GridError",
    "IllConditionedFitError",
    "ModelSpecError",
    "PrecisionError",
    "PrimemeanError",
    "UnknownCheckError",
    # sieve
    "DEFAULT_MAX_BOUND",
    "DEFAULT_SEGMENT_SIZE",
    "SPF_CAP",
    "PrimeStream",
    "SpfTable",
    "factorize",
    "primes_up_to",
    "spf_build",
    "stream_segmented",
    # models
    "BUILTIN_NAMES",
    "FunctionValue",
    "PrimeModel",
    "builtin",
    "error_profile_check",
    "load_model_file",
    "log_ratio_prime_power",
    "value_at",
    # streaming prime sums
    "CheckpointGrid",
    "SumsReport",
    "bruteforce_prefix",
    "default_cache_path",
    "identity_prefix",
    "load_report",
    "log_geomean_bruteforce",
    "log_geomean_identity",
    "mertens_m_of_x",
    "omega_summatory",
    "r_sum",
    "rs_inequality_check",
    "rs_inequality_sweep",
    "save_report",
    "sums_stream",
    "u_of_x",
    # constants
    "ConstantValue",
    "c_q",
    "eta0",
    "euler_gamma",
    "leading_constant",
    "meissel_mertens",
    "meissel_mertens_limit",
    "mertens_e",
    "mertens_e_limit",
    "rho_f",
    "saffari_a",
    # expansion algebra
    "MAX_ORDER",
    "Expansion",
    "FitResult",
    "fit_coefficients",
    "geomean_expansion_eval",
    "geomean_expansion_log",
    "li_coeffs",
    "lj_coeffs",
    "lj_recurrence_check",
    "s2_coeffs_from_d",
    "series_exp",
    # verification checks
    "ACCEPTANCE_CHECKS",
    "CHECK_NAMES",
    "CheckContext",
    "CheckOptions",
    "CheckResult",
    "run_all",
    "run_check",
    "__version__",
]
