"""Imaginary quadratic class numbers in bulk: sieved tables, the census
of class-number multiplicities with its averaged asymptotics, random
Euler product models with exact complex moments, a smoothed Perron
kernel, and pipelines comparing the empirical data against the models.
"""

from .arith import CONSTANTS, Constants, is_fundamental, kronecker, primes_up_to, unit_count
from .census import (
    AsymptoticReport,
    AsymptoticRow,
    FCensus,
    cutoff_for,
    tabulate,
    verify_theorem1,
    verify_theorem2,
)
from .classnum import (
    ClassNumberTable,
    ReducedForm,
    batch_class_numbers,
    class_number_charsum,
    class_number_forms,
    l_one_chi,
    load_table,
    reduced_forms,
    save_table,
    table_via_forms,
)
from .errors import CapacityError, ConvergenceError, InternalInconsistencyError
from .perron import (
    PerronKernelParams,
    irwin_hall_cdf,
    kernel_closed_form,
    kernel_contour,
    perron_indicator,
)
from .pipeline import (
    MomentComparison,
    PipelineConfig,
    compare_moments,
    empirical_negative_moment,
    empirical_prime_moment,
    main_term_reconstruction,
    model_negative_moment,
    model_prime_moment,
)
from .randeuler import (
    MomentResult,
    RandomEulerModel,
    expect_min,
    local_factor,
    moment,
    sample_L,
    sample_L_batch,
    tail_probability,
)

__version__ = "0.1.0"

__all__ = [
    "CONSTANTS",
    "Constants",
    "kronecker",
    "is_fundamental",
    "primes_up_to",
    "unit_count",
    "CapacityError",
    "ConvergenceError",
    "InternalInconsistencyError",
    "ClassNumberTable",
    "ReducedForm",
    "reduced_forms",
    "class_number_forms",
    "class_number_charsum",
    "batch_class_numbers",
    "table_via_forms",
    "l_one_chi",
    "save_table",
    "load_table",
    "FCensus",
    "AsymptoticRow",
    "AsymptoticReport",
    "cutoff_for",
    "tabulate",
    "verify_theorem1",
    "verify_theorem2",
    "RandomEulerModel",
    "MomentResult",
    "local_factor",
    "moment",
    "sample_L",
    "sample_L_batch",
    "expect_min",
    "tail_probability",
    "PerronKernelParams",
    "irwin_hall_cdf",
    "perron_indicator",
    "kernel_closed_form",
    "kernel_contour",
    "PipelineConfig",
    "MomentComparison",
    "empirical_negative_moment",
    "model_negative_moment",
    "compare_moments",
    "empirical_prime_moment",
    "model_prime_moment",
    "main_term_reconstruction",
    "__version__",
]
