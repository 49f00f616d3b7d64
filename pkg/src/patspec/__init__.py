"""Patterned random matrices: simulated spectra vs combinatorial limit moments.

The package simulates four families of patterned random matrices with
independent entries (reverse circulant, symmetric circulant, Toeplitz,
Hankel), estimates their empirical spectral moments over replicates, and
independently evaluates the limiting-moment formulas built from set-partition
sums and polytope volumes, so the two routes can be cross-validated.
"""

from .asymptotics import (
    BandKernel,
    LimitMomentReport,
    MCConfig,
    PiCountResult,
    PiLimitResult,
    band_toeplitz_hankel_moment,
    count_pi_exact,
    hankel_limit_moment,
    jump_distribution_sample,
    jump_moment_check,
    pi_limit,
    profile_limit_moment,
    rc_limit_moment,
    sc_limit_moment,
    toeplitz_limit_moment,
)
from .combin import (
    Partition,
    a_coefficient,
    class_counts,
    classify,
    enumerate_partitions,
    multiplicative_extension,
    partition_of,
    word_of,
)
from .entries import (
    BinomialSparse,
    ContinuousVarianceProfile,
    DiscreteVarianceProfile,
    MomentProfile,
    ScaledIID,
    SparseBernoulli,
    Truncation,
    alpha_sequence,
    limit_constants,
    profile_constants,
    sample_inputs,
    truncation_residual,
)
from .errors import CapacityError, ConfigError
from .harness import (
    ComparisonReport,
    ExperimentConfig,
    compare,
    estimate_moments,
    theoretical_moments,
    truncation_check,
)
from .patterns import (
    MaskKind,
    MaskSpec,
    MatrixSpec,
    Pattern,
    input_length,
    link_value,
    mask_keeps,
)
from .spectra import (
    build_matrix,
    d2_bound,
    eigenvalues_sym,
    esd_histogram,
    rc_eigenvalues_fast,
    trace_moment,
)

__version__ = "0.1.0"
