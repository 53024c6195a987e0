"""p-leader multifractal analysis toolkit.

Wavelet p-leaders with finite-size-corrected scaling-function, log-cumulant
and Legendre-spectrum estimators; a reference MFDFA implementation for
comparison; and synthetic multifractal processes (binomial wavelet cascades,
multifractal random walks, lacunary wavelet series, 2D multiplicative
cascades) with closed-form oracles.
"""

from .errors import (
    DegenerateDataError,
    EmbeddingFailureError,
    InsufficientDataError,
    InsufficientScalesError,
    InvalidCorrectionError,
    InvalidExpansionError,
    InvalidInputError,
    InvalidParameterError,
    NoValidPError,
    ParameterInconsistencyError,
    PleadersError,
    ScaleTooSmallError,
    SingularRegressionError,
    UnsupportedFilterError,
    UnsupportedOrderError,
)
from .formalism import (
    DEFAULT_Q_GRID,
    BoundReport,
    CumulantTable,
    LegendreSpectrum,
    RegressionWeights,
    ScalingEstimates,
    StructureFunctionTable,
    check_bound,
    cm_hat,
    cm_to_spectrum,
    cumulants,
    legendre_parametric,
    regression_weights,
    structure_functions,
    zeta_hat,
)
from .harness import ExperimentConfig, ResultSet, analyze_file, rmse, run_experiment
from .leaders import (
    P0_DEFAULT_GRID,
    LeaderPyramid,
    WaveletScalingFunction,
    compute_p_leaders,
    eta_hat,
    hmin,
    p0_hat,
    wavelet_scaling_function,
)
from .mfdfa import (
    FluctuationTable,
    dfa_exponent,
    dyadic_scales,
    fine_scales_lost,
    fluctuations,
    mfdfa_analyze,
    profile,
)
from .pipeline import (
    AnalysisBundle,
    AnalysisOptions,
    analyze_field,
    analyze_pyramid,
    analyze_signal,
)
from .synth import (
    CmcParams,
    LwsParams,
    MrwParams,
    add_trend,
    cascade_eta,
    circulant_gaussian,
    cmc_cumulants,
    cmc_spectrum,
    frac_diff,
    frac_diff_signal,
    gen_cmc2d,
    gen_deterministic_cascade,
    gen_lws,
    gen_lws_pyramid,
    gen_mrw,
    lws_spectrum,
    lws_support,
    mrw_cumulants,
    mrw_eta,
    mrw_p0,
)
from .wavelet import (
    CoefficientPyramid,
    WaveletFilter,
    daubechies_filter,
    dwt1d,
    dwt2d,
    idwt1d,
    idwt2d,
)

__version__ = "0.1.0"
