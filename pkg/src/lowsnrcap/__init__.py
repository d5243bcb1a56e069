"""Low-SNR capacity bounds and Monte Carlo mutual-information estimation for
correlated Rayleigh-fading MIMO and delay-spread channels."""

from .autocorr import (
    CorrStats,
    FiniteSupport,
    GaussMarkov,
    PsdCheck,
    SpectralValidityError,
    corr_stats,
    information_rate,
    is_ephemeral,
    validate_psd,
)
from .bounds import (
    BoundReport,
    CoeffBounds,
    EphemeralChannelError,
    ds_bounds,
    ds_upper_bound,
    grid_oracle,
    indiv_bounds_noneph,
    limit_indiv_separable,
    limit_indiv_separable_noneph,
    limit_sum,
    limit_sum_separable,
    limit_sum_separable_noneph,
    separable_sum_bounds,
    upper_bound_sum,
)
from .channel import (
    ChannelClassification,
    DelaySpreadSpec,
    MimoChannelSpec,
    PowerConstraints,
    SeparableStructure,
    classify_channel,
    detect_transmit_separable,
    ds_to_miso,
)
from .config import ConfigError, RunConfig, canonical_json, parse_config
from .mc import (
    FactorizationError,
    Hypothesis,
    InputScheme,
    MiEstimate,
    UnsupportedSchemeError,
    estimate_mi,
    estimate_mi_ds,
    hypothesis_covariance,
    log_likelihood,
    sample_fading_block,
    sample_input_block,
)
from .optim import maximize_on_capped_simplex, project_capped_simplex

__version__ = "0.1.0"
