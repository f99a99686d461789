"""Generalized proportionate-type normalized subband adaptive filtering."""

from .core import (
    AdaptiveFilter,
    FilterConfig,
    Identity,
    PNorm,
    UpdateParams,
    Variant,
    configure_special_case,
)
from .errors import (
    InvalidBankSpec,
    InvalidConfig,
    InvalidSparsityParam,
    InvalidVariance,
    NotPositiveDefinite,
    ParseError,
    SubbandAdaptError,
    ValidationError,
)
from .filterbank import AnalysisBank, design_bank, validate_bank
from .signals import TargetKind, gen_ar1, gen_noise, gen_target
from .sim import ExperimentConfig, MseCurve, TargetSpec, convergence_metrics, run_ensemble, run_single

__version__ = "0.1.0"
