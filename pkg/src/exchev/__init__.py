"""Exchangeable extreme-value copulas.

Stable tail dependence functions of discrete spectral measures, Pickands
functions and their simplex decomposition, extendibility diagnostics for the
conditionally iid subfamily, exact samplers and Monte Carlo estimators.
"""
from ._backend import BACKEND, get_kernels
from .errors import (CapacityError, ExchevError, InvariantError, QuadratureError,
                     SamplerError)
from .estimation import PickandsEstimate, estimate_pickands, singular_paths
from .extendibility import (CondIIDSpec, ContinuousUnitMeanDF, DiscreteUnitMeanDF, Verdict,
                            af_continuous, af_discrete, check_necessary_continuous,
                            check_necessary_discrete, ell_from_condiid, qf_density,
                            qf_discrete, spectral_from_condiid)
from .sampling import RngStream, SampleBatch, sample_condiid, sample_maxlinear, sample_model
from .spectral import (DiscreteSpectralMeasure, EquivClass, NuMeasure,
                       PiecewiseLinearPickands, QLaw, bc2_A, bc2_law, copula_value,
                       embedding_obstruction_check, eval_A_from_Q, eval_ell, margin_measure,
                       mix_pickands, pickands_from_ell, q_from_A, simplex_decompose,
                       symmetrize)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "get_kernels",
    "CapacityError", "ExchevError", "InvariantError", "QuadratureError", "SamplerError",
    "PickandsEstimate", "estimate_pickands", "singular_paths",
    "CondIIDSpec", "ContinuousUnitMeanDF", "DiscreteUnitMeanDF", "Verdict",
    "af_continuous", "af_discrete", "check_necessary_continuous", "check_necessary_discrete",
    "ell_from_condiid", "qf_density", "qf_discrete", "spectral_from_condiid",
    "RngStream", "SampleBatch", "sample_condiid", "sample_maxlinear", "sample_model",
    "DiscreteSpectralMeasure", "EquivClass", "NuMeasure", "PiecewiseLinearPickands", "QLaw",
    "bc2_A", "bc2_law", "copula_value", "embedding_obstruction_check", "eval_A_from_Q",
    "eval_ell", "margin_measure", "mix_pickands", "pickands_from_ell", "q_from_A",
    "simplex_decompose", "symmetrize",
]
