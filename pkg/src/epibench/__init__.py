"""Numerical verification of the entropy-power inequality and its information-theoretic proofs."""
__version__ = "0.1.0"

from .density import (ChannelPoint, GridDensity, GridPolicy, Law, ResolutionError,
                      ScoreUndefinedError, combine_vp, convolve, discretize, gaussian_smooth, score)
from .families import AnalyticDensity
from .functionals import (cond_var_additive, deficits, entropy, entropy_power,
                          fisher_information, mi_noise, mi_signal, mmse_signal, posterior)

__all__ = ["AnalyticDensity", "ChannelPoint", "GridDensity", "GridPolicy", "Law",
           "ResolutionError", "ScoreUndefinedError", "combine_vp", "convolve", "discretize",
           "gaussian_smooth", "score", "cond_var_additive", "deficits", "entropy",
           "entropy_power", "fisher_information", "mi_noise", "mi_signal", "mmse_signal",
           "posterior"]
