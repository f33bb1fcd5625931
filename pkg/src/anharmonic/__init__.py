"""Spectral analysis of non-self-adjoint anharmonic oscillators.

Modules: :mod:`gauge` (entire functions with power-distributed zeros and
their partial fractions), :mod:`model` (operator families and closed-form
constants), :mod:`discretize` (Hermite Galerkin matrices), :mod:`spectra`
(biorthogonal spectra, projection norms, resolvents), :mod:`pseudomode`
(constructive quasimodes) and :mod:`cli`.
"""
from .discretize import BasisSpec, assemble, choose_scaling, convergence_check
from .gauge import GaugeSpec
from .model import OscillatorSpec, shifted_oscillator
from .spectra import compute_spectrum, projection_norms, resolvent_norm

__version__ = "0.1.0"

__all__ = [
    "BasisSpec",
    "GaugeSpec",
    "OscillatorSpec",
    "assemble",
    "choose_scaling",
    "compute_spectrum",
    "convergence_check",
    "projection_norms",
    "resolvent_norm",
    "shifted_oscillator",
]
