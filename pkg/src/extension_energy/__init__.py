"""Weighted Fourier extension energies for self-similar measures on the circle.

The main entry points:

* :mod:`.measure`: self-similar measures, their Fourier transforms and
  Littlewood-Paley pieces;
* :mod:`.bessel`: Bessel vectors ``J_0(r)..J_K(r)``, Airy functions and window averages;
* :mod:`.operator`: the quadratic form ``J_j mu_hat(j-k) J_k``, its top eigenvalue
  and the energy over a radius window;
* :mod:`.bounds`: the geometric constant ``M_R(mu)``;
* :mod:`.extremizer`: explicit test functions and their Rayleigh quotients;
* :mod:`.sweep` and :mod:`.cli`: sweeps, fits, plots and the command line.
"""

from .bessel import BesselVector, PhaseData, airy_pair, average_abs, bessel_vector, phase, uniform_envelope, uniform_leading_term
from .bounds import MRResult, m_r, predicted_m_r
from .coeffs import Coefficients
from .errors import AliasingError, DomainError, ExtensionEnergyError, RangeError, SizeError, ValidationError
from .extremizer import BandFamily, Extremizer, band_family, build_g, knapp_g, rayleigh, select_radius
from .measure import (
    STANDARD_MEASURES,
    FourierTable,
    SelfSimilarMeasure,
    atoms,
    ball_mass,
    build_self_similar,
    fourier_coefficient,
    fourier_table,
    lebesgue,
    lp_piece_coefficients,
    middle_thirds_cantor,
    ninth_cantor,
    quarter_cantor,
)
from .operator import (
    EnergyResult,
    QuadraticForm,
    apply_form,
    build_form,
    energy,
    extension_quadrature_check,
    extension_series,
    lambda_max,
    mu_integral_square,
    rayleigh_quotient,
)

__version__ = "0.1.0"

__all__ = [
    "BesselVector",
    "PhaseData",
    "airy_pair",
    "average_abs",
    "bessel_vector",
    "phase",
    "uniform_envelope",
    "uniform_leading_term",
    "MRResult",
    "m_r",
    "predicted_m_r",
    "Coefficients",
    "AliasingError",
    "DomainError",
    "ExtensionEnergyError",
    "RangeError",
    "SizeError",
    "ValidationError",
    "BandFamily",
    "Extremizer",
    "band_family",
    "build_g",
    "knapp_g",
    "rayleigh",
    "select_radius",
    "STANDARD_MEASURES",
    "FourierTable",
    "SelfSimilarMeasure",
    "atoms",
    "ball_mass",
    "build_self_similar",
    "fourier_coefficient",
    "fourier_table",
    "lebesgue",
    "lp_piece_coefficients",
    "middle_thirds_cantor",
    "ninth_cantor",
    "quarter_cantor",
    "EnergyResult",
    "QuadraticForm",
    "apply_form",
    "build_form",
    "energy",
    "extension_quadrature_check",
    "extension_series",
    "lambda_max",
    "mu_integral_square",
    "rayleigh_quotient",
]
