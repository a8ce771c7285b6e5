"""Binding rate constants for patchy particles.

Publicly supported surface: model/geometry types and closed-form rate
formulas (``core``, ``rates``), Monte Carlo capacitance estimators
(``kmc5d``, ``kmc3d``), the Brownian-dynamics validator (``bdsim``),
proportion statistics (``stats``), and the command-line interface
(``patchbind`` console script).
"""

from .core import (
    DerivedConstants,
    DiagnosticsError,
    ModelParams,
    Point5,
    SingularGeometryError,
    derive_constants,
    region_contains,
    stokes_einstein_model,
    stokes_einstein_params,
)
from .rates import (
    AVOGADRO,
    chi_berg,
    chi_qc,
    k0_asymptotic,
    k0_saturating,
    k_bar_A,
    k_eff_quasichemical,
    k_geo,
    k_smol,
    molar_convert,
    surface_fraction,
    trapping_rate,
)
from .stats import EstimateWithCI, agresti_coull, escape_bias_bound, proportion_ci

__version__ = "0.1.0"

__all__ = [
    "AVOGADRO",
    "DerivedConstants",
    "DiagnosticsError",
    "EstimateWithCI",
    "ModelParams",
    "Point5",
    "SingularGeometryError",
    "__version__",
    "agresti_coull",
    "chi_berg",
    "chi_qc",
    "derive_constants",
    "escape_bias_bound",
    "k0_asymptotic",
    "k0_saturating",
    "k_bar_A",
    "k_eff_quasichemical",
    "k_geo",
    "k_smol",
    "molar_convert",
    "proportion_ci",
    "region_contains",
    "stokes_einstein_model",
    "stokes_einstein_params",
    "surface_fraction",
    "trapping_rate",
]
