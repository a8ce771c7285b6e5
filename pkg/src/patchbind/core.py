"""Physical parameters, derived dimensionless constants, and the absorbing region.

The binding problem is posed for two spherical molecules A and B whose
surfaces carry small circular binding sites ("caps").  After
nondimensionalization, everything the Monte Carlo solvers need is carried by
a handful of dimensionless groups:

- ``D_X = R^2 * Deff_X / Dtr`` — orientational mobility of molecule X
  relative to translation, where ``Deff_X = Drot_X + Dsurf_X / R^2`` combines
  rigid-body rotation and in-surface cap diffusion,
- ``lambda_X = sqrt(1 + D_X)``,
- the linear-combination constants ``c11, c21, c22`` that map the two cap
  misalignment angles onto decoupled coordinates, and
- the absorbing region in the 5D half-space: on the plane z = 0,

      x_A^2 + y_A^2 < (c11 * a_A)^2   and
      (x_B - s*x_A)^2 + (y_B - s*y_A)^2 < (c22 * a_B)^2,   s = c21 / c11,

  i.e. a disk of radius r1 crossed with a disk of radius r2 whose center
  rides linearly on the first pair of coordinates.

``rho0`` is the circumscribing radius of that region: the smallest sphere
about the origin that contains it, hence the smallest radius from which the
far-field capacitance law ``q(rho) = c0 / rho^3`` holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

__all__ = [
    "ModelParams",
    "DerivedConstants",
    "Point5",
    "SingularGeometryError",
    "DiagnosticsError",
    "derive_constants",
    "stokes_einstein_params",
    "stokes_einstein_model",
    "region_contains",
]


class SingularGeometryError(ValueError):
    """Both orientational mobilities vanish: the 5D solver does not apply."""


class DiagnosticsError(RuntimeError):
    """A numerical budget (iteration or step cap) was exhausted."""


class Point5(NamedTuple):
    """A position (z, x_A, y_A, x_B, y_B) in the 5D state space."""

    z: float
    x_a: float
    y_a: float
    x_b: float
    y_b: float

    @property
    def rho(self) -> float:
        """Distance from the origin."""
        return math.sqrt(
            self.z * self.z
            + self.x_a * self.x_a
            + self.y_a * self.y_a
            + self.x_b * self.x_b
            + self.y_b * self.y_b
        )


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs for one A-B molecule pair.

    Lengths are arbitrary but consistent (the default examples use
    nanometers); diffusivities pair with the same length unit.

    Attributes
    ----------
    R_A, R_B : float
        Molecular radii (> 0); the reaction radius is ``R = R_A + R_B``.
    Dtr_A, Dtr_B : float
        Translational diffusivities (> 0).
    Drot_A, Drot_B : float
        Rotational diffusivities (>= 0).
    Dsurf_A, Dsurf_B : float
        In-surface cap diffusivities (>= 0).
    eps : float
        Angular size parameter; cap X has angular radius ``eps * a_X``,
        constrained to (0, pi/2).
    a_A, a_B : float
        Dimensionless cap-size factors (> 0).
    N_A, N_B : int
        Cap counts (>= 1).

    Notes
    -----
    Zero orientational mobility (``Deff_X = 0``) is permitted at this level
    because the zero-rotation validation path requires it;
    :func:`derive_constants` rejects the doubly-degenerate case where the 5D
    solver itself is inapplicable.
    """

    R_A: float = 0.5
    R_B: float = 0.5
    Dtr_A: float = 0.5
    Dtr_B: float = 0.5
    Drot_A: float = 0.0
    Drot_B: float = 0.0
    Dsurf_A: float = 0.0
    Dsurf_B: float = 0.0
    eps: float = 10.0 ** -1.5
    a_A: float = 1.0
    a_B: float = 1.0
    N_A: int = 1
    N_B: int = 1

    def __post_init__(self) -> None:
        for name in ("R_A", "R_B", "Dtr_A", "Dtr_B", "a_A", "a_B"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("Drot_A", "Drot_B", "Dsurf_A", "Dsurf_B"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("N_A", "N_B"):
            value = getattr(self, name)
            if not (isinstance(value, int) and value >= 1):
                raise ValueError(f"{name} must be a positive integer, got {value}")
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if not self.eps * max(self.a_A, self.a_B) < math.pi / 2:
            raise ValueError(
                "cap angular radius eps*max(a_A, a_B) must be below pi/2, got "
                f"{self.eps * max(self.a_A, self.a_B)}"
            )

    @property
    def R(self) -> float:
        """Reaction radius R_A + R_B."""
        return self.R_A + self.R_B

    @property
    def Dtr(self) -> float:
        """Relative translational diffusivity Dtr_A + Dtr_B."""
        return self.Dtr_A + self.Dtr_B

    @property
    def Deff_A(self) -> float:
        """Effective orientational diffusivity of the A caps."""
        return self.Drot_A + self.Dsurf_A / (self.R * self.R)

    @property
    def Deff_B(self) -> float:
        """Effective orientational diffusivity of the B caps."""
        return self.Drot_B + self.Dsurf_B / (self.R * self.R)


@dataclass(frozen=True)
class DerivedConstants:
    """Dimensionless groups derived from :class:`ModelParams`.

    Immutable after construction and safe to share across worker threads.
    """

    D_A: float
    D_B: float
    lambda_A: float
    lambda_B: float
    c11: float
    c21: float
    c22: float
    r1: float
    r2: float
    s: float
    rho0: float


def derive_constants(p: ModelParams) -> DerivedConstants:
    """Compute the dimensionless constants for one molecule pair.

    Raises
    ------
    SingularGeometryError
        If ``D_A + D_B = 0`` (both orientational mobilities vanish): the
        linear change of variables behind the 5D region is singular there and
        the capacitance solver does not apply — use the zero-rotation lens
        validation path instead.
    """
    R2 = p.R * p.R
    D_A = R2 * p.Deff_A / p.Dtr
    D_B = R2 * p.Deff_B / p.Dtr
    return derive_constants_from_D(D_A, D_B, p.a_A, p.a_B)


def derive_constants_from_D(
    D_A: float, D_B: float, a_A: float = 1.0, a_B: float = 1.0
) -> DerivedConstants:
    """Variant of :func:`derive_constants` taking the dimensionless pair directly."""
    if D_A < 0 or D_B < 0:
        raise ValueError(f"D_A and D_B must be >= 0, got ({D_A}, {D_B})")
    if not (a_A > 0 and a_B > 0):
        raise ValueError(f"a_A and a_B must be > 0, got ({a_A}, {a_B})")
    if D_A + D_B == 0:
        raise SingularGeometryError(
            "D_A = D_B = 0: no orientational diffusion; the 5D capacitance "
            "solver is inapplicable (use the zero-rotation validation path)"
        )
    lambda_A = math.sqrt(1.0 + D_A)
    lambda_B = math.sqrt(1.0 + D_B)
    # lambda_A^2 lambda_B^2 - 1 = D_A*D_B + D_A + D_B, positive when either
    # mobility is; computed from the D's to avoid cancellation at small D.
    disc = D_A * D_B + D_A + D_B
    root = math.sqrt(disc)
    c11 = 1.0 / lambda_A
    c21 = 1.0 / (lambda_A * root)
    c22 = -lambda_A / root
    s = c21 / c11
    r1 = c11 * a_A
    r2 = abs(c22) * a_B
    reach = s * r1 + r2
    rho0 = math.sqrt(r1 * r1 + reach * reach)
    return DerivedConstants(
        D_A=D_A,
        D_B=D_B,
        lambda_A=lambda_A,
        lambda_B=lambda_B,
        c11=c11,
        c21=c21,
        c22=c22,
        r1=r1,
        r2=r2,
        s=s,
        rho0=rho0,
    )


def stokes_einstein_params(xi: float) -> tuple[float, float]:
    """Dimensionless mobilities (D_A, D_B) for Stokes-Einstein spheres.

    For rigid spheres in the same solvent, translational and rotational
    diffusivities are tied by geometry alone; with a size ratio
    ``xi = R_B / R_A`` in (0, 1] the dimensionless groups reduce to

        D_A = (3/4) * xi * (1 + xi),     D_B = (3/4) * (1/xi) * (1 + 1/xi).
    """
    if not 0.0 < xi <= 1.0:
        raise ValueError(f"xi must lie in (0, 1], got {xi}")
    D_A = 0.75 * xi * (1.0 + xi)
    inv = 1.0 / xi
    D_B = 0.75 * inv * (1.0 + inv)
    return D_A, D_B


def stokes_einstein_model(xi: float, a_A: float = 1.0, a_B: float = 1.0) -> DerivedConstants:
    """Derived constants for a Stokes-Einstein pair with size ratio ``xi``."""
    D_A, D_B = stokes_einstein_params(xi)
    return derive_constants_from_D(D_A, D_B, a_A, a_B)


def region_contains(d: DerivedConstants, pt: Point5) -> bool:
    """Membership test for the 5D absorbing region.

    True iff the point lies on the plane z = 0, strictly inside the first
    disk, and strictly inside the second (riding) disk.  Boundary points
    count as outside: Brownian paths land on the (measure-zero) boundary with
    probability zero, so the estimator is unaffected, and strictness keeps
    the stage-2 distance positive for every non-member.
    """
    if pt.z != 0.0:
        return False
    qa = pt.x_a * pt.x_a + pt.y_a * pt.y_a
    if not qa < d.r1 * d.r1:
        return False
    ub = pt.x_b - d.s * pt.x_a
    vb = pt.y_b - d.s * pt.y_a
    qb = ub * ub + vb * vb
    return qb < d.r2 * d.r2
