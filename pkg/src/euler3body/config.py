"""Masses, the collinear ratio and the Euler central configuration.

Every collinear configuration in this package is parametrized by the
relative vector ``r = q2 - q1``.  Body 3 sits between bodies 1 and 2 at
``q3 - q1 = lambda0 * (q2 - q1)`` and the centre of mass is pinned at the
origin, so each body is a fixed multiple ``q_i = c_i * r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import CollisionError, DomainError, RootNotBracketedError

PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class MassTriple:
    m1: float
    m2: float
    m3: float

    def __post_init__(self):
        for name in ("m1", "m2", "m3"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"mass {name} must be positive, got {value!r}")

    @property
    def M(self) -> float:
        return self.m1 + self.m2 + self.m3

    @property
    def array(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.m3])

    @classmethod
    def parse(cls, text: str) -> "MassTriple":
        """Build from a comma separated string such as ``"1,2,3"``."""
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 3:
            raise DomainError(f"expected three masses, got {text!r}")
        return cls(*(float(p) for p in parts))


@dataclass(frozen=True)
class CollinearGeometry:
    """Constants derived from the masses and the collinear ratio.

    ``s`` (equal to ``b``) weights the Newtonian potential of the reduced
    problem, ``a`` weights its kinetic energy and ``p`` weights the
    inverse-square perturbation.  ``c`` holds the reconstruction
    coefficients ``(c1, c2, c3)``.
    """

    lambda0: float
    s: float
    a: float
    b: float
    p: float
    c: tuple

    @property
    def c1(self) -> float:
        return self.c[0]

    @property
    def c2(self) -> float:
        return self.c[1]

    @property
    def c3(self) -> float:
        return self.c[2]

    @property
    def kepler_constant(self) -> float:
        """The ratio b/a multiplying 1/|r| in the reduced action."""
        return self.b / self.a

    def distance_factors(self) -> np.ndarray:
        """Pair distances per unit |r|, ordered as (12, 13, 23)."""
        return np.array([1.0, self.lambda0, 1.0 - self.lambda0])


@dataclass(frozen=True)
class ConfigurationState:
    """Positions and velocities of the three bodies, shape (3, 3) each."""

    positions: np.ndarray
    velocities: np.ndarray = field(default=None)

    def __post_init__(self):
        q = np.array(self.positions, dtype=float).reshape(3, 3)
        v = (np.zeros((3, 3)) if self.velocities is None
             else np.array(self.velocities, dtype=float).reshape(3, 3))
        q.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "positions", q)
        object.__setattr__(self, "velocities", v)

    q1 = property(lambda self: self.positions[0])
    q2 = property(lambda self: self.positions[1])
    q3 = property(lambda self: self.positions[2])
    v1 = property(lambda self: self.velocities[0])
    v2 = property(lambda self: self.velocities[1])
    v3 = property(lambda self: self.velocities[2])

    def scale(self) -> float:
        """Largest pairwise distance."""
        q = self.positions
        return max(np.linalg.norm(q[i] - q[j]) for i, j in PAIRS)

    def phase_vector(self) -> np.ndarray:
        return np.concatenate([self.positions.ravel(), self.velocities.ravel()])

    @classmethod
    def from_phase_vector(cls, y) -> "ConfigurationState":
        y = np.asarray(y, dtype=float)
        return cls(y[:9].reshape(3, 3), y[9:].reshape(3, 3))


def _check_lambda(lam):
    if not (0.0 < lam < 1.0):
        raise DomainError(f"collinear ratio must lie in (0, 1), got {lam!r}")


def euler_condition_residual(lam: float, masses: MassTriple) -> float:
    """Difference of the force-to-distance ratios of bodies 1 and 2.

    Vanishes exactly at the collinear ratio for which the configuration
    is central.
    """
    _check_lambda(lam)
    m1, m2, m3 = masses.m1, masses.m2, masses.m3
    left = (m3 / lam**2 + m2) / (m3 * lam + m2)
    mu = 1.0 - lam
    right = (m3 / mu**2 + m1) / (m3 * mu + m1)
    return left - right


def solve_lambda0(masses: MassTriple, delta: float = 1e-9, bisections: int = 60,
                  ftol: float = 1e-13) -> float:
    """Root of :func:`euler_condition_residual` in (0, 1).

    Bisection on ``(delta, 1 - delta)`` followed by a secant polish.
    """
    F = lambda x: euler_condition_residual(x, masses)  # noqa: E731
    lo, hi = delta, 1.0 - delta
    flo, fhi = F(lo), F(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise RootNotBracketedError(
            f"no sign change of the collinear condition on ({lo}, {hi})")

    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        fmid = F(mid)
        if fmid == 0.0:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
        if hi - lo <= 4 * np.spacing(mid):
            break

    best, fbest = (lo, flo) if abs(flo) <= abs(fhi) else (hi, fhi)
    x0, f0, x1, f1 = lo, flo, hi, fhi
    for _ in range(20):
        if abs(fbest) <= ftol or f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (0.0 < x2 < 1.0):
            break
        f2 = F(x2)
        if abs(f2) < abs(fbest):
            best, fbest = x2, f2
        x0, f0, x1, f1 = x1, f1, x2, f2
    return best


def derived_constants(masses: MassTriple, lambda0: float) -> CollinearGeometry:
    _check_lambda(lambda0)
    m1, m2, m3, M = masses.m1, masses.m2, masses.m3, masses.M
    lam, mu = lambda0, 1.0 - lambda0
    s = m1 * m2 + m1 * m3 / lam + m2 * m3 / mu
    a = (m1 * m2 + m1 * m3 * lam**2 + m2 * m3 * mu**2) / M
    p = m1 * m2 + m1 * m3 / lam**2 + m2 * m3 / mu**2
    c1 = -(m2 + m3 * lam) / M
    c2 = (m1 + m3 * mu) / M
    c3 = c1 + lam
    return CollinearGeometry(lambda0=lam, s=s, a=a, b=s, p=p, c=(c1, c2, c3))


def geometry_for(masses: MassTriple) -> CollinearGeometry:
    """Solve for the collinear ratio and return the derived constants."""
    return derived_constants(masses, solve_lambda0(masses))


def reconstruct_configuration(geom: CollinearGeometry, masses: MassTriple,
                              r, rdot=None) -> ConfigurationState:
    c = np.asarray(geom.c)[:, None]
    r = np.asarray(r, dtype=float).reshape(3)
    rdot = np.zeros(3) if rdot is None else np.asarray(rdot, dtype=float).reshape(3)
    return ConfigurationState(c * r, c * rdot)


def newtonian_forces(positions: np.ndarray, masses: np.ndarray) -> np.ndarray:
    """Gravitational force on each body (G = 1), shape (3, 3)."""
    forces = np.zeros((3, 3))
    for i, j in combinations(range(3), 2):
        d = positions[j] - positions[i]
        f = masses[i] * masses[j] * d / np.linalg.norm(d) ** 3
        forces[i] += f
        forces[j] -= f
    return forces


def central_config_residual(state: ConfigurationState, masses: MassTriple,
                            collision_tol: float = 1e-12) -> float:
    """Normalized defect of the central-configuration identity.

    The multiplier is fixed to ``V/I`` (negative), and the largest
    per-body defect is divided by the largest force magnitude.
    """
    q = state.positions
    m = masses.array
    scale = state.scale()
    for i, j in PAIRS:
        if scale == 0.0 or np.linalg.norm(q[i] - q[j]) < collision_tol * scale:
            raise CollisionError(f"bodies {i + 1} and {j + 1} collide")

    c0 = m @ q / m.sum()
    V = -sum(m[i] * m[j] / np.linalg.norm(q[i] - q[j]) for i, j in PAIRS)
    I = float(m @ np.sum((q - c0) ** 2, axis=1))
    lam = V / I

    forces = newtonian_forces(q, m)
    defect = forces - lam * m[:, None] * (q - c0)
    return float(np.max(np.linalg.norm(defect, axis=1))
                 / np.max(np.linalg.norm(forces, axis=1)))


def ratio_defect(state: ConfigurationState, lambda0: float) -> float:
    """|q3 - q1 - lambda0 (q2 - q1)| relative to the largest pair distance."""
    q = state.positions
    return float(np.linalg.norm(q[2] - q[0] - lambda0 * (q[1] - q[0])) / state.scale())

