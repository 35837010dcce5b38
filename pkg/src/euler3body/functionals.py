"""Action functionals on the loop space and their coefficient gradients.

Kinetic integrals are evaluated in closed form from the coefficients;
potential integrals use the uniform-grid trapezoidal rule, and their
gradients are the exact derivatives of that quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PAIRS, CollinearGeometry, ConfigurationState, MassTriple
from .errors import CollisionError, DomainError
from .loops import (DEFAULT_GRID, FourierLoop, SampledLoop, kinetic_gradient,
                    kinetic_integral, sample)

COLLISION_GUARD = 1e-9


@dataclass(frozen=True)
class EnergyParams:
    """Fixed energy ``h`` and strength ``eps`` of the inverse-square term."""

    h: float
    eps: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.h) or not np.isfinite(self.eps):
            raise DomainError("energy parameters must be finite")
        if self.eps < 0:
            raise DomainError(f"eps must be nonnegative, got {self.eps}")
        if self.eps > 0 and self.h >= 0:
            raise DomainError(f"the perturbed potential needs h < 0, got h={self.h}")

    @property
    def perturbation(self) -> float:
        """Coefficient eps/h of the inverse-square term (0 when unperturbed)."""
        return self.eps / self.h if self.eps > 0 else 0.0

    def check_mountain_pass_range(self, geom: CollinearGeometry):
        if not (-geom.s / 2 < self.h < 0):
            raise DomainError(
                f"h={self.h} outside the admissible interval (-s/2, 0) = ({-geom.s / 2}, 0)")


@dataclass(frozen=True)
class GradedValue:
    value: float
    gradient: np.ndarray

    @property
    def gradient_norm(self) -> float:
        return float(np.linalg.norm(self.gradient))


def _guarded_sample(loop: FourierLoop, M: int) -> SampledLoop:
    sl = sample(loop, M)
    rmin = sl.radius.min()
    if rmin < COLLISION_GUARD:
        raise CollisionError(f"min |r| = {rmin:.3e} on the grid is below {COLLISION_GUARD}")
    return sl


def _pair_distances(positions) -> np.ndarray:
    """positions has shape (..., 3, 3); returns (..., 3) ordered (12, 13, 23)."""
    return np.stack([np.linalg.norm(positions[..., i, :] - positions[..., j, :], axis=-1)
                     for i, j in PAIRS], axis=-1)


def _pair_mass_products(masses: MassTriple) -> np.ndarray:
    m = masses.array
    return np.array([m[i] * m[j] for i, j in PAIRS])


def body_positions(sl: SampledLoop, geom: CollinearGeometry) -> np.ndarray:
    """Reconstructed body positions on the grid, shape (M, 3, 3)."""
    return np.asarray(geom.c)[None, :, None] * sl.r[:, None, :]


def body_velocities(sl: SampledLoop, geom: CollinearGeometry) -> np.ndarray:
    return np.asarray(geom.c)[None, :, None] * sl.rdot[:, None, :]


def action_f_full(loop: FourierLoop, geom: CollinearGeometry, masses: MassTriple,
                  M: int = DEFAULT_GRID) -> float:
    """Lagrangian action summed over the three reconstructed bodies."""
    sl = _guarded_sample(loop, M)
    v = body_velocities(sl, geom)
    kinetic = 0.5 * np.einsum("i,mij,mij->m", masses.array, v, v)
    potential = _pair_distances(body_positions(sl, geom)) ** -1 @ _pair_mass_products(masses)
    return float(sl.integrate(kinetic + potential))


def action_f_reduced(loop: FourierLoop, geom: CollinearGeometry, M: int = DEFAULT_GRID) -> float:
    """The same action through the two-body reduction a * f1."""
    return geom.a * action_f1(loop, geom, M).value


def action_f(loop: FourierLoop, geom: CollinearGeometry, masses: MassTriple,
             M: int = DEFAULT_GRID, rtol: float = 1e-10) -> float:
    """Lagrangian action, cross-checked between the full and reduced forms."""
    reduced = action_f_reduced(loop, geom, M)
    full = action_f_full(loop, geom, masses, M)
    if abs(full - reduced) > rtol * max(abs(full), abs(reduced)):
        raise ArithmeticError(f"full ({full!r}) and reduced ({reduced!r}) actions disagree")
    return reduced


def action_f1(loop: FourierLoop, geom: CollinearGeometry, M: int = DEFAULT_GRID) -> GradedValue:
    C = geom.kepler_constant
    sl = _guarded_sample(loop, M)
    rad = sl.radius
    value = 0.5 * kinetic_integral(loop) + C * float(sl.integrate(1.0 / rad))
    grad = 0.5 * kinetic_gradient(loop) + sl.project(-C * sl.r / rad[:, None] ** 3)
    return GradedValue(value, grad.ravel())


def action_f1_change(loop: FourierLoop, step, geom: CollinearGeometry,
                     M: int = DEFAULT_GRID) -> float:
    """f1(loop + step) - f1(loop), evaluated without cancellation.

    ``step`` is a coefficient array (any shape with 6K entries).  Accurate
    even when the change is far below the rounding error of f1 itself.
    """
    step = np.asarray(step, dtype=float).reshape(loop.coeffs.shape)
    moved = FourierLoop(loop.T, loop.coeffs + step)
    sl0, sl1 = _guarded_sample(loop, M), _guarded_sample(moved, M)
    w2 = loop.frequencies[:, None, None] ** 2
    kinetic = 0.25 * loop.T * float(np.sum(w2 * step * (moved.coeffs + loop.coeffs)))
    dr = sl0.cos @ step[:, 0] + sl0.sin @ step[:, 1]
    r0, r1 = sl0.radius, sl1.radius
    shrink = -np.einsum("mi,mi->m", dr, sl0.r + sl1.r)
    potential = geom.kepler_constant * float(sl0.integrate(shrink / (r0 * r1 * (r0 + r1))))
    return kinetic + potential


def potential_V_eps(sl: SampledLoop, geom: CollinearGeometry, masses: MassTriple,
                    params: EnergyParams) -> np.ndarray:
    """Perturbed potential along the loop, one value per grid instant."""
    rad = sl.radius
    if rad.min() < COLLISION_GUARD:
        raise CollisionError(f"min |r| = {rad.min():.3e} on the grid")
    return -geom.s / rad + params.perturbation * geom.p / rad**2


def phi_eps(loop: FourierLoop, geom: CollinearGeometry, masses: MassTriple,
            params: EnergyParams, M: int = DEFAULT_GRID) -> GradedValue:
    """Fixed-energy functional 1/2 ||q||^2 * integral of (h - V_eps).

    The zero loop is assigned the value 0 (its norm vanishes); its
    gradient is undefined and returned as NaN.
    """
    if not np.any(loop.coeffs):
        return GradedValue(0.0, np.full(loop.coeffs.size, np.nan))
    sl = _guarded_sample(loop, M)
    rad = sl.radius
    e = params.perturbation
    norm2 = geom.a * kinetic_integral(loop)
    dnorm2 = geom.a * kinetic_gradient(loop)
    J = params.h * loop.T + float(sl.integrate(geom.s / rad - e * geom.p / rad**2))
    dJ = sl.project((-geom.s / rad**3 + 2 * e * geom.p / rad**4)[:, None] * sl.r)
    value = 0.5 * norm2 * J
    grad = 0.5 * (dnorm2 * J + norm2 * dJ)
    return GradedValue(value, grad.ravel())


def total_energy(state: ConfigurationState, masses: MassTriple, params: EnergyParams) -> float:
    """Kinetic energy plus the perturbed potential of one configuration."""
    m = masses.array
    kinetic = 0.5 * float(m @ np.sum(state.velocities**2, axis=1))
    d = _pair_distances(state.positions)
    mm = _pair_mass_products(masses)
    return kinetic - float(mm @ (1 / d)) + params.perturbation * float(mm @ d**-2.0)


def energy_residual(series, geom: CollinearGeometry, masses: MassTriple,
                    params: EnergyParams) -> float:
    """Largest deviation of the total energy from ``params.h`` along a series."""
    return max(abs(total_energy(st, masses, params) - params.h) for st in series.states)


def kepler_lower_bound(C: float, T: float) -> float:
    """Least action of 1/2|r'|^2 + C/|r| over zero-mean T-periodic loops."""
    if C <= 0 or T <= 0:
        raise DomainError("C and T must be positive")
    return 1.5 * (2 * np.pi) ** (2 / 3) * C ** (2 / 3) * T ** (1 / 3)


def identity_3_9_ratio(loop: FourierLoop, geom: CollinearGeometry, masses: MassTriple,
                       M: int = DEFAULT_GRID) -> float:
    """Ratio of pairwise to single-body mass-weighted kinetic integrals.

    Equals the total mass M whenever the centre of mass is at rest.
    """
    if not np.any(loop.coeffs):
        raise DomainError("the ratio is undefined for the zero loop")
    sl = sample(loop, M)
    v = body_velocities(sl, geom)
    m = masses.array
    pairwise = sum(m[i] * m[j] * np.sum((v[:, i] - v[:, j]) ** 2, axis=1) for i, j in PAIRS)
    single = np.einsum("i,mij,mij->m", m, v, v)
    return float(sl.integrate(pairwise) / sl.integrate(single))


def jensen_gap(samples) -> float:
    """mean(-sqrt(k)) + sqrt(mean(k)); nonnegative, zero only for constant samples."""
    k = np.asarray(samples, dtype=float)
    if np.any(k <= 0):
        raise DomainError("samples must be positive")
    return float(np.sqrt(k.mean()) - np.sqrt(k).mean())


def forces(positions, masses: MassTriple, params: EnergyParams | None = None) -> np.ndarray:
    """Force -grad V_eps on each body; ``positions`` has shape (..., 3, 3).

    ``params=None`` (or eps = 0) gives the Newtonian force law.
    """
    q = np.asarray(positions, dtype=float)
    e = 0.0 if params is None else params.perturbation
    m = masses.array
    out = np.zeros_like(q)
    for i, j in PAIRS:
        d = q[..., j, :] - q[..., i, :]
        dist = np.linalg.norm(d, axis=-1)[..., None]
        f = m[i] * m[j] * d * (dist**-3 - 2 * e * dist**-4)
        out[..., i, :] += f
        out[..., j, :] -= f
    return out
