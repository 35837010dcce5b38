"""Odd-harmonic Fourier loops for the relative curve r(t) = q2(t) - q1(t).

A loop stores only harmonics k = 1, 3, 5, ..., 2K-1, which makes
r(t + T/2) = -r(t) hold identically and forces a zero mean.  Coefficients
live in an array of shape (K, 2, 3): ``coeffs[j, 0]`` is the cosine vector
and ``coeffs[j, 1]`` the sine vector of harmonic ``2j + 1``.  Flattened,
that is 6 numbers per harmonic in the order (cos xyz, sin xyz).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UndersamplingError

DEFAULT_HARMONICS = 16
DEFAULT_GRID = 256


@dataclass(frozen=True)
class FourierLoop:
    T: float
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 3 or c.shape[1:] != (2, 3) or c.shape[0] < 1:
            raise DomainError(f"coefficients must have shape (K, 2, 3), got {c.shape}")
        if not (np.isfinite(self.T) and self.T > 0):
            raise DomainError(f"period must be positive, got {self.T!r}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "T", float(self.T))

    @classmethod
    def from_harmonics(cls, T, harmonics, K=None):
        """Build from ``{k: (cos_vec, sin_vec)}`` with odd positive ``k``."""
        ks = sorted(harmonics)
        for k in ks:
            if k <= 0 or k % 2 == 0:
                raise DomainError(f"harmonic k={k} is not an odd positive integer")
        K = (ks[-1] + 1) // 2 if K is None else K
        coeffs = np.zeros((K, 2, 3))
        for k in ks:
            if (k + 1) // 2 > K:
                raise DomainError(f"harmonic k={k} exceeds K={K}")
            cos, sin = harmonics[k]
            coeffs[(k - 1) // 2] = [cos, sin]
        return cls(T, coeffs)

    @classmethod
    def from_flat(cls, T, flat):
        return cls(T, np.asarray(flat, dtype=float).reshape(-1, 2, 3))

    @property
    def K(self) -> int:
        return self.coeffs.shape[0]

    @property
    def harmonics(self) -> np.ndarray:
        return 2 * np.arange(self.K) + 1

    @property
    def frequencies(self) -> np.ndarray:
        return 2 * np.pi * self.harmonics / self.T

    @property
    def flat(self) -> np.ndarray:
        return self.coeffs.ravel().copy()

    def scaled(self, alpha: float) -> "FourierLoop":
        return FourierLoop(self.T, alpha * self.coeffs)

    def with_period(self, T: float) -> "FourierLoop":
        """Same coefficients traversed over a different period."""
        return FourierLoop(T, self.coeffs)

    def with_flat(self, flat) -> "FourierLoop":
        return FourierLoop.from_flat(self.T, flat)

    def padded(self, K: int) -> "FourierLoop":
        if K < self.K:
            raise DomainError("cannot pad to fewer harmonics")
        c = np.zeros((K, 2, 3))
        c[: self.K] = self.coeffs
        return FourierLoop(self.T, c)

    def __call__(self, t):
        return evaluate(self, t)


@dataclass(frozen=True)
class SampledLoop:
    """A loop tabulated on M uniform instants of [0, T).

    ``cos`` and ``sin`` are the (M, K) basis tables, kept so that
    gradients of grid quadratures can be projected back on coefficients.
    """

    loop: FourierLoop
    times: np.ndarray
    r: np.ndarray
    rdot: np.ndarray
    rddot: np.ndarray
    cos: np.ndarray
    sin: np.ndarray

    @property
    def M(self) -> int:
        return self.times.size

    @property
    def dt(self) -> float:
        return self.loop.T / self.M

    @property
    def radius(self) -> np.ndarray:
        return np.linalg.norm(self.r, axis=1)

    def integrate(self, values) -> np.ndarray:
        """Trapezoidal (periodic) quadrature over one period."""
        return np.sum(values, axis=0) * self.dt

    def project(self, integrand_gradient) -> np.ndarray:
        """Coefficient gradient of ``integrate(phi(r))`` given ``dphi/dr`` on the grid.

        Returns shape (K, 2, 3).
        """
        G = np.asarray(integrand_gradient)
        out = np.empty((self.loop.K, 2, 3))
        out[:, 0] = self.cos.T @ G * self.dt
        out[:, 1] = self.sin.T @ G * self.dt
        return out


def _basis(loop: FourierLoop, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    phase = np.outer(t, loop.frequencies)
    return np.cos(phase), np.sin(phase)


def evaluate(loop: FourierLoop, t):
    """r(t); a scalar ``t`` gives shape (3,), an array gives (n, 3)."""
    C, S = _basis(loop, t)
    out = C @ loop.coeffs[:, 0] + S @ loop.coeffs[:, 1]
    return out[0] if np.ndim(t) == 0 else out


def derivative(loop: FourierLoop, t, order: int = 1):
    """Exact time derivative of r of the given order (1 or 2)."""
    C, S = _basis(loop, t)
    w = loop.frequencies[:, None]
    A, B = loop.coeffs[:, 0], loop.coeffs[:, 1]
    if order == 1:
        out = C @ (w * B) - S @ (w * A)
    elif order == 2:
        out = -(C @ (w**2 * A) + S @ (w**2 * B))
    else:
        raise DomainError(f"derivative order must be 1 or 2, got {order}")
    return out[0] if np.ndim(t) == 0 else out


def min_grid_size(K: int) -> int:
    return 4 * (2 * K - 1)


def sample(loop: FourierLoop, M: int = DEFAULT_GRID) -> SampledLoop:
    if M < min_grid_size(loop.K):
        raise UndersamplingError(
            f"grid of {M} points is below 4*(2K-1) = {min_grid_size(loop.K)} for K={loop.K}")
    times = loop.T * np.arange(M) / M
    C, S = _basis(loop, times)
    w = loop.frequencies[:, None]
    A, B = loop.coeffs[:, 0], loop.coeffs[:, 1]
    r = C @ A + S @ B
    rdot = C @ (w * B) - S @ (w * A)
    rddot = -(C @ (w**2 * A) + S @ (w**2 * B))
    return SampledLoop(loop, times, r, rdot, rddot, C, S)


def kinetic_integral(loop: FourierLoop) -> float:
    """Closed-form integral of |r'|^2 over one period."""
    w2 = loop.frequencies**2
    return 0.5 * loop.T * float(np.sum(w2 * np.sum(loop.coeffs**2, axis=(1, 2))))


def kinetic_gradient(loop: FourierLoop) -> np.ndarray:
    """Coefficient gradient of :func:`kinetic_integral`, shape (K, 2, 3)."""
    return loop.T * loop.frequencies[:, None, None] ** 2 * loop.coeffs


def loop_norm(loop: FourierLoop, geom) -> float:
    """Mass-weighted kinetic norm of the reconstructed three-body loop."""
    return float(np.sqrt(geom.a * kinetic_integral(loop)))


def min_separation(loop: FourierLoop, geom, M: int = DEFAULT_GRID) -> float:
    """Smallest pair distance over the grid."""
    factor = min(geom.lambda0, 1.0 - geom.lambda0, 1.0)
    return factor * float(sample(loop, M).radius.min())


def winding_number(loop: FourierLoop, M: int = DEFAULT_GRID, planar_tol: float = 1e-9,
                   origin_tol: float = 1e-9):
    """Number of turns of r(t) around the origin, or None when undefined.

    Only planar loops have a winding number.  The plane's normal is
    oriented so that its largest component is positive; for a loop in the
    xy-plane a counter-clockwise turn counts as +1.
    """
    sl = sample(loop, M)
    r = sl.r
    if sl.radius.min() <= origin_tol:
        return None
    _, sv, vt = np.linalg.svd(r.T @ r / M)
    if sv[0] == 0.0 or sv[-1] > planar_tol * sv[0]:
        return None
    normal = vt[2]
    if normal[np.argmax(np.abs(normal))] < 0:
        normal = -normal
    e1 = vt[0]
    e2 = np.cross(normal, e1)
    angle = np.unwrap(np.arctan2(r @ e2, r @ e1))
    # close the loop by appending the first sample one period later
    total = angle[-1] - angle[0]
    last_step = np.angle(np.exp(1j * (angle[0] - angle[-1])))
    return int(np.rint((total + last_step) / (2 * np.pi)))


def random_loop(K: int, seed: int, amplitude: float = 1.0, T: float = 2 * np.pi) -> FourierLoop:
    """Gaussian coefficients with harmonic k scaled by amplitude / k**2."""
    rng = np.random.default_rng(seed)
    k = 2 * np.arange(K) + 1
    coeffs = rng.standard_normal((K, 2, 3)) * (amplitude / k**2)[:, None, None]
    return FourierLoop(T, coeffs)


def circle_loop(radius: float = 1.0, T: float = 2 * np.pi, k: int = 1, K: int | None = None) -> FourierLoop:
    """Planar circle in the xy-plane traversed k times per period."""
    return FourierLoop.from_harmonics(
        T, {k: ((radius, 0.0, 0.0), (0.0, radius, 0.0))}, K=K)
