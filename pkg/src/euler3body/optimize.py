"""Minimizers and the discretized-path mountain-pass search.

All searches run over the flattened Fourier coefficients.  The descent
direction is preconditioned by the inverse kinetic weight of each harmonic
(a gradient in the H^1 metric), which keeps the Armijo step size of order
one regardless of the number of harmonics.  Convergence is always judged
on the plain Euclidean norm of the coefficient gradient.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .config import CollinearGeometry, MassTriple
from .errors import CollisionError, DomainError
from .functionals import (EnergyParams, action_f1, action_f1_change, body_positions,
                          forces, phi_eps, _guarded_sample)
from .loops import DEFAULT_GRID, DEFAULT_HARMONICS, FourierLoop, circle_loop, loop_norm

logger = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITERATIONS = "maxIterations"
COLLISION_GUARD = "collisionGuard"
STALLED = "stalled"


@dataclass(frozen=True)
class SolverOptions:
    tol: float | None = None        # None picks the per-search default
    max_iter: int = 100_000
    armijo: float = 1e-4
    shrink: float = 0.5
    min_step: float = 1e-14
    grid: int = DEFAULT_GRID
    precondition: bool = True
    path_nodes: int = 33
    redistribute_every: int = 10
    path_step_cap: float = 0.1      # largest path-node move relative to the node norm
    path_jitter: float = 0.0        # relative size of seeded noise on the initial path
    seed: int = 0


@dataclass
class SolverReport:
    iterations: int
    final_value: float
    final_gradient_norm: float
    history: list = field(default_factory=list)
    termination_reason: str = CONVERGED

    @property
    def converged(self) -> bool:
        return self.termination_reason == CONVERGED


def _preconditioner(loop: FourierLoop, enabled: bool) -> np.ndarray:
    if not enabled:
        return np.ones(loop.coeffs.size)
    w = 2.0 / (loop.T * loop.frequencies**2)
    return np.repeat(w, 6)


class _LineSearch:
    """Backtracking Armijo search with a memory of the last accepted step."""

    def __init__(self, opts: SolverOptions, cap: float | None = None):
        self.opts = opts
        self.cap = cap
        self.alpha = 1.0
        self.hit_guard = False

    def __call__(self, change, x, slope, d, sign=1.0):
        """Find x + alpha*d with sign*(f(x + alpha*d) - f(x)) <= c*alpha*slope.

        ``change(x, s)`` returns ``(f(x + s), f(x + s) - f(x))``; ``slope``
        is the (negative) directional derivative of sign*f along d.
        Returns ``(x_new, f_new, delta)`` or None.
        """
        alpha = min(2.0 * self.alpha, 1e8)
        if self.cap is not None:
            alpha = min(alpha, self.cap * np.linalg.norm(x) / np.linalg.norm(d))
        self.hit_guard = False
        while alpha >= self.opts.min_step:
            try:
                ft, delta = change(x, alpha * d)
            except CollisionError:
                self.hit_guard = True
            else:
                if sign * delta <= self.opts.armijo * alpha * slope:
                    self.alpha = alpha
                    return x + alpha * d, ft, delta
            alpha *= self.opts.shrink
        return None


def minimize_f1(initial: FourierLoop, geom: CollinearGeometry,
                opts: SolverOptions | None = None):
    """Armijo gradient descent on the reduced Kepler action.

    Returns ``(loop, report)``.  ``report.history`` starts at the initial
    value and adds the decrement of every accepted step, each computed
    without cancellation, so it is exactly non-increasing.
    """
    opts = opts or SolverOptions()
    tol = 1e-8 if opts.tol is None else opts.tol
    T, M = initial.T, opts.grid
    P = _preconditioner(initial, opts.precondition)

    def change(x, s):
        base = FourierLoop.from_flat(T, x)
        delta = action_f1_change(base, s, geom, M)
        return None, delta

    x = initial.flat
    gv = action_f1(initial, geom, M)
    history = [gv.value]
    search = _LineSearch(opts)
    reason = MAX_ITERATIONS
    it = 0
    for it in range(opts.max_iter + 1):
        if gv.gradient_norm <= tol:
            reason = CONVERGED
            break
        if it == opts.max_iter:
            break
        d = -P * gv.gradient
        step = search(change, x, float(gv.gradient @ d), d)
        if step is None:
            reason = COLLISION_GUARD if search.hit_guard else STALLED
            break
        x = step[0]
        history.append(history[-1] + min(step[2], 0.0))
        gv = action_f1(FourierLoop.from_flat(T, x), geom, M)

    report = SolverReport(it, gv.value, gv.gradient_norm, history, reason)
    logger.info("minimize_f1: %s after %d iterations, f1=%.12g |g|=%.3e",
                reason, it, gv.value, gv.gradient_norm)
    return FourierLoop.from_flat(T, x), report


@dataclass(frozen=True)
class Endpoints:
    """Anchor loops of the mountain-pass path: start, middle and end."""

    theta: FourierLoop
    e1: FourierLoop
    e: FourierLoop
    mu: float
    x_theta: float


def endpoint_scalars(geom: CollinearGeometry, h: float):
    """Return ``(mu, x_theta)`` for the ray of circles through the unit loop."""
    if not (-geom.s / 2 < h < 0):
        raise DomainError(f"h={h} outside (-s/2, 0) = ({-geom.s / 2}, 0)")
    return (-geom.s - h) / h, (h + geom.s) / (2 * geom.s)


def build_mp_endpoints(geom: CollinearGeometry, masses: MassTriple, params: EnergyParams,
                       T: float = 2 * np.pi, K: int = DEFAULT_HARMONICS,
                       M: int = DEFAULT_GRID, rtol: float = 1e-10) -> Endpoints:
    """Three circles on one ray: x_theta*u, u and mu*u with u the unit circle.

    phi_eps along the ray is a concave quadratic in the radius that takes
    equal values at 1 and mu, and is lower at x_theta < 1.
    """
    mu, x_theta = endpoint_scalars(geom, params.h)
    u = circle_loop(1.0, T, K=K)
    ends = Endpoints(u.scaled(x_theta), u, u.scaled(mu), mu, x_theta)

    phi = lambda q: phi_eps(q, geom, masses, params, M).value  # noqa: E731
    v_theta, v_e1, v_e = phi(ends.theta), phi(ends.e1), phi(ends.e)
    if not mu > 1:
        raise ArithmeticError(f"mu={mu} is not above 1")
    if abs(v_e1 - v_e) > rtol * max(abs(v_e1), abs(v_e)):
        raise ArithmeticError(f"endpoint values differ: {v_e1!r} vs {v_e!r}")
    if not v_theta < v_e1:
        raise ArithmeticError("start anchor is not below the other anchors")
    return ends


def _redistribute(X: np.ndarray, pivots) -> np.ndarray:
    """Equal-arclength spacing of the nodes strictly between consecutive pivots."""
    X = X.copy()
    pivots = sorted(set(pivots))
    for i0, i1 in zip(pivots[:-1], pivots[1:]):
        if i1 - i0 < 2:
            continue
        seg = X[i0:i1 + 1].copy()
        lengths = np.linalg.norm(np.diff(seg, axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(lengths)])
        if s[-1] == 0.0:
            continue
        targets = np.linspace(0.0, s[-1], i1 - i0 + 1)[1:-1]
        for n, st in enumerate(targets, start=i0 + 1):
            j = min(np.searchsorted(s, st, side="right") - 1, len(s) - 2)
            w = 0.0 if lengths[j] == 0 else (st - s[j]) / lengths[j]
            X[n] = (1 - w) * seg[j] + w * seg[j + 1]
    return X


def _initial_path(ends: Endpoints, P: int, jitter: float = 0.0, seed: int = 0) -> np.ndarray:
    """Piecewise linear path through the anchors, optionally with seeded noise.

    Noise of relative size ``jitter`` is added to the free nodes only.
    """
    mid = P // 2
    a, b, c = ends.theta.flat, ends.e1.flat, ends.e.flat
    first = [a + (b - a) * i / mid for i in range(mid)]
    second = [b + (c - b) * i / (P - 1 - mid) for i in range(P - mid)]
    X = np.array(first + second)
    if jitter > 0:
        K = ends.e1.K
        rng = np.random.default_rng(seed)
        decay = np.repeat(1.0 / ends.e1.harmonics**2, 6)
        for i in range(1, P - 1):
            if i != mid:
                noise = rng.standard_normal(6 * K) * decay
                X[i] += jitter * np.linalg.norm(X[i]) * noise / np.linalg.norm(noise)
    return X


def mountain_pass(ends: Endpoints, geom: CollinearGeometry, masses: MassTriple,
                  params: EnergyParams, opts: SolverOptions | None = None,
                  warm_start: FourierLoop | None = None):
    """Saddle search over a discretized path through the three anchors.

    Each iteration takes the highest movable node, climbs it along the
    local path tangent (Armijo ascent) and then descends it orthogonally to
    the tangent (Armijo descent).  Every ``redistribute_every`` iterations
    the free nodes are respaced to equal arclength, with the current
    highest node held fixed alongside the anchors.  The search stops when
    the highest node's coefficient gradient norm drops below ``tol``.
    Node moves are capped at ``path_step_cap`` times the node norm, and
    ``path_jitter`` > 0 perturbs the initial free nodes reproducibly from
    ``seed`` so the search is not confined to the plane of the anchors.

    Returns ``(saddle_loop, report)``; ``report.history`` is the running
    minimum over iterations of the path maximum.
    """
    opts = opts or SolverOptions()
    tol = 1e-5 if opts.tol is None else opts.tol
    P = opts.path_nodes
    if P < 5:
        raise DomainError("the path needs at least 5 nodes")
    anchors = [ends.theta.flat, ends.e1.flat, ends.e.flat]
    for i in range(3):
        for j in range(i + 1, 3):
            if anchors[i].shape != anchors[j].shape or np.array_equal(anchors[i], anchors[j]):
                raise DomainError("mountain-pass anchors must be distinct loops of equal size")

    T, M = ends.e1.T, opts.grid
    mid = P // 2
    fixed = {0, mid, P - 1}
    movable = np.array([i for i in range(P) if i not in fixed])
    Pc = _preconditioner(ends.e1, opts.precondition)

    def value(x):
        return phi_eps(FourierLoop.from_flat(T, x), geom, masses, params, M).value

    def graded(x):
        return phi_eps(FourierLoop.from_flat(T, x), geom, masses, params, M)

    def change(x, s):
        ft = value(x + s)
        return ft, ft - value(x)

    def safe_value(x):
        try:
            return value(x)
        except CollisionError:
            return np.inf

    X = _initial_path(ends, P, opts.path_jitter, opts.seed)
    vals = np.array([safe_value(x) for x in X])
    if warm_start is not None:
        k0 = movable[np.argmax(vals[movable])]
        X[k0] = warm_start.padded(ends.e1.K).flat if warm_start.K < ends.e1.K else warm_start.flat
        vals[k0] = safe_value(X[k0])

    climb = _LineSearch(opts, opts.path_step_cap)
    descend = _LineSearch(opts, opts.path_step_cap)
    history = []
    best = np.inf
    reason = MAX_ITERATIONS
    it = 0
    k = movable[0]
    gnorm = np.inf
    for it in range(opts.max_iter + 1):
        k = movable[np.argmax(vals[movable])]
        best = min(best, float(np.max(vals)))
        history.append(best)
        if not np.isfinite(vals[k]):
            reason = COLLISION_GUARD
            break
        gv = graded(X[k])
        gnorm = gv.gradient_norm
        if gnorm <= tol:
            reason = CONVERGED
            break
        if it == opts.max_iter:
            break

        tangent = X[k + 1] - X[k - 1]
        tangent /= np.linalg.norm(tangent)
        x, f = X[k], gv.value
        moved = False

        sigma = float(gv.gradient @ tangent)
        if sigma != 0.0:
            step = climb(change, x, -sigma**2, sigma * tangent, sign=-1.0)
            if step is not None:
                x, f = step[:2]
                gv = graded(x)
                moved = True

        g_perp = gv.gradient - (gv.gradient @ tangent) * tangent
        d = -Pc * g_perp
        d -= (d @ tangent) * tangent
        slope = float(gv.gradient @ d)
        if slope < 0.0:
            step = descend(change, x, slope, d)
            if step is not None:
                x, f = step[:2]
                moved = True

        if not moved:
            reason = COLLISION_GUARD if (climb.hit_guard or descend.hit_guard) else STALLED
            break
        X[k], vals[k] = x, f

        if opts.redistribute_every and (it + 1) % opts.redistribute_every == 0:
            X_new = _redistribute(X, fixed | {int(k)})
            changed = np.any(X_new != X, axis=1)
            X = X_new
            for i in np.flatnonzero(changed):
                vals[i] = safe_value(X[i])

    saddle = FourierLoop.from_flat(T, X[k])
    report = SolverReport(it, float(vals[k]), float(gnorm), history, reason)
    logger.info("mountain_pass eps=%g: %s after %d iterations, phi=%.12g |g|=%.3e",
                params.eps, reason, it, vals[k], gnorm)
    return saddle, report


def rescale_to_energy(loop: FourierLoop, geom: CollinearGeometry, masses: MassTriple,
                      params: EnergyParams, M: int = DEFAULT_GRID):
    """Time-rescaling factor omega turning a critical loop into a solution.

    omega^2 is the time integral of grad V_eps(q) . q over the reconstructed
    bodies divided by ||q||^2.  Returns ``(omega, T / omega)``.
    """
    norm2 = loop_norm(loop, geom) ** 2
    if norm2 == 0.0:
        raise DomainError("cannot rescale the zero loop")
    sl = _guarded_sample(loop, M)
    q = body_positions(sl, geom)
    virial = -np.einsum("mij,mij->m", forces(q, masses, params), q)
    omega2 = float(sl.integrate(virial)) / norm2
    if not omega2 > 0:
        raise ArithmeticError(f"omega^2 = {omega2} is not positive; not a critical loop")
    omega = float(np.sqrt(omega2))
    return omega, loop.T / omega


@dataclass
class ContinuationStage:
    eps: float
    params: EnergyParams
    loop: FourierLoop | None = None
    report: SolverReport | None = None
    omega: float | None = None
    rescaled_period: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.report is not None and self.report.converged


def continuation_in_eps(schedule, base_params: EnergyParams, geom: CollinearGeometry,
                        masses: MassTriple, opts: SolverOptions | None = None,
                        T: float = 2 * np.pi, K: int = DEFAULT_HARMONICS):
    """Mountain-pass runs along a decreasing eps schedule, warm-started.

    A failing stage is recorded with its error message and the next stage
    starts afresh from the endpoint path.
    """
    schedule = [float(e) for e in schedule]
    if any(e <= 0 for e in schedule):
        raise DomainError("eps schedule must be positive")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise DomainError("eps schedule must be strictly decreasing")

    opts = opts or SolverOptions()
    stages = []
    previous = None
    for eps in schedule:
        params = replace(base_params, eps=eps)
        stage = ContinuationStage(eps, params)
        try:
            ends = build_mp_endpoints(geom, masses, params, T, K, opts.grid)
            loop, report = mountain_pass(ends, geom, masses, params, opts, warm_start=previous)
            stage.loop, stage.report = loop, report
            stage.omega, stage.rescaled_period = rescale_to_energy(loop, geom, masses, params, opts.grid)
            if report.converged:
                previous = loop
            else:
                stage.error = f"saddle search ended with {report.termination_reason}"
                previous = None
        except (ArithmeticError, DomainError) as exc:
            stage.error = f"{type(exc).__name__}: {exc}"
            previous = None
        stages.append(stage)
    return stages
