"""Independent checks of candidate orbits against the equations of motion.

Two routes are offered.  The spectral route differentiates a loop exactly
and compares mass times acceleration with the force on every grid
instant.  The time-stepping route integrates the three-body system with
a fixed-step RK4 scheme from the loop's initial state and measures how
well the orbit closes after one period.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import (PAIRS, CollinearGeometry, ConfigurationState, MassTriple,
                     ratio_defect, reconstruct_configuration)
from .errors import CollisionError, DomainError
from .functionals import (EnergyParams, _guarded_sample, action_f1, body_positions,
                          body_velocities, forces, kepler_lower_bound)
from .loops import DEFAULT_GRID, FourierLoop, derivative, evaluate, sample

COLLISION_ABORT = 1e-9


@dataclass(frozen=True)
class OrbitTimeSeries:
    times: np.ndarray
    states: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        if len(self.states) != t.size:
            raise DomainError("one state per time instant is required")
        if t.size and (t[0] != 0.0 or np.any(np.diff(t) <= 0)):
            raise DomainError("times must start at 0 and increase strictly")
        t.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", tuple(self.states))

    def __len__(self):
        return self.times.size

    def phase_array(self) -> np.ndarray:
        """All states stacked as (n, 18) phase vectors."""
        if not self.states:
            return np.zeros((0, 18))
        return np.array([s.phase_vector() for s in self.states])


@dataclass(frozen=True)
class DistinctionReport:
    action_gap_f1: float
    separation_variation: float
    kepler_bound: float
    is_kepler_minimizer_like: bool


def initial_state(loop: FourierLoop, geom: CollinearGeometry, masses: MassTriple) -> ConfigurationState:
    return reconstruct_configuration(geom, masses, evaluate(loop, 0.0), derivative(loop, 0.0))


def series_from_loop(loop: FourierLoop, geom: CollinearGeometry, masses: MassTriple,
                     M: int = DEFAULT_GRID) -> OrbitTimeSeries:
    """Spectral samples of the reconstructed orbit on M uniform instants."""
    sl = sample(loop, M)
    q, v = body_positions(sl, geom), body_velocities(sl, geom)
    states = [ConfigurationState(q[j], v[j]) for j in range(M)]
    return OrbitTimeSeries(sl.times, states, {"source": "spectral", "grid": M})


def eom_residual_spectral(loop: FourierLoop, geom: CollinearGeometry, masses: MassTriple,
                          params: EnergyParams, M: int = DEFAULT_GRID):
    """Relative defect of m_i q_i'' = F_i on the grid, as (newtonian, perturbed).

    Each entry is the largest |m_i q_i'' - F_i| over instants and bodies
    divided by the largest |F_i| of the same force law.
    """
    sl = _guarded_sample(loop, M)
    q = body_positions(sl, geom)
    inertia = masses.array[None, :, None] * np.asarray(geom.c)[None, :, None] * sl.rddot[:, None, :]
    out = []
    for law in (None, params):
        F = forces(q, masses, law)
        scale = np.max(np.linalg.norm(F, axis=-1))
        out.append(float(np.max(np.linalg.norm(inertia - F, axis=-1)) / scale))
    return out[0], out[1]


def _min_pair_distance(q) -> float:
    return min(float(np.linalg.norm(q[i] - q[j])) for i, j in PAIRS)


def _swept_pair_distance(q0, q1) -> float:
    """Closest approach of each pair while moving linearly from q0 to q1.

    Catches collisions that a fixed step would otherwise jump across.
    """
    best = np.inf
    for i, j in PAIRS:
        d0, d1 = q0[i] - q0[j], q1[i] - q1[j]
        dd = d1 - d0
        span = float(dd @ dd)
        t = 0.0 if span == 0.0 else min(max(-float(d0 @ dd) / span, 0.0), 1.0)
        best = min(best, float(np.linalg.norm(d0 + t * dd)))
    return best


def integrate(initial: ConfigurationState, masses: MassTriple, params: EnergyParams | None,
              step_count: int, T_final: float) -> OrbitTimeSeries:
    """Classical RK4 with fixed step T_final/step_count.

    ``params=None`` or eps = 0 integrates the Newtonian system.  Raises
    CollisionError when a pair distance drops below 1e-9 of the initial
    configuration scale, at a stage evaluation or anywhere along the
    straight segment between consecutive steps.
    """
    if step_count < 1 or not T_final > 0:
        raise DomainError("need a positive step count and final time")
    m = masses.array[:, None]
    limit = COLLISION_ABORT * initial.scale()
    dt = T_final / step_count

    def rhs(y):
        q, v = y
        if _min_pair_distance(q) < limit:
            raise CollisionError("pair distance fell below the collision threshold")
        return np.stack([v, forces(q, masses, params) / m])

    y = np.stack([initial.positions, initial.velocities])
    states = [initial]
    for n in range(step_count):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y_next = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if _swept_pair_distance(y[0], y_next[0]) < limit:
            raise CollisionError(f"collision during step {n + 1}")
        y = y_next
        states.append(ConfigurationState(y[0], y[1]))
    times = dt * np.arange(step_count + 1)
    times[-1] = T_final
    meta = {"masses": masses, "params": params, "step": dt}
    return OrbitTimeSeries(times, states, meta)


def reverse(state: ConfigurationState) -> ConfigurationState:
    """Same positions with velocities negated."""
    return ConfigurationState(state.positions, -state.velocities)


def closure_error(loop: FourierLoop, geom: CollinearGeometry, masses: MassTriple,
                  params: EnergyParams | None, step_count: int = 4096) -> float:
    """Phase-space distance between the start and the state one period later.

    Relative to the norm of the starting phase vector.
    """
    start = initial_state(loop, geom, masses)
    end = integrate(start, masses, params, step_count, loop.T).states[-1]
    y0 = start.phase_vector()
    return float(np.linalg.norm(end.phase_vector() - y0) / np.linalg.norm(y0))


def collinearity_drift(series: OrbitTimeSeries, lambda0: float) -> float:
    return max((ratio_defect(s, lambda0) for s in series.states), default=0.0)


def separation_variation(loop: FourierLoop, M: int = DEFAULT_GRID) -> float:
    """(max|r| - min|r|) / mean|r| over the grid."""
    rad = sample(loop, M).radius
    if rad.mean() == 0.0:
        raise DomainError("separation variation is undefined for the zero loop")
    return float((rad.max() - rad.min()) / rad.mean())


def compare_orbits(candidate: FourierLoop, geom: CollinearGeometry, masses: MassTriple,
                   M: int = DEFAULT_GRID) -> DistinctionReport:
    """How close a loop comes to the circular Kepler minimizer of f1.

    Minimizer-like means the action gap to the Kepler bound is at most
    1e-6 of the bound and |r| varies by at most 1e-6 relative.
    """
    A = kepler_lower_bound(geom.kepler_constant, candidate.T)
    gap = action_f1(candidate, geom, M).value - A
    variation = separation_variation(candidate, M)
    like = bool(gap <= 1e-6 * A and variation <= 1e-6)
    return DistinctionReport(float(gap), variation, A, like)
