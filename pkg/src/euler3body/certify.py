"""Diagnostics for solved loops, record assembly and re-verification."""

from __future__ import annotations

from dataclasses import dataclass

from .config import CollinearGeometry, MassTriple, central_config_residual
from .dynamics import (closure_error, eom_residual_spectral, initial_state, separation_variation,
                       series_from_loop)
from .functionals import (EnergyParams, action_f, action_f1, energy_residual, phi_eps,
                          total_energy)
from .loops import DEFAULT_GRID, FourierLoop, winding_number
from .optimize import SolverReport, rescale_to_energy
from .orbit_io import DIAGNOSTIC_FIELDS, OrbitRecord

CLOSURE_STEPS = 4096
STORED_RTOL = 1e-10
STORED_ATOL = 1e-12
THRESHOLDS = {
    "centralConfigResidual": 1e-10,
    "eomResidual": 1e-4,
    "energyResidual": 1e-6,
    "closureError": 1e-4,
}


def orbit_params(record: OrbitRecord) -> EnergyParams:
    return EnergyParams(record.solver["h"], record.solver["eps"])


def own_energy(loop: FourierLoop, geom: CollinearGeometry, masses: MassTriple) -> float:
    """Newtonian energy of the reconstructed orbit at t = 0."""
    return total_energy(initial_state(loop, geom, masses), masses, EnergyParams(0.0))


def base_period(kind: str, period: float, omega: float) -> float:
    """Period of the loop the solver worked on.

    Mountain-pass orbits are stored after rescaling, so the solver's loop
    had period ``period * omega``; minimizer orbits are stored as found.
    """
    return period * omega if kind == "mountain_pass" else period


def diagnostics(loop: FourierLoop, geom: CollinearGeometry, masses: MassTriple,
                params: EnergyParams, solver_period: float, M: int = DEFAULT_GRID,
                steps: int = CLOSURE_STEPS) -> dict:
    """Every diagnostic stored in an orbit record.

    ``loop`` is the orbit itself; phiEps is evaluated on the same
    coefficients traversed over ``solver_period``.
    """
    series = series_from_loop(loop, geom, masses, M)
    unperturbed, perturbed = eom_residual_spectral(loop, geom, masses, params, M)
    return {
        "f": action_f(loop, geom, masses, M),
        "f1": action_f1(loop, geom, M).value,
        "phiEps": phi_eps(loop.with_period(solver_period), geom, masses, params, M).value,
        "centralConfigResidual": max(central_config_residual(s, masses) for s in series.states),
        "eomResidualUnperturbed": unperturbed,
        "eomResidualPerturbed": perturbed,
        "energyResidual": energy_residual(series, geom, masses, params),
        "closureError": closure_error(loop, geom, masses, params, steps),
        "separationVariation": separation_variation(loop, M),
        "windingNumber": winding_number(loop, M),
    }


def minimizer_record(loop: FourierLoop, geom: CollinearGeometry, masses: MassTriple,
                     report: SolverReport, M: int = DEFAULT_GRID,
                     steps: int = CLOSURE_STEPS) -> OrbitRecord:
    """Record for a critical loop of f1; h is the orbit's own energy and eps = 0."""
    params = EnergyParams(own_energy(loop, geom, masses))
    omega, _ = rescale_to_energy(loop, geom, masses, params, M)
    solver = {"kind": "minimizer", "eps": 0.0, "h": params.h, "omega": omega,
              "iterations": report.iterations, "gradientNorm": report.final_gradient_norm}
    diag = diagnostics(loop, geom, masses, params, loop.T, M, steps)
    return OrbitRecord(masses, loop.T, geom.lambda0, loop.coeffs, solver, diag)


def saddle_record(saddle: FourierLoop, geom: CollinearGeometry, masses: MassTriple,
                  params: EnergyParams, report: SolverReport, M: int = DEFAULT_GRID,
                  steps: int = CLOSURE_STEPS) -> OrbitRecord:
    """Record for a mountain-pass loop, stored after rescaling to energy h."""
    omega, period = rescale_to_energy(saddle, geom, masses, params, M)
    orbit = saddle.with_period(period)
    solver = {"kind": "mountain_pass", "eps": params.eps, "h": params.h, "omega": omega,
              "iterations": report.iterations, "gradientNorm": report.final_gradient_norm}
    diag = diagnostics(orbit, geom, masses, params, base_period("mountain_pass", period, omega),
                       M, steps)
    return OrbitRecord(masses, period, geom.lambda0, orbit.coeffs, solver, diag)


@dataclass(frozen=True)
class Check:
    name: str
    stored: float | None
    recomputed: float | None
    limit: str
    passed: bool


def _agrees(a, b) -> bool:
    if a is None or b is None:
        return a is b
    return abs(a - b) <= STORED_RTOL * max(abs(a), abs(b)) + STORED_ATOL


def verify_record(record: OrbitRecord, M: int = DEFAULT_GRID,
                  steps: int = CLOSURE_STEPS) -> list:
    """Recompute all diagnostics and test them against storage and thresholds.

    Returns a list of :class:`Check`; the record verifies iff all pass.
    """
    geom, masses, params = record.geometry, record.masses, orbit_params(record)
    solver_period = base_period(record.kind, record.period, record.solver["omega"])
    fresh = diagnostics(record.loop, geom, masses, params, solver_period, M, steps)
    checks = [Check(key, record.diagnostics[key], fresh[key], "matches stored",
                    _agrees(record.diagnostics[key], fresh[key]))
              for key in DIAGNOSTIC_FIELDS]

    eom_key = "eomResidualPerturbed" if params.eps > 0 else "eomResidualUnperturbed"
    for name, key in (("centralConfigResidual", "centralConfigResidual"),
                      ("eomResidual", eom_key),
                      ("energyResidual", "energyResidual"),
                      ("closureError", "closureError")):
        limit = THRESHOLDS[name]
        checks.append(Check(f"{name} threshold", None, fresh[key], f"<= {limit:g}",
                            bool(fresh[key] <= limit)))
    omega, _ = rescale_to_energy(record.loop.with_period(solver_period), geom, masses, params, M)
    checks.append(Check("omega", record.solver["omega"], omega, "matches stored",
                        _agrees(record.solver["omega"], omega)))
    return checks


def verified(checks) -> bool:
    return all(c.passed for c in checks)


def format_checks(checks) -> str:
    def num(x):
        if x is None:
            return ""
        return f"{x:.6e}" if isinstance(x, float) else str(x)
    rows = [f"{'check':34s} {'stored':>14s} {'recomputed':>14s}  {'criterion':16s} result"]
    for c in checks:
        rows.append(f"{c.name:34s} {num(c.stored):>14s} {num(c.recomputed):>14s}  "
                    f"{c.limit:16s} {'PASS' if c.passed else 'FAIL'}")
    return "\n".join(rows)

