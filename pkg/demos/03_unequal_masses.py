"""Where the collinear reduction is exact, and where it is not.

lambda0 makes the collinear configuration central for the Newtonian
force.  The inverse-cube force of the perturbation has its own collinear
ratio, which coincides with lambda0 only when m1 = m2.  So for unequal
masses a critical loop of the reduced functional leaves a force defect
proportional to eps in the full three-body equations, and the orbit does
not close under time stepping.  The Newtonian minimizer is unaffected.

Run:  python demos/03_unequal_masses.py
"""

from euler3body import (EnergyParams, MassTriple, SolverOptions, closure_error,
                        continuation_in_eps, eom_residual_spectral, geometry_for)


def main():
    for masses in (MassTriple(1, 1, 2), MassTriple(1, 2, 3)):
        geom = geometry_for(masses)
        print(f"masses {masses.m1:g}, {masses.m2:g}, {masses.m3:g}  (lambda0 = {geom.lambda0:.6f})")
        base = EnergyParams(-geom.s / 4)
        for eps in (1e-2, 1e-3, 1e-4):
            stage, = continuation_in_eps([eps], base, geom, masses, SolverOptions(tol=1e-8), K=8)
            orbit = stage.loop.with_period(stage.rescaled_period)
            _, eom = eom_residual_spectral(orbit, geom, masses, stage.params)
            closure = closure_error(orbit, geom, masses, stage.params, 2048)
            print(f"  eps = {eps:<6g} force defect {eom:.2e}   closure {closure:.2e}")
        print()


if __name__ == "__main__":
    main()
