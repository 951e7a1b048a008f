"""Finite-difference convergence of the KG residual.

For an exact plane-wave solution the residual is pure truncation error, so
its log-log slope against the step reproduces the stencil order until
rounding (growing like 1/h^2) takes over.  A Laguerre-Gauss beam is probed
the same way.
"""
import numpy as np

from kgbeams.beams import make_field
from kgbeams.coords import SpacetimePoint
from kgbeams.verify import convergence_probe, convergence_slope

STEPS = np.geomspace(0.2, 1e-4, 23)


def table(field, p, m, label):
    print(f"\n{label}")
    print("   step   " + "".join(f"  order {o:<6d}" for o in (2, 4, 6, 8)))
    reports = {o: convergence_probe(field, p, m, STEPS, order=o) for o in (2, 4, 6, 8)}
    for i, h in enumerate(STEPS):
        print(f"  {h:8.2e}" + "".join(f"  {reports[o][i].relative:11.2e}" for o in (2, 4, 6, 8)))
    for o in (2, 4, 6, 8):
        fit = convergence_slope(reports[o], STEPS)
        print(f"  order {o}: fitted slope above the floor {fit.slope:.2f}")


def main():
    plane = make_field("g_b", {"p_perp": 3.0, "p_z": 3.0, "m": 5.0, "varphi": 0.7})
    table(plane, SpacetimePoint(0.3, -1.1, 0.4, 2.0), 5.0, "plane wave, Omega = 6.6")
    lg = make_field("lg", {"n": 2, "l": 3, "E": 4.0, "m": 1.0, "w0": 1.0})
    table(lg, SpacetimePoint(0.5, 1.2, -0.8, 0.2), 1.0, "Laguerre-Gauss n=2, l=3")


if __name__ == "__main__":
    main()
