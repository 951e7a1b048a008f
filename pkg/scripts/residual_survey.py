"""Randomized KG residual campaigns over many seeds.

Draws parameters from the documented ranges, verifies every family at 20
seeded points per draw and reports the worst residual per family, how many
campaigns exceed the bound, and where the failures sit.

    python scripts/residual_survey.py --seeds 20 --step 1e-2
"""
import argparse
import time

import numpy as np

from kgbeams.verify import FDSpec, draw_parameters, verify_family

SUITE = (
    [("g_lg", {})] + [("lg", {"n": 4, "l": 4})] + [("hg", {"mx": 6, "ny": 6})]
    + [("g_exp", {})] + [("exp", {"k": k}) for k in (1, 2, 3)] + [("g_md", {})]
    + [("g_b", {})] + [("bessel", {"l": 5})] + [("g_bg", {})] + [("bg", {"l": 4})]
)
BASE = {"lg": "g_lg", "hg": "g_lg", "exp": "g_exp", "bessel": "g_b", "bg": "g_bg"}


def campaign(seed, fd, bound, draws=3):
    fails = []
    worst = {}
    for d in range(draws):
        rng = np.random.default_rng([seed, d])
        shared = {}
        for family, idx in SUITE:
            base = BASE.get(family, family)
            if base not in shared:
                shared[base] = draw_parameters(base, rng)
            params = {k: v for k, v in shared[base].items() if k != "varphi" or family == base}
            params.update(idx)
            s = verify_family(family, params, seed=seed * 10 + d, fd=fd)
            worst[family] = max(worst.get(family, 0.0), s.max_relative)
            if s.max_relative > bound:
                wp = s.worst_point
                fails.append((family, s.max_relative, params, float(np.hypot(wp.x, wp.y)), wp.t + wp.z))
    return worst, fails


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--step", type=float, default=1e-2)
    ap.add_argument("--order", type=int, default=8)
    ap.add_argument("--bound", type=float, default=1e-6)
    args = ap.parse_args()
    fd = FDSpec(args.order, args.step)
    t0 = time.perf_counter()
    overall, n_failed = {}, 0
    for seed in range(args.seeds):
        worst, fails = campaign(seed, fd, args.bound)
        for f, w in worst.items():
            overall[f] = max(overall.get(f, 0.0), w)
        if fails:
            n_failed += 1
            for family, rel, params, rho, tp in fails:
                print(f"seed {seed}: {family:7s} {rel:.1e}  rho={rho:.2f} t+={tp:.2f}  "
                      + " ".join(f"{k}={v:.3g}" for k, v in params.items()))
    print(f"\n{n_failed}/{args.seeds} campaigns exceed {args.bound:g} (order {args.order}, step {args.step:g})")
    for f, w in overall.items():
        print(f"  {f:7s} worst {w:.2e}")
    print(f"{time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
