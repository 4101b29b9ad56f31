"""Check the closed-form Hölder divergence against the integration oracles
on seeded random pairs; exits 1 on any disagreement."""

import argparse
import json
import sys
import time

import numpy as np

from hdmvl import dirichlet as dr


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--gammas", type=float, nargs="+", default=[1.2, 1.7, 2.0])
    p.add_argument("--mc-pairs", type=int, default=3)
    p.add_argument("--budget", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    report, ok = [], True
    for k in (2, 3):
        for g in args.gammas:
            worst = 0.0
            for _ in range(args.pairs):
                a, b = rng.uniform(1, 6, k), rng.uniform(1, 6, k)
                est, _ = dr.oracle_holder(a, b, g, "quadrature")
                worst = max(worst, abs(dr.holder_divergence(a, b, g) - est))
            ok &= worst <= 1e-6
            report.append({"K": k, "gamma": g, "method": "quadrature", "max_abs_diff": worst})
    for _ in range(args.mc_pairs):
        a, b = rng.uniform(1, 6, 5), rng.uniform(1, 6, 5)
        est, se = dr.oracle_holder(a, b, 1.7, "mc", args.budget, int(rng.integers(1 << 30)))
        z = abs(dr.holder_divergence(a, b, 1.7) - est) / se
        ok &= z <= 3.0
        report.append({"K": 5, "gamma": 1.7, "method": "mc", "z": z})
    print(json.dumps({"ok": bool(ok), "seconds": time.perf_counter() - t0, "checks": report},
                     indent=2, sort_keys=True))
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
