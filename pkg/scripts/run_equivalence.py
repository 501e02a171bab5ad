"""Sweep the Brownian-GP / finite-element equivalence check over dimensions, levels and
boundary modes, printing one summary line per case.

    python scripts/run_equivalence.py --max-d 3 --max-k 5
"""

import argparse
import sys

from bdrygp.boundary import BoundaryConfig
from bdrygp.harness.study import run_equivalence_check


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--max-d", type=int, default=3)
    p.add_argument("--max-k", type=int, default=5)
    p.add_argument("--max-level", type=int, default=4, help="isotropic full-grid levels to check")
    p.add_argument("--modes", default="full,left,right")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    failures = 0
    for d in range(1, args.max_d + 1):
        for mode in args.modes.split(","):
            bounds = BoundaryConfig.from_mode(mode, d)
            cases = [("k", k) for k in range(1, args.max_k + 1)]
            cases += [("alpha", (lvl,) * d) for lvl in range(1, args.max_level + 1)]
            for kind, value in cases:
                r = run_equivalence_check(d, bounds, args.seed, **{kind: value})
                failures += not r.passed
                print(f"d={d} {mode:5s} {kind}={value}: {r.summary()}")
    return 4 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
