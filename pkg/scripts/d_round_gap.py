"""Counts D executions that finish one round past (f+1)n/t + 4f + 2.

A process seen failing in one agreement phase can stay in the agreed T
(it entered T through a union with its own earlier view), so the next
phase allots it work and has to detect it again.  With n = t there is no
slack in the work-phase term to absorb the extra round.
"""

import argparse
from collections import Counter

from crashwork.oracle.enumerate import default_space, enumerate_executions


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--shapes", nargs="+", default=["3x3", "4x2", "8x4", "4x4"])
    ap.add_argument("--cap", type=int, default=10**6)
    args = ap.parse_args()
    for shape in args.shapes:
        n, t = map(int, shape.split("x"))
        kinds, total, example = Counter(), 0, None
        for out in enumerate_executions(default_space("d", n, t, cap=args.cap)):
            total += 1
            for v in out.verdict.violations:
                kinds[v.invariant] += 1
                if example is None:
                    example = ([e.to_json() for e in out.schedule], v.detail)
            if total % 50000 == 0:
                print(f"  ... {total} executions", flush=True)
        print(f"d n={n} t={t}: {total} executions, violations {dict(kinds) or 'none'}")
        if example:
            print(f"  e.g. {example[0]} -> {example[1]}")


if __name__ == "__main__":
    main()
