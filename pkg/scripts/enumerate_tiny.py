"""Exhaustive certification of the tiny adversary spaces, plus a few larger probes.

    python scripts/enumerate_tiny.py            # the gate spaces
    python scripts/enumerate_tiny.py --probes   # also powerset mode and larger shapes
"""

import argparse
import json
import time
from pathlib import Path

from crashwork.oracle.enumerate import SpaceTooLarge, certify, default_space

GATE = [("a", 4, 4, {}), ("b", 4, 4, {}), ("c", 2, 2, {}), ("d", 4, 2, {})]
PROBES = [("a", 4, 4, {"subset_policy": "powerset"}), ("b", 4, 4, {"subset_policy": "powerset"}),
          ("a", 8, 4, {}), ("c", 4, 4, {}), ("ba-a", 4, 2, {}), ("naive-leader", 3, 3, {}),
          ("d", 3, 3, {}), ("d", 4, 4, {})]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--probes", action="store_true")
    ap.add_argument("--out", help="directory for one JSON report per space")
    args = ap.parse_args()
    spaces = GATE + (PROBES if args.probes else [])
    for protocol, n, t, kw in spaces:
        start = time.perf_counter()
        try:
            rep = certify(default_space(protocol, n, t, **kw)).to_json()
        except SpaceTooLarge as e:
            print(f"{protocol}({n},{t}) {kw}: {e}")
            continue
        took = time.perf_counter() - start
        status = "pass" if rep["pass"] else f"FAIL ({rep['executions'] - rep['passed']} executions)"
        print(f"{protocol}({n},{t}) {kw}: {rep['executions']} executions, {status}, "
              f"max work {rep['max_work']}, messages {rep['max_messages']}, rounds {rep['max_rounds']}, {took:.1f}s")
        if not rep["pass"]:
            print("  first violation:", json.dumps(rep["first_violation"]))
        if args.out:
            d = Path(args.out)
            d.mkdir(parents=True, exist_ok=True)
            suffix = "-".join(f"{k}={v}" for k, v in kw.items())
            (d / f"{protocol}_n{n}_t{t}{'_' + suffix if suffix else ''}.json").write_text(json.dumps(rep, indent=2) + "\n")


if __name__ == "__main__":
    main()
