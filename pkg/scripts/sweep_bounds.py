"""Random-adversary sweeps for every protocol, compared with the closed-form bounds.

    python scripts/sweep_bounds.py --seeds 300 --out results/sweep.json
"""

import argparse
import json
from pathlib import Path

from crashwork.adversary import RandomAdversary
from crashwork.oracle.bounds import bound_for
from crashwork.registry import RunConfig, execute

SHAPES = [("a", 8, 4), ("a", 16, 16), ("b", 8, 4), ("b", 32, 16), ("c", 4, 4), ("c", 8, 8),
          ("c-batched", 4, 4), ("c-batched", 16, 4), ("d", 8, 4), ("d", 16, 8), ("d", 10, 3),
          ("ba-a", 9, 3), ("ba-b", 9, 3), ("ba-c", 9, 3), ("naive-all", 8, 4), ("naive-leader", 8, 4)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--probs", type=float, nargs="+", default=[0.01, 0.05, 0.2])
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = []
    print(f"{'protocol':13} {'n':>3} {'t':>3} {'runs':>5} {'viol':>4}  {'work':>9}  {'messages':>11}  {'rounds':>15}")
    for protocol, n, t in SHAPES:
        cfg = RunConfig(protocol, n, t)
        worst = {"work": 0, "messages": 0, "rounds": 0}
        runs = bad = 0
        for p in args.probs:
            for seed in range(args.seeds):
                res, verdict = execute(cfg, RandomAdversary(seed, p, cfg.default_max_crashes()), check=True)
                m = res.metrics
                runs += 1
                bad += not verdict.passed
                worst["work"] = max(worst["work"], m.work_total)
                worst["messages"] = max(worst["messages"], m.messages_total)
                worst["rounds"] = max(worst["rounds"], m.rounds_until_all_retired)
        f = cfg.default_max_crashes() if protocol == "d" else None
        b = bound_for(protocol, n, t, f).to_json()
        row = {"protocol": protocol, "n": n, "t": t, "runs": runs, "violations": bad, **worst,
               "bound": {k: b[k] for k in ("work_bound", "message_bound", "round_bound")}}
        rows.append(row)
        print(f"{protocol:13} {n:3} {t:3} {runs:5} {bad:4}  {worst['work']:4}/{b['work_bound']:<4}"
              f"  {worst['messages']:5}/{b['message_bound']:<5.0f}  {worst['rounds']:7}/{b['round_bound']:<7}")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(json.dumps(rows, indent=2) + "\n")


if __name__ == "__main__":
    main()
