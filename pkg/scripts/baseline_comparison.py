"""Effort and messages of the protocols against the two naive baselines.

Failure-free runs at several shapes, then the mean over random crash runs
that always leave at least one survivor (at most t-1 crashes).
"""

import argparse
from statistics import mean

from crashwork.adversary import RandomAdversary
from crashwork.registry import RunConfig, execute

SHAPES = [(16, 4), (64, 16), (256, 16)]
PROTOCOLS = ["naive-all", "naive-leader", "a", "b", "c-batched", "d"]


def metrics(protocol, n, t, seed=None, p=0.0):
    cfg = RunConfig(protocol, n, t)
    adv = None if seed is None else RandomAdversary(seed, p, t - 1)
    return execute(cfg, adv)[0].metrics


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--p", type=float, default=0.05)
    args = ap.parse_args()
    for n, t in SHAPES:
        print(f"\nn={n} t={t}")
        print(f"  {'protocol':13} {'work':>6} {'messages':>9} {'effort':>7} {'rounds':>8}   mean effort under p={args.p}")
        for proto in PROTOCOLS:
            m = metrics(proto, n, t)
            noisy = mean(metrics(proto, n, t, s, args.p).effort for s in range(args.seeds))
            print(f"  {proto:13} {m.work_total:6} {m.messages_total:9} {m.effort:7} {m.rounds_until_all_retired:8}   {noisy:10.1f}")


if __name__ == "__main__":
    main()
