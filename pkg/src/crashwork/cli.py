"""Command-line front end.

    python -m crashwork run --protocol a --n 8 --t 4 --check
    python -m crashwork sweep --protocol b --n 8 --t 4 --seeds 0..999 --adversary random:p=0.05
    python -m crashwork enumerate --protocol a --n 4 --t 4 --rounds-stride 1

Exit codes: 0 success, 2 configuration error, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .adversary import NoCrashes, RandomAdversary, load_scenario
from .engine import ConfigError, ProtocolViolation
from .oracle.checks import PROTOCOLS
from .registry import RunConfig, execute

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 2, 3


@dataclass(frozen=True)
class RandomSpec:
    seed: int = 0
    p: float = 0.05
    max: int | None = None


def parse_adversary(text: str):
    """``none``, ``file:PATH`` or ``random:seed=S,p=P,max=M`` (every key optional)."""
    if text == "none":
        return None
    if text.startswith("file:"):
        path = text[5:]
        if not Path(path).is_file():
            raise ConfigError(f"scenario file {path!r} not found")
        try:
            return load_scenario(path)
        except (ValueError, KeyError, TypeError) as e:
            raise ConfigError(f"bad scenario file {path!r}: {e}") from e
    if text == "random" or text.startswith("random:"):
        fields = {}
        body = text[7:]
        for part in filter(None, body.split(",")):
            key, sep, val = part.partition("=")
            if not sep or key not in ("seed", "p", "max"):
                raise ConfigError(f"bad random adversary field {part!r}")
            try:
                fields[key] = float(val) if key == "p" else int(val)
            except ValueError as e:
                raise ConfigError(f"bad value for {key}: {val!r}") from e
        return RandomSpec(**fields)
    raise ConfigError(f"unknown adversary {text!r}; use none, file:PATH or random:seed=..,p=..,max=..")


def parse_seeds(text: str) -> range:
    lo, sep, hi = text.partition("..")
    try:
        if not sep:
            return range(int(lo), int(lo) + 1)
        return range(int(lo), int(hi) + 1)
    except ValueError as e:
        raise ConfigError(f"seed range must look like A..B, got {text!r}") from e


def _materialize(cfg: RunConfig, adv, seed: int | None = None):
    if isinstance(adv, RandomSpec):
        cap = cfg.default_max_crashes() if adv.max is None else adv.max
        return RandomAdversary(adv.seed if seed is None else seed, adv.p, cap)
    return adv or NoCrashes()


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    cfg = RunConfig(args.protocol, args.n, args.t)
    cfg.validate()
    adv = _materialize(cfg, parse_adversary(args.adversary))
    try:
        res, verdict = execute(cfg, adv, check=args.check)
    except ProtocolViolation as e:
        print(f"protocol violation: {e}", file=sys.stderr)
        return EXIT_VIOLATION
    if args.trace:
        Path(args.trace).write_text(res.trace.to_jsonl())
    _emit(res.metrics.to_json(protocol=cfg.protocol, n=cfg.n, t=cfg.t), args.out)
    if verdict is not None and not verdict.passed:
        print(json.dumps(verdict.to_json(), indent=2), file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = RunConfig(args.protocol, args.n, args.t)
    cfg.validate()
    spec = parse_adversary(args.adversary)
    if not isinstance(spec, RandomSpec):
        raise ConfigError("sweep needs a random adversary, e.g. --adversary random:p=0.05")
    seeds = parse_seeds(args.seeds)
    summary = {"runs": 0, "violations": 0, "max_work": 0, "max_messages": 0, "max_rounds": 0}
    bad = []
    for seed in seeds:
        adv = _materialize(cfg, spec, seed)
        summary["runs"] += 1
        try:
            res, verdict = execute(cfg, adv, check=True)
        except ProtocolViolation as e:
            summary["violations"] += 1
            bad.append({"seed": seed, "violations": [{"invariant": "protocol", "detail": str(e)}]})
            continue
        m = res.metrics
        summary["max_work"] = max(summary["max_work"], m.work_total)
        summary["max_messages"] = max(summary["max_messages"], m.messages_total)
        summary["max_rounds"] = max(summary["max_rounds"], m.rounds_until_all_retired)
        if not verdict.passed:
            summary["violations"] += 1
            bad.append({"seed": seed, **verdict.to_json()})
    if bad:
        summary["offending_seeds"] = [b["seed"] for b in bad]
    _emit(summary, args.out)
    if bad:
        print(json.dumps(bad[0], indent=2), file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_enumerate(args) -> int:
    from .oracle.enumerate import SpaceTooLarge, certify, default_space

    space = default_space(args.protocol, args.n, args.t, stride=args.rounds_stride,
                          subset_policy=args.subset_policy, cap=args.cap)
    try:
        rep = certify(space)
    except SpaceTooLarge as e:
        _emit({"space": space.to_json(), "error": str(e), "size_at_least": e.reached}, args.out)
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG
    _emit(rep.to_json(), args.out)
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crashwork", description="Crash-tolerant sequential work protocols")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--protocol", required=True, choices=PROTOCOLS)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--t", type=int, required=True)
        p.add_argument("--out", help="write JSON here instead of stdout")

    run = sub.add_parser("run", help="one execution")
    common(run)
    run.add_argument("--adversary", default="none")
    run.add_argument("--trace", help="write the JSON-lines trace here")
    run.add_argument("--check", action="store_true", help="check invariants and bounds")
    run.set_defaults(fn=cmd_run)

    sw = sub.add_parser("sweep", help="seeded random-adversary runs, all checked")
    common(sw)
    sw.add_argument("--adversary", default="random:p=0.05")
    sw.add_argument("--seeds", default="0..99", help="inclusive range A..B")
    sw.set_defaults(fn=cmd_sweep)

    en = sub.add_parser("enumerate", help="exhaustive adversary enumeration")
    common(en)
    en.add_argument("--rounds-stride", type=int, default=1)
    en.add_argument("--subset-policy", choices=("prefix", "powerset"), default="prefix")
    en.add_argument("--cap", type=int, default=10**6)
    en.set_defaults(fn=cmd_enumerate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
