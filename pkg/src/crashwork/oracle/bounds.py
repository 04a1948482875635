"""Closed-form worst-case bounds for every protocol."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..engine import ConfigError
from ..protocols import ab, c as pc


@dataclass(frozen=True)
class BoundRecord:
    protocol: str
    work_bound: Fraction | int
    message_bound: Fraction | int | float
    round_bound: Fraction | int
    assumptions: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        def num(x):
            if isinstance(x, Fraction):
                return x.numerator if x.denominator == 1 else float(x)
            return x

        return {
            "protocol": self.protocol,
            "work_bound": num(self.work_bound),
            "message_bound": num(self.message_bound),
            "round_bound": num(self.round_bound),
            "assumptions": list(self.assumptions),
        }


def _c_rounds(n: int, t: int, batched: bool) -> int:
    return t * pc.k_constant(n, t, batched) * (n + t) * 2 ** (n + t)


def bound_for(protocol: str, n: int, t: int, f: int | None = None, *, fallback: bool = False) -> BoundRecord:
    """Worst-case (work, messages, rounds) for one configuration.

    ``f`` is the number of failures (used by D only).  ``fallback`` selects
    D's second case, where the survivors switched to Protocol A.
    """
    if protocol == "a":
        ab.check_shape(n, t)
        r = ab.exact_sqrt(t)
        return BoundRecord("a", 3 * n, 9 * t * r, n * t + 3 * t * t, ("t square", "t divides n"))
    if protocol == "b":
        ab.check_shape(n, t)
        r = ab.exact_sqrt(t)
        return BoundRecord("b", 3 * n, 10 * t * r, 3 * n + 8 * t, ("t square", "t divides n"))
    if protocol == "c":
        pc.check_shape(n, t)
        L = pc.log2_exact(t)
        return BoundRecord("c", n + 2 * t, n + 8 * t * L, _c_rounds(n, t, False), ("t power of 2",))
    if protocol == "c-batched":
        pc.check_shape(n, t)
        L = pc.log2_exact(t)
        batch = -(-n // t)
        return BoundRecord(
            "c-batched", 3 * t * batch, 2 * t + 8 * t * L, _c_rounds(n, t, True),
            ("t power of 2", "work and message bounds derived by treating a batch as one unit"),
        )
    if protocol == "d":
        if n < 1 or t < 1:
            raise ConfigError("need n >= 1 and t >= 1")
        f = 0 if f is None else f
        per = -(-n // t)  # n/t when t divides n
        rounds = (f + 1) * per + 4 * f + 2
        msgs = (4 * f + 2) * t * t
        if not fallback:
            return BoundRecord("d", 2 * n, msgs, rounds, ("no phase loses more than half",))
        return BoundRecord(
            "d",
            4 * n,
            msgs + 9 * t * math.sqrt(t) / (2 * math.sqrt(2)),
            rounds + Fraction(n * t, 2) + Fraction(3 * t * t, 4),
            ("some phase lost more than half; fallback to A",),
        )
    if protocol == "naive-all":
        return BoundRecord("naive-all", t * n, 0, n)
    if protocol == "naive-leader":
        return BoundRecord("naive-leader", n + t - 1, (n + t - 1) * (t - 1), (t - 1) * (2 * n + 1) + 2 * n)
    if protocol.startswith("ba-"):
        from ..byzantine import ba_bound

        return ba_bound(protocol[3:], n, t)
    raise ConfigError(f"unknown protocol {protocol!r}")


def d_failure_free(n: int, t: int) -> BoundRecord:
    return BoundRecord("d", n, 2 * t * t, -(-n // t) + 2, ("no failures",))


def d_one_failure(n: int, t: int) -> BoundRecord:
    if t < 2:
        raise ConfigError("one-failure bound needs t >= 2")
    per = -(-n // t)
    return BoundRecord("d", n + per, 5 * t * t, per + -(-n // (t * (t - 1))) + 6, ("one failure",))
