"""Run configuration and the check log shared by all pipelines."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
from typing import Any

from .errors import PreconditionError
from .exact import Surd, frac

SCHEMA_VERSION = 1
SEED_ENV = "TREESOS_SEED"


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


@dataclass(frozen=True)
class Config:
    """Tunable constants.  The asymptotic regimes the arguments are written for
    are far out of reach, so every constant is a parameter and every
    inequality that depends on one is checked at run time."""

    eps: Fraction = Fraction(1, 20)
    eta: Fraction = Fraction(1, 10)
    delta: Fraction = Fraction(1, 4)
    nu: Fraction = Fraction(1, 20)
    theta: Fraction = Fraction(1, 100)
    rho: Fraction | None = None
    gamma_cap: Fraction = Fraction(1, 4)
    budget: int = 2_000_000
    trials: int = 2000
    exhaustive_bound: int = 16
    max_clusters: int = 64
    seed: int = field(default_factory=default_seed)
    strict: bool = False

    def __post_init__(self):
        for f in ("eps", "eta", "delta", "nu", "theta", "gamma_cap"):
            object.__setattr__(self, f, frac(getattr(self, f)))
        if self.rho is not None:
            object.__setattr__(self, "rho", frac(self.rho))

    def with_(self, **kw) -> "Config":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = str(v) if isinstance(v, Fraction) else v
        return out


def render(x: Any) -> Any:
    """JSON-safe rendering with exact rationals kept as strings."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, (Fraction, Surd)):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, dict):
        return {str(k): render(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [render(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(render(v) for v in x)
    if hasattr(x, "to_dict"):
        return x.to_dict()
    return str(x)


_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
}


class StageLog:
    """Ordered record of evaluated inequalities and notes.

    ``check`` evaluates ``lhs op rhs`` exactly.  A failing *hard* check raises
    :class:`PreconditionError` in strict mode and is only recorded otherwise,
    so a lenient run documents every assumption it could not confirm.
    """

    def __init__(self, strict: bool = False):
        self.strict = strict
        self.checks: list[dict] = []
        self.notes: dict[str, Any] = {}
        self.stage = ""

    def enter(self, stage: str) -> None:
        self.stage = stage

    def check(self, name: str, lhs, op: str, rhs, hard: bool = True) -> bool:
        holds = bool(_OPS[op](lhs, rhs))
        self.checks.append(
            {"stage": self.stage, "name": name, "lhs": render(lhs), "op": op, "rhs": render(rhs),
             "holds": holds, "hard": hard}
        )
        if not holds and hard and self.strict:
            raise PreconditionError(f"{self.stage}: {name}", lhs, rhs)
        return holds

    def note(self, key: str, value) -> None:
        self.notes[key] = value

    def failed(self, hard_only: bool = True) -> list[dict]:
        return [c for c in self.checks if not c["holds"] and (c["hard"] or not hard_only)]

    def to_dict(self) -> dict:
        return {"checks": self.checks, "notes": render(self.notes)}


def dumps(report: dict) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    body = dict(report)
    body.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(render(body), sort_keys=True, indent=2) + "\n"
