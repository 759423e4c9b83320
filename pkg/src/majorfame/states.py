"""A small library of named states.

States are described by a ``StateSpec``, written either as a call-like
string (``"werner(3,0.5)"``, ``"product(werner(2,0.2),maxmixed(2))"``,
``"mixture(0.5:ghz(3,2),0.5:wstate(3))"``) or as a JSON object with a
``kind`` key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path

import numpy as np

from .io import density_from_dict, read_json
from .measurements import bell_states
from .tensor import DensityMatrix, HilbertSpec

KINDS = {
    "werner": "werner(d, q): (1-q) I/d^2 + q |B1><B1| on d x d",
    "isotropic": "isotropic(d, F): fidelity-F state, F |B1><B1| + (1-F)(I - |B1><B1|)/(d^2-1)",
    "ghz": "ghz(n, d): projector onto sum_j |j...j>/sqrt(d)",
    "wstate": "wstate(n): projector onto the equal superposition of single excitations",
    "product": "product(spec, spec, ...): tensor product of states",
    "mixture": "mixture(w:spec, w:spec, ...): convex combination",
    "maxmixed": "maxmixed(d): I/d on one party",
    "ket": "ket(d, j): computational basis projector |j><j| on one party",
    "file": "file(path): density matrix JSON {dims, matrix}",
}


@dataclass
class StateSpec:
    kind: str
    args: list = field(default_factory=list)
    id: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown state kind {self.kind!r}")
        if self.id is None:
            self.id = str(self)

    def __str__(self) -> str:
        if self.kind == "mixture":
            inner = ",".join(f"{w:g}:{s}" for w, s in self.args)
        else:
            inner = ",".join(str(a) if not isinstance(a, float) else f"{a:g}" for a in self.args)
        return f"{self.kind}({inner})"

    def with_param(self, name: str, value: float) -> "StateSpec":
        """Substitute a symbolic argument (e.g. ``q`` in ``werner(3,q)``)."""
        def sub(a):
            if isinstance(a, StateSpec):
                return a.with_param(name, value)
            if isinstance(a, tuple):
                return tuple(sub(x) for x in a)
            return value if a == name else a

        return StateSpec(self.kind, [sub(a) for a in self.args])


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    if cur or parts:
        parts.append("".join(cur).strip())
    return [p for p in parts if p]


def _atom(text: str):
    try:
        v = float(text)
    except ValueError:
        return text
    return int(v) if v.is_integer() and "." not in text else v


def parse_state(text: str) -> StateSpec:
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise ValueError(f"malformed state spec {text!r}")
    kind, inner = text[: text.index("(")].strip().lower(), text[text.index("(") + 1 : -1]
    args = _split_top(inner)
    if kind == "file":
        return StateSpec("file", [inner.strip()])
    if kind == "product":
        return StateSpec(kind, [parse_state(a) for a in args])
    if kind == "mixture":
        items = []
        for a in args:
            w, _, s = a.partition(":")
            items.append((_atom(w.strip()), parse_state(s)))
        return StateSpec(kind, items)
    return StateSpec(kind, [_atom(a) for a in args])


def state_from_json(data: dict) -> StateSpec:
    kind = data["kind"]
    if kind == "product":
        args = [state_from_json(s) for s in data["factors"]]
    elif kind == "mixture":
        args = [(float(w), state_from_json(s)) for w, s in data["components"]]
    elif kind == "file":
        args = [data["path"]]
    else:
        args = list(data.get("args", []))
    return StateSpec(kind, args, data.get("id"))


def _num(x, what: str) -> float:
    if isinstance(x, str):
        raise ValueError(f"{what} is unbound ({x!r}); substitute a value first")
    return float(x)


def _unit_interval(q: float, what: str) -> float:
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"{what} must lie in [0, 1], got {q}")
    return q


def werner(d: int, q: float) -> DensityMatrix:
    b1 = bell_states(d)[0]
    rho = (1 - q) * np.eye(d * d) / d**2 + q * np.outer(b1, b1.conj())
    return DensityMatrix(HilbertSpec((d, d)), rho)


def build_state(spec: StateSpec | str, base: Path | None = None) -> DensityMatrix:
    if isinstance(spec, str):
        spec = parse_state(spec)
    k, a = spec.kind, spec.args
    if k == "werner":
        d, q = int(a[0]), _unit_interval(_num(a[1], "q"), "q")
        return werner(d, q)
    if k == "isotropic":
        d, F = int(a[0]), _unit_interval(_num(a[1], "F"), "F")
        b1 = bell_states(d)[0]
        P = np.outer(b1, b1.conj())
        return DensityMatrix(HilbertSpec((d, d)), F * P + (1 - F) * (np.eye(d * d) - P) / (d * d - 1))
    if k == "ghz":
        n, d = int(a[0]), int(a[1]) if len(a) > 1 else 2
        v = np.zeros(d**n, dtype=complex)
        for j in range(d):
            v[sum(j * d**i for i in range(n))] = 1 / math.sqrt(d)
        return DensityMatrix(HilbertSpec((d,) * n), np.outer(v, v.conj()))
    if k == "wstate":
        n = int(a[0])
        v = np.zeros(2**n, dtype=complex)
        for i in range(n):
            v[1 << i] = 1 / math.sqrt(n)
        return DensityMatrix(HilbertSpec((2,) * n), np.outer(v, v.conj()))
    if k == "maxmixed":
        d = int(a[0])
        return DensityMatrix(HilbertSpec((d,)), np.eye(d) / d)
    if k == "ket":
        d, j = int(a[0]), int(a[1])
        m = np.zeros((d, d))
        m[j, j] = 1
        return DensityMatrix(HilbertSpec((d,)), m)
    if k == "product":
        if not a:
            raise ValueError("product needs at least one factor")
        factors = [build_state(s, base) for s in a]
        spec_ = reduce(lambda x, y: x + y, (f.spec for f in factors))
        return DensityMatrix(spec_, reduce(np.kron, (f.matrix for f in factors)))
    if k == "mixture":
        weights = np.array([_num(w, "weight") for w, _ in a])
        if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-10:
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        comps = [build_state(s, base) for _, s in a]
        if any(c.spec != comps[0].spec for c in comps):
            raise ValueError("mixture components must share dimensions")
        return DensityMatrix(comps[0].spec, sum(w * c.matrix for w, c in zip(weights, comps)))
    if k == "file":
        path = Path(a[0])
        if base is not None and not path.is_absolute():
            path = base / path
        return density_from_dict(read_json(path))
    raise ValueError(f"unknown state kind {k!r}")
