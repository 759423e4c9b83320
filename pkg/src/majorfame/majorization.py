"""The majorization order on probability vectors and the tools built on it.

Convention: ``x`` is majorized by ``y`` (``x < y``) when every prefix sum of
``x`` sorted descending is at most the matching prefix sum of ``y``; then
``x = Q y`` for some doubly stochastic ``Q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

PREFIX_TOL = 1e-10


class Relation(str, Enum):
    LESS = "less"
    GREATER = "greater"
    EQUAL = "equal-up-to-permutation"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class MajorizationVerdict:
    """Outcome of :func:`compare`.

    ``first_violation_prefix`` is the smallest ``k`` (1-based) at which the
    first vector's prefix sum exceeds the second's, and ``gap`` is that
    excess. ``margin`` is the largest signed excess over all prefixes, so
    ``margin <= 0`` means ``x < y``.
    """

    relation: Relation
    first_violation_prefix: int | None
    gap: float | None
    margin: float
    strict: bool = False

    @property
    def majorized(self) -> bool:
        return self.relation in (Relation.LESS, Relation.EQUAL)


class NotMajorizedError(ValueError):
    def __init__(self, verdict: MajorizationVerdict):
        self.verdict = verdict
        super().__init__(
            f"first vector is not majorized by the second: prefix {verdict.first_violation_prefix} "
            f"exceeds by {verdict.gap:.3g}"
        )


def pad(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Zero-pad the shorter of two vectors."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = max(x.size, y.size)
    return np.pad(x, (0, n - x.size)), np.pad(y, (0, n - y.size))


def sort_desc(x) -> np.ndarray:
    return np.sort(np.asarray(x, dtype=float))[::-1]


def lorenz(x) -> np.ndarray:
    """Prefix sums of the descending rearrangement, starting at 0."""
    return np.concatenate(([0.0], np.cumsum(sort_desc(x))))


def compare(x, y, tol: float = PREFIX_TOL) -> MajorizationVerdict:
    x, y = pad(x, y)
    diff = np.cumsum(sort_desc(x)) - np.cumsum(sort_desc(y))
    margin = float(diff.max())
    over = np.flatnonzero(diff > tol)
    under = np.flatnonzero(diff < -tol)
    total_ok = abs(diff[-1]) <= tol
    if over.size:
        k = int(over[0])
        first, gap = k + 1, float(diff[k])
    else:
        first, gap = None, None
    if not total_ok:
        relation = Relation.INCOMPARABLE
    elif not over.size and not under.size:
        relation = Relation.EQUAL
    elif not over.size:
        relation = Relation.LESS
    elif not under.size:
        relation = Relation.GREATER
    else:
        relation = Relation.INCOMPARABLE
    return MajorizationVerdict(relation, first, gap, margin, strict=relation is Relation.LESS)


def concave_majorant(values) -> np.ndarray:
    """Least concave majorant of points ``(k, values[k])``, ``k = 0..len-1``, sampled at the integers."""
    v = np.asarray(values, dtype=float)
    hull: list[int] = []
    for k in range(v.size):
        # pop while the middle point lies on or below the chord
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            if (v[j] - v[i]) * (k - i) <= (v[k] - v[i]) * (j - i):
                hull.pop()
            else:
                break
        hull.append(k)
    return np.interp(np.arange(v.size), hull, v[hull])


def increments(curve) -> np.ndarray:
    """Vector whose Lorenz curve is ``curve`` (which starts at 0)."""
    out = np.diff(np.asarray(curve, dtype=float))
    out[np.abs(out) < 1e-15] = 0.0
    return out


def lattice_join(x, y) -> np.ndarray:
    """Least upper bound of ``x`` and ``y`` in the majorization order, sorted descending."""
    x, y = pad(x, y)
    top = np.maximum(lorenz(x), lorenz(y))
    return increments(concave_majorant(top))


def join_all(vectors) -> np.ndarray:
    vectors = list(vectors)
    out = sort_desc(vectors[0])
    for v in vectors[1:]:
        out = lattice_join(out, v)
    return out


@dataclass
class TransferChain:
    """Sequence of T-transforms ``lam*I + (1-lam)*P_ij`` and their product."""

    steps: list[tuple[float, int, int]] = field(default_factory=list)
    matrix: np.ndarray | None = None


def t_transform(d: int, lam: float, i: int, j: int) -> np.ndarray:
    P = np.eye(d)
    P[[i, j]] = P[[j, i]]
    return lam * np.eye(d) + (1 - lam) * P


def construct_bistochastic(x, y, tol: float = PREFIX_TOL) -> TransferChain:
    """Doubly stochastic ``Q`` with ``Q @ sort_desc(y) == sort_desc(x)``, built from T-transforms.

    Each step moves mass from the last coordinate where the working vector
    still exceeds ``x`` to the next coordinate where it falls short, which
    fixes at least one coordinate, so at most ``d - 1`` steps are used.

    Raises
    ------
    NotMajorizedError
        If ``x`` is not majorized by ``y``.
    """
    verdict = compare(x, y, tol)
    if not verdict.majorized:
        raise NotMajorizedError(verdict)
    xs, ys = (sort_desc(v) for v in pad(x, y))
    d = xs.size
    z = ys.copy()
    Q = np.eye(d)
    chain = TransferChain()
    eps = 1e-15
    for _ in range(d - 1):
        short = np.flatnonzero(xs < z - eps)
        if not short.size:
            break
        j = int(short[-1])
        later = np.flatnonzero(xs[j + 1:] > z[j + 1:] + eps)
        if not later.size:
            break
        k = j + 1 + int(later[0])
        excess, deficit = z[j] - xs[j], xs[k] - z[k]
        delta = min(excess, deficit)
        lam = 1.0 - delta / (z[j] - z[k])
        T = t_transform(d, lam, j, k)
        z = T @ z
        # pin the coordinate this step was meant to fix
        if excess <= deficit:
            z[j] = xs[j]
        else:
            z[k] = xs[k]
        Q = T @ Q
        chain.steps.append((float(lam), j, k))
    chain.matrix = Q
    return chain


def random_bistochastic(rng: np.random.Generator, d: int, terms: int | None = None) -> np.ndarray:
    """Convex mixture of random permutation matrices."""
    terms = d if terms is None else terms
    w = rng.dirichlet(np.ones(terms))
    Q = np.zeros((d, d))
    for wi in w:
        Q[np.arange(d), rng.permutation(d)] += wi
    return Q


def _xlogx(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    nz = x > 0
    out[nz] = x[nz] * np.log(x[nz])
    return out


def schur_measure(name: str, x, alpha: float | None = None) -> float:
    """Shannon, Renyi or Tsallis entropy in nats.

    ``name`` may carry the order inline, e.g. ``"renyi-2"`` or ``"tsallis-0.5"``.
    """
    name, alpha = parse_measure(name, alpha)
    p = np.asarray(x, dtype=float)
    if name == "shannon":
        return float(-_xlogx(p).sum())
    s = float(np.sum(p[p > 0] ** alpha))
    if name == "renyi":
        return math.log(s) / (1.0 - alpha)
    return (1.0 - s) / (alpha - 1.0)


def parse_measure(name: str, alpha: float | None = None) -> tuple[str, float | None]:
    base, _, order = name.lower().partition("-")
    if order:
        alpha = float(order)
    if base == "shannon":
        return base, None
    if base not in ("renyi", "tsallis"):
        raise ValueError(f"unknown uncertainty measure {name!r}")
    if alpha is None or not alpha > 0 or alpha == 1:
        raise ValueError(f"{base} entropy needs an order alpha > 0, alpha != 1 (got {alpha})")
    return base, alpha


F_TAGS = ("hellinger-gen", "kl", "chi2")


def f_divergence(f: str, x, y) -> float:
    """``sum_i x_i f(y_i / x_i)`` for the convex ``f`` named by ``f``.

    Tags: ``hellinger-gen`` (1 - sqrt t), ``kl`` (-ln t), ``chi2`` ((t-1)^2).
    Terms with ``x_i = 0`` take their limiting value, which is ``+inf`` for
    ``chi2`` when ``y_i > 0``.
    """
    x, y = pad(x, y)
    pos = x > 0
    if f == "hellinger-gen":
        return float(np.sum(x - np.sqrt(x * y)))
    if f == "kl":
        if np.any(pos & (y <= 0)):
            return math.inf
        return float(np.sum(x[pos] * (np.log(x[pos]) - np.log(y[pos]))))
    if f == "chi2":
        if np.any(~pos & (y > 0)):
            return math.inf
        return float(np.sum((y[pos] - x[pos]) ** 2 / x[pos]))
    raise ValueError(f"unsupported convex function tag {f!r}; choose from {F_TAGS}")


def hellinger_distance(x, y) -> float:
    return math.sqrt(max(f_divergence("hellinger-gen", x, y), 0.0))


def variational_distance(x, y) -> float:
    x, y = pad(x, y)
    return 0.5 * float(np.abs(x - y).sum())


def uniform(m: int) -> np.ndarray:
    return np.full(m, 1.0 / m)
