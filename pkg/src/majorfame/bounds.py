"""State-independent majorization bounds for measurement outcome distributions.

For a POVM with m outcomes and a class of states, the bound vector ``omega``
is assembled from ``Omega_k``, the largest total probability any class member
puts on k outcomes:

    omega = (Omega_1, Omega_2 - Omega_1, ..., Omega_m - Omega_{m-1})

Every mixture of class members then has an outcome distribution majorized
by ``omega``. Classes are products of pure states across a partition of the
parties (mixtures of these have the same bound), unions of such classes
(via the lattice join), or no constraint at all (spectral bound).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import tempfile
from dataclasses import dataclass, field, replace
from functools import reduce
from math import comb
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from . import __version__
from .majorization import concave_majorant, increments, join_all, lorenz
from .measurements import Povm
from .tensor import HilbertSpec, PureState, haar_state, permute_parties

EXHAUSTIVE_LIMIT = 20
SUBSET_CHUNK = 256
SAMPLE_CHUNK = 4096
ONE_TOL = 1e-12

_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


@dataclass(frozen=True)
class PartitionSpec:
    """A set partition of the parties ``0..n-1``.

    Blocks are kept sorted, and ordered by their smallest party, so equal
    partitions compare equal.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(int(p) for p in b)) for b in self.blocks), key=min))
        if any(not b for b in blocks):
            raise ValueError("partition blocks must be nonempty")
        flat = [p for b in blocks for p in b]
        if sorted(flat) != list(range(len(flat))):
            raise ValueError(f"blocks {blocks} must be disjoint and cover 0..n-1")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def order(self) -> tuple[int, ...]:
        """Parties listed block by block."""
        return tuple(p for b in self.blocks for p in b)

    @property
    def fully_separable(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    def block_dims(self, dims: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(np.prod([dims[p] for p in b])) for b in self.blocks)

    def refines(self, other: "PartitionSpec") -> bool:
        return all(any(set(b) <= set(c) for c in other.blocks) for b in self.blocks)

    @classmethod
    def parse(cls, text: str) -> "PartitionSpec":
        """Parse ``"AB|C"`` (party letters) or ``"0,1|2"`` (0-based indices)."""
        parts = [s.strip() for s in text.split("|")]
        if any(not s for s in parts):
            raise ValueError(f"malformed partition {text!r}")
        if all(s.isalpha() for s in parts):
            blocks = [tuple(_LETTERS.index(ch) for ch in s.upper()) for s in parts]
        else:
            blocks = [tuple(int(t) for t in s.split(",")) for s in parts]
        return cls(tuple(blocks))

    @classmethod
    def single_block(cls, n: int) -> "PartitionSpec":
        return cls((tuple(range(n)),))

    @classmethod
    def singletons(cls, n: int) -> "PartitionSpec":
        return cls(tuple((i,) for i in range(n)))

    def __str__(self) -> str:
        return "|".join("".join(_LETTERS[p] for p in b) for b in self.blocks)


def set_partitions(n: int, k: int | None = None) -> Iterator[PartitionSpec]:
    """All partitions of ``0..n-1`` (into exactly ``k`` blocks if given)."""

    def grow(i: int, blocks: list[list[int]]):
        if i == n:
            if k is None or len(blocks) == k:
                yield PartitionSpec(tuple(tuple(b) for b in blocks))
            return
        if k is not None and len(blocks) + (n - i) < k:
            return
        for b in blocks:
            b.append(i)
            yield from grow(i + 1, blocks)
            b.pop()
        if k is None or len(blocks) < k:
            blocks.append([i])
            yield from grow(i + 1, blocks)
            blocks.pop()

    yield from grow(0, [])


@dataclass(frozen=True, eq=False)
class BoundResult:
    """A bound vector together with how it was obtained.

    ``prefix_maxima[k-1]`` is the computed ``Omega_k``; ``omega`` holds the
    increments of its least concave majorant. ``covers`` lists the partitions
    whose product-state mixtures the bound is valid for (empty for the
    unconstrained bound); ``k`` is set for k-separable bounds.
    """

    omega: np.ndarray
    prefix_maxima: np.ndarray
    method: str
    n: int
    partition: PartitionSpec | None = None
    covers: tuple[PartitionSpec, ...] = ()
    k: int | None = None
    restarts: int = 0
    seed: int | None = None
    converged: bool = True
    exhaustive: bool = True
    subsets: tuple[tuple[int, ...], ...] | None = None
    best_states: tuple[tuple[PureState, ...] | None, ...] | None = None
    components: tuple["BoundResult", ...] = ()
    intermediate: dict = field(default_factory=dict)
    povm_hash: str | None = None

    @property
    def m(self) -> int:
        return self.omega.size

    @property
    def certified(self) -> bool:
        """False when ``Omega_k`` may be underestimated by a non-exhaustive or sampled search."""
        return self.method in ("analytic", "spectral") and self.exhaustive

    @property
    def label(self) -> str:
        if self.k is not None:
            return f"k={self.k}"
        if self.partition is not None:
            return str(self.partition)
        if self.covers:
            return "+".join(str(p) for p in self.covers)
        return "unconstrained"

    def to_dict(self) -> dict:
        return {
            "omega": self.omega.tolist(),
            "prefix_maxima": self.prefix_maxima.tolist(),
            "method": self.method,
            "n": self.n,
            "partition": None if self.partition is None else str(self.partition),
            "covers": [str(p) for p in self.covers],
            "k": self.k,
            "restarts": self.restarts,
            "seed": self.seed,
            "converged": self.converged,
            "exhaustive": self.exhaustive,
            "subsets": None if self.subsets is None else [list(s) for s in self.subsets],
            "components": [c.to_dict() for c in self.components],
            "intermediate": {k: np.asarray(v).tolist() for k, v in self.intermediate.items()},
            "povm_hash": self.povm_hash,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoundResult":
        part = data.get("partition")
        return cls(
            omega=np.array(data["omega"], dtype=float),
            prefix_maxima=np.array(data["prefix_maxima"], dtype=float),
            method=data["method"],
            n=int(data["n"]),
            partition=None if part is None else PartitionSpec.parse(part),
            covers=tuple(PartitionSpec.parse(p) for p in data.get("covers", [])),
            k=data.get("k"),
            restarts=int(data.get("restarts", 0)),
            seed=data.get("seed"),
            converged=bool(data.get("converged", True)),
            exhaustive=bool(data.get("exhaustive", True)),
            subsets=None if data.get("subsets") is None else tuple(tuple(s) for s in data["subsets"]),
            components=tuple(cls.from_dict(c) for c in data.get("components", [])),
            intermediate={k: np.array(v) for k, v in data.get("intermediate", {}).items()},
            povm_hash=data.get("povm_hash"),
        )


def omega_from_prefix(prefix) -> tuple[np.ndarray, np.ndarray]:
    """Repair raw ``Omega_k`` values and assemble ``omega``.

    The sequence is made nondecreasing and capped at 1 with ``Omega_m = 1``;
    ``omega`` is then read off the least concave majorant, which only ever
    raises the curve and so keeps the bound valid.
    """
    p = np.minimum(np.maximum.accumulate(np.asarray(prefix, dtype=float)), 1.0)
    p[-1] = 1.0
    curve = concave_majorant(np.concatenate(([0.0], p)))
    return increments(curve), p


def make_bound(prefix, method: str, n: int, **kwargs) -> BoundResult:
    omega, prefix = omega_from_prefix(prefix)
    return BoundResult(omega=omega, prefix_maxima=prefix, method=method, n=n, **kwargs)


# ----------------------------------------------------------------------------
# outcome subset search


def _search_subsets(
    m: int,
    evaluate: Callable[[int, list[tuple[int, ...]]], tuple[np.ndarray, list]],
    exhaustive: bool,
) -> tuple[np.ndarray, list[tuple[int, ...]], list]:
    """Maximize a subset function over k-subsets of ``range(m)`` for every k.

    ``evaluate(k, subsets)`` returns one value per subset and a payload per
    subset (the maximizing states). Exhaustive enumeration, or greedy growth
    followed by single-swap local search.
    """
    prefix = np.ones(m)
    subsets: list[tuple[int, ...]] = [tuple(range(m))] * m
    payloads: list = [None] * m

    def best_of(k, cands):
        vals, loads = evaluate(k, cands)
        i = int(np.argmax(vals))
        return float(vals[i]), cands[i], loads[i]

    for k in range(1, m):
        if k > 1 and prefix[k - 2] >= 1.0 - ONE_TOL:
            # Omega saturated: extend the previous subset by any unused outcome
            prev = subsets[k - 2]
            extra = next(j for j in range(m) if j not in prev)
            prefix[k - 1], subsets[k - 1], payloads[k - 1] = 1.0, tuple(sorted(prev + (extra,))), payloads[k - 2]
            continue
        if exhaustive:
            best = (-np.inf, None, None)
            combos = itertools.combinations(range(m), k)
            while chunk := list(itertools.islice(combos, SUBSET_CHUNK)):
                cand = best_of(k, chunk)
                if cand[0] > best[0]:
                    best = cand
        else:
            start = subsets[k - 2] if k > 1 else ()
            best = best_of(k, [tuple(sorted(start + (j,))) for j in range(m) if j not in start])
            for _ in range(4 * m):
                cur = best[1]
                swaps = [
                    tuple(sorted(set(cur) - {i} | {j}))
                    for i in cur
                    for j in range(m)
                    if j not in cur
                ]
                if not swaps:
                    break
                cand = best_of(k, swaps)
                if cand[0] > best[0] + 1e-12:
                    best = cand
                else:
                    break
        prefix[k - 1], subsets[k - 1], payloads[k - 1] = best
    return prefix, subsets, payloads


def _exhaustive(m: int) -> bool:
    return m <= EXHAUSTIVE_LIMIT


# ----------------------------------------------------------------------------
# see-saw engine


def _contraction_plan(K: int, free: int) -> str:
    rows, cols = "abcdefgh"[:K], "ijklmnop"[:K]
    terms = ["s" + rows + cols]
    for c in range(K):
        if c != free:
            terms += ["sz" + rows[c], "sz" + cols[c]]
    return ",".join(terms) + "->sz" + rows[free] + cols[free]


def _seesaw_batch(
    ops: np.ndarray,
    block_dims: tuple[int, ...],
    restarts: int,
    rng: np.random.Generator,
    tol: float,
    max_iters: int,
    init: Sequence[np.ndarray] | None = None,
) -> tuple[np.ndarray, list[tuple[np.ndarray, ...]], bool]:
    """Maximize ``<psi|A_s|psi>`` over block-product ``psi`` for a stack of operators.

    ``ops`` has shape ``(S, D, D)`` in block order. Each block update replaces
    the free block by the top eigenvector of the operator contracted with the
    other blocks, so the objective never decreases. Returns the best value per
    operator, the maximizing block vectors, and whether every restart met the
    stagnation tolerance.
    """
    S, D, _ = ops.shape
    K = len(block_dims)
    if K == 1:
        w, v = np.linalg.eigh(ops)
        return w[:, -1], [(v[s, :, -1],) for s in range(S)], True

    T = ops.reshape((S,) + block_dims + block_dims)
    states = [haar_state(rng, Dc, size=S * restarts).reshape(S, restarts, Dc) for Dc in block_dims]
    if init is not None:
        states = [
            np.concatenate([np.broadcast_to(np.asarray(v, dtype=complex), (S, 1, v.size)), st], axis=1)
            for v, st in zip(init, states)
        ]
    R = states[0].shape[1]
    plans = [_contraction_plan(K, b) for b in range(K)]
    paths = [None] * K
    prev = np.full((S, R), -np.inf)
    val = prev
    converged = False
    for _ in range(max_iters):
        for b in range(K):
            operands = [T]
            for c in range(K):
                if c != b:
                    operands += [states[c].conj(), states[c]]
            if paths[b] is None:
                paths[b] = np.einsum_path(plans[b], *operands, optimize="greedy")[0]
            M = np.einsum(plans[b], *operands, optimize=paths[b])
            M = (M + np.swapaxes(M, -1, -2).conj()) / 2
            w, v = np.linalg.eigh(M)
            states[b] = v[..., -1]
            val = w[..., -1]
        if np.all(val - prev < tol):
            converged = True
            break
        prev = val
    best = np.argmax(val, axis=1)
    vectors = [tuple(states[c][s, best[s]] for c in range(K)) for s in range(S)]
    return val[np.arange(S), best], vectors, converged


def _block_ops(povm: Povm, partition: PartitionSpec) -> np.ndarray:
    dims = povm.spec.dims
    order = partition.order
    return np.stack([permute_parties(e.matrix, dims, order) for e in povm.elements])


def _block_specs(dims, partition: PartitionSpec) -> list[HilbertSpec]:
    return [HilbertSpec(tuple(dims[p] for p in b)) for b in partition.blocks]


def _as_states(specs: list[HilbertSpec], vectors) -> tuple[PureState, ...]:
    return tuple(PureState.normalized(sp, v) for sp, v in zip(specs, vectors))


def product_state(dims: Sequence[int], partition: PartitionSpec, block_vectors) -> np.ndarray:
    """Full state vector, in the original party order, of a block-product state.

    ``block_vectors`` may carry a leading batch axis.
    """
    dims = tuple(dims)
    vecs = [np.asarray(v, dtype=complex) for v in block_vectors]
    batch = vecs[0].shape[:-1]
    full = reduce(lambda a, b: (a[..., :, None] * b[..., None, :]).reshape(batch + (-1,)), vecs)
    order = partition.order
    t = full.reshape(batch + tuple(dims[p] for p in order))
    inv = np.argsort(order)
    nb = len(batch)
    t = t.transpose(tuple(range(nb)) + tuple(nb + i for i in inv))
    return t.reshape(batch + (-1,))


def _check_partition(povm: Povm, partition: PartitionSpec):
    if partition.n != povm.spec.n:
        raise ValueError(f"partition {partition} has {partition.n} parties, POVM has {povm.spec.n}")


def spectral_bound(povm: Povm) -> BoundResult:
    """Unconstrained bound: ``Omega_k`` is the largest top eigenvalue of any k-element sum."""
    stack = povm.stack
    m = len(povm)

    def evaluate(k, cands):
        sums = stack[np.array(cands)].sum(axis=1)
        w, v = np.linalg.eigh(sums)
        return w[:, -1], [(v[i, :, -1],) for i in range(len(cands))]

    exhaustive = _exhaustive(m)
    prefix, subsets, loads = _search_subsets(m, evaluate, exhaustive)
    spec = povm.spec
    states = tuple(None if ld is None else _as_states([spec], ld) for ld in loads)
    single = PartitionSpec.single_block(spec.n)
    return make_bound(
        prefix,
        "spectral" if exhaustive else "seesaw",
        spec.n,
        partition=single,
        exhaustive=exhaustive,
        subsets=tuple(subsets),
        best_states=states,
        povm_hash=povm.content_hash(),
    )


def seesaw_bound(
    povm: Povm,
    partition: PartitionSpec | str,
    restarts: int = 32,
    tol: float = 1e-10,
    max_iters: int = 500,
    seed: int = 0,
    warm_start: BoundResult | None = None,
) -> BoundResult:
    """Bound over mixtures of products of pure states across ``partition``.

    Each ``Omega_k`` is the best value found by alternating top-eigenvector
    updates of the blocks, over ``restarts`` Haar-random starting points.
    ``warm_start`` (usually a :func:`sampled_bound` result for the same
    POVM and partition) contributes its best state for each k as an extra
    starting point, so the result dominates it.
    """
    if isinstance(partition, str):
        partition = PartitionSpec.parse(partition)
    _check_partition(povm, partition)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    dims = povm.spec.dims
    block_dims = partition.block_dims(dims)
    stack = _block_ops(povm, partition)
    m = len(povm)
    rng = np.random.default_rng(seed)
    converged = [True]

    def evaluate(k, cands):
        init = None
        if warm_start is not None and warm_start.best_states and warm_start.best_states[k - 1]:
            init = [s.amplitudes for s in warm_start.best_states[k - 1]]
        ops = stack[np.array(cands)].sum(axis=1)
        vals, vecs, ok = _seesaw_batch(ops, block_dims, restarts, rng, tol, max_iters, init)
        converged[0] &= ok
        return vals, vecs

    exhaustive = _exhaustive(m)
    prefix, subsets, loads = _search_subsets(m, evaluate, exhaustive)
    specs = _block_specs(dims, partition)
    states = tuple(None if ld is None else _as_states(specs, ld) for ld in loads)
    return make_bound(
        prefix,
        "spectral" if partition.k == 1 and exhaustive else "seesaw",
        len(dims),
        partition=partition,
        covers=(partition,) if partition.k > 1 else (),
        restarts=restarts,
        seed=seed,
        converged=converged[0],
        exhaustive=exhaustive,
        subsets=tuple(subsets),
        best_states=states,
        povm_hash=povm.content_hash(),
    )


def sampled_bound(
    povm: Povm,
    partition: PartitionSpec | str,
    samples: int = 100_000,
    seed: int = 0,
) -> BoundResult:
    """Estimate ``Omega_k`` from Haar-random block-product states.

    An underestimate of the true bound; intended as an independent check on
    :func:`seesaw_bound`. Output is a deterministic function of ``seed``.
    """
    if isinstance(partition, str):
        partition = PartitionSpec.parse(partition)
    _check_partition(povm, partition)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    dims = povm.spec.dims
    block_dims = partition.block_dims(dims)
    stack = povm.stack
    m = len(povm)
    rng = np.random.default_rng(seed)
    best = np.full(m, -np.inf)
    best_vecs: list = [None] * m
    best_order: list = [None] * m
    done = 0
    while done < samples:
        c = min(SAMPLE_CHUNK, samples - done)
        blocks = [haar_state(rng, Db, size=c) for Db in block_dims]
        psi = product_state(dims, partition, blocks)
        probs = np.einsum("ci,mij,cj->cm", psi.conj(), stack, psi).real
        order = np.argsort(-probs, axis=1, kind="stable")
        tops = np.cumsum(np.take_along_axis(probs, order, axis=1), axis=1)
        idx = np.argmax(tops, axis=0)
        vals = tops[idx, np.arange(m)]
        for k in np.flatnonzero(vals > best):
            best[k] = vals[k]
            best_vecs[k] = [b[idx[k]] for b in blocks]
            best_order[k] = order[idx[k]]
        done += c
    specs = _block_specs(dims, partition)
    states = tuple(_as_states(specs, v) for v in best_vecs)
    subsets = tuple(tuple(sorted(int(j) for j in best_order[k][: k + 1])) for k in range(m))
    return make_bound(
        best,
        "sampled",
        len(dims),
        partition=partition,
        covers=(partition,) if partition.k > 1 else (),
        seed=seed,
        exhaustive=False,
        subsets=subsets,
        best_states=states,
        povm_hash=povm.content_hash(),
    )


def join_bounds(results: Sequence[BoundResult], **kwargs) -> BoundResult:
    """Lattice join of several bounds; valid for mixtures across all their classes."""
    omega = join_all([r.omega for r in results])
    prefix = lorenz(omega)[1:]
    prefix[-1] = 1.0
    m = omega.size
    # for each k keep the subset of the component with the largest Omega_k
    subsets, states = [], []
    for k in range(m):
        src = max(results, key=lambda r: r.prefix_maxima[k] if k < r.m else -1.0)
        subsets.append(src.subsets[k] if src.subsets else tuple(range(k + 1)))
        states.append(src.best_states[k] if src.best_states else None)
    covers: list[PartitionSpec] = []
    for r in results:
        for p in r.covers:
            if p not in covers:
                covers.append(p)
    methods = {r.method for r in results}
    params = dict(
        omega=omega,
        prefix_maxima=prefix,
        method=methods.pop() if len(methods) == 1 else "seesaw",
        n=results[0].n,
        covers=tuple(covers),
        restarts=max(r.restarts for r in results),
        seed=results[0].seed,
        converged=all(r.converged for r in results),
        exhaustive=all(r.exhaustive for r in results),
        subsets=tuple(subsets),
        best_states=tuple(states),
        components=tuple(results),
        povm_hash=results[0].povm_hash,
    )
    params.update(kwargs)
    return BoundResult(**params)


def kseparable_bound(povm: Povm, k: int, method: str = "seesaw", **kwargs) -> BoundResult:
    """Bound for k-separable states: the join over all partitions into exactly k blocks.

    ``intermediate["dims_equal"]`` records whether the local dimensions agree;
    the per-partition bounds are kept in ``components`` either way.
    """
    n = povm.spec.n
    if not 2 <= k <= n:
        raise ValueError(f"k must satisfy 2 <= k <= {n}, got {k}")
    compute = {"seesaw": seesaw_bound, "sampled": sampled_bound}[method]
    family = [compute(povm, p, **kwargs) for p in set_partitions(n, k)]
    dims_equal = len(set(povm.spec.dims)) == 1
    return join_bounds(family, k=k, intermediate={"dims_equal": np.array(dims_equal)})


def lattice_bound_123(povm: Povm, method: str = "seesaw", **kwargs) -> BoundResult:
    """Tripartite bound for all biseparable states, built as two successive joins."""
    if povm.spec.n != 3:
        raise ValueError("lattice_bound_123 needs a tripartite POVM")
    compute = {"seesaw": seesaw_bound, "sampled": sampled_bound}[method]
    ab_c, ac_b, bc_a = (compute(povm, PartitionSpec.parse(p), **kwargs) for p in ("AB|C", "AC|B", "A|BC"))
    omega_23 = join_bounds([ab_c, ac_b])
    result = join_bounds([ab_c, ac_b, bc_a], intermediate={"omega_23": omega_23.omega})
    return result


# ----------------------------------------------------------------------------
# product of distributions from several measurements on one state


def _product_einsums(L: int) -> tuple[str, list[str]]:
    idx = "mno"[:L]
    value = "s" + idx + "," + ",".join("sz" + i for i in idx) + "->sz"
    weights = []
    for l in range(L):
        others = [i for j, i in enumerate(idx) if j != l]
        weights.append("s" + idx + "," + ",".join("sz" + i for i in others) + "->sz" + idx[l])
    return value, weights


def _product_batch(
    masks: np.ndarray,
    stacks: list[np.ndarray],
    restarts: int,
    rng: np.random.Generator,
    tol: float,
    max_iters: int,
    init: np.ndarray | None = None,
) -> tuple[np.ndarray, list[np.ndarray], bool]:
    """Maximize ``sum_{t in I} prod_l <psi|E^l_{t_l}|psi>`` over pure states.

    Each step moves toward the top eigenvector of the gradient operator
    ``sum_l sum_t (prod_{l' != l} p^{l'}_{t_l'}) E^l_{t_l}``, halving the step
    until the objective does not decrease.
    """
    S = masks.shape[0]
    D = stacks[0].shape[-1]
    L = len(stacks)
    value_eq, weight_eqs = _product_einsums(L)
    psi = haar_state(rng, D, size=S * restarts).reshape(S, restarts, D)
    if init is not None:
        psi = np.concatenate([np.broadcast_to(init, (S, 1, D)), psi], axis=1)

    def probs(v):
        return [np.einsum("szi,mij,szj->szm", v.conj(), E, v).real for E in stacks]

    def objective(ps):
        return np.einsum(value_eq, masks, *ps)

    ps = probs(psi)
    f = objective(ps)
    converged = False
    for _ in range(max_iters):
        grad = sum(
            np.einsum("szm,mij->szij", np.einsum(weight_eqs[l], masks, *(ps[:l] + ps[l + 1:])), stacks[l])
            for l in range(L)
        )
        w, v = np.linalg.eigh(grad)
        target = v[..., -1]
        overlap = np.einsum("szi,szi->sz", target.conj(), psi)
        phase = np.where(np.abs(overlap) > 1e-15, overlap / np.maximum(np.abs(overlap), 1e-300), 1.0)
        target = target * phase[..., None]
        new_psi, new_f = psi.copy(), f.copy()
        pending = np.ones_like(f, dtype=bool)
        t = 1.0
        for _ in range(30):
            cand = (1 - t) * psi + t * target
            cand /= np.linalg.norm(cand, axis=-1, keepdims=True)
            cf = objective(probs(cand))
            ok = pending & (cf >= f)
            new_psi[ok], new_f[ok] = cand[ok], cf[ok]
            pending &= ~ok
            if not pending.any():
                break
            t /= 2
        gain = new_f - f
        psi, f = new_psi, new_f
        ps = probs(psi)
        if np.all(gain < tol):
            converged = True
            break
    best = np.argmax(f, axis=1)
    return f[np.arange(S), best], [psi[s, best[s]] for s in range(S)], converged


def _check_same_space(povms: Sequence[Povm]):
    if len(povms) < 2:
        raise ValueError("need at least two POVMs")
    if len(povms) > 3:
        raise ValueError("at most three simultaneous POVMs are supported")
    if any(p.spec != povms[0].spec for p in povms):
        raise ValueError("all POVMs must act on the same space")


def product_uur_bound(
    povms: Sequence[Povm],
    restarts: int = 32,
    tol: float = 1e-10,
    max_iters: int = 500,
    seed: int = 0,
    warm_start: BoundResult | None = None,
) -> BoundResult:
    """Bound on the joint distribution ``p^1(rho) (x) p^2(rho) (x) ...`` over all states."""
    _check_same_space(povms)
    stacks = [p.stack for p in povms]
    shape = tuple(len(p) for p in povms)
    M = int(np.prod(shape))
    rng = np.random.default_rng(seed)
    converged = [True]
    spec = povms[0].spec

    def evaluate(k, cands):
        masks = np.zeros((len(cands), M))
        for i, c in enumerate(cands):
            masks[i, list(c)] = 1.0
        init = None
        if warm_start is not None and warm_start.best_states and warm_start.best_states[k - 1]:
            init = warm_start.best_states[k - 1][0].amplitudes
        vals, vecs, ok = _product_batch(
            masks.reshape((len(cands),) + shape), stacks, restarts, rng, tol, max_iters, init
        )
        converged[0] &= ok
        return vals, [(v,) for v in vecs]

    exhaustive = _exhaustive(M)
    prefix, subsets, loads = _search_subsets(M, evaluate, exhaustive)
    states = tuple(None if ld is None else _as_states([spec], ld) for ld in loads)
    return make_bound(
        prefix,
        "seesaw",
        spec.n,
        restarts=restarts,
        seed=seed,
        converged=converged[0],
        exhaustive=exhaustive,
        subsets=tuple(subsets),
        best_states=states,
        povm_hash=hashlib.sha256("".join(p.content_hash() for p in povms).encode()).hexdigest(),
    )


def sampled_product_bound(povms: Sequence[Povm], samples: int = 100_000, seed: int = 0) -> BoundResult:
    """Sampling estimate of :func:`product_uur_bound` over Haar-random pure states."""
    _check_same_space(povms)
    spec = povms[0].spec
    stacks = [p.stack for p in povms]
    M = int(np.prod([len(p) for p in povms]))
    rng = np.random.default_rng(seed)
    best = np.full(M, -np.inf)
    best_vecs: list = [None] * M
    best_order: list = [None] * M
    done = 0
    while done < samples:
        c = min(SAMPLE_CHUNK, samples - done)
        psi = haar_state(rng, spec.total_dim, size=c)
        ps = [np.einsum("ci,mij,cj->cm", psi.conj(), E, psi).real for E in stacks]
        joint = reduce(lambda a, b: (a[:, :, None] * b[:, None, :]).reshape(c, -1), ps)
        order = np.argsort(-joint, axis=1, kind="stable")
        tops = np.cumsum(np.take_along_axis(joint, order, axis=1), axis=1)
        idx = np.argmax(tops, axis=0)
        vals = tops[idx, np.arange(M)]
        for k in np.flatnonzero(vals > best):
            best[k], best_vecs[k], best_order[k] = vals[k], psi[idx[k]], order[idx[k]]
        done += c
    states = tuple((PureState.normalized(spec, v),) for v in best_vecs)
    subsets = tuple(tuple(sorted(int(j) for j in best_order[k][: k + 1])) for k in range(M))
    return make_bound(
        best, "sampled", spec.n, seed=seed, exhaustive=False, subsets=subsets, best_states=states
    )


# ----------------------------------------------------------------------------
# closed forms


def bell_product_bound(d: int) -> BoundResult:
    """Generalized Bell measurement on product states: ``omega = (1/d, ..., 1/d, 0, ...)``."""
    m = d * d
    prefix = np.minimum(np.arange(1, m + 1) / d, 1.0)
    # outcomes 0..d-1 are the clock-only Bell states, all overlapping |00> by 1/d
    subsets = tuple(tuple(range(k + 1)) for k in range(m))
    part = PartitionSpec.singletons(2)
    return make_bound(prefix, "analytic", 2, partition=part, covers=(part,), subsets=subsets)


def bell_computational_bound(d: int) -> BoundResult:
    """Bell(d) (x) computational(d) on AB|C: every element has a product eigenstate."""
    m = d ** 3
    part = PartitionSpec.parse("AB|C")
    return make_bound(
        np.ones(m), "analytic", 3, partition=part, covers=(part,),
        subsets=tuple(tuple(range(k + 1)) for k in range(m)),
    )


# ----------------------------------------------------------------------------
# cache


def cache_key(povm_hash: str, label: str, method: str, seed, extra: str = "") -> str:
    text = "|".join([povm_hash, label, method, str(seed), __version__, extra])
    return hashlib.sha256(text.encode()).hexdigest()[:32]


def atomic_write_text(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class BoundCache:
    """Directory of JSON bound files keyed by POVM content, class, method and seed."""

    def __init__(self, root):
        self.root = Path(root)

    def path(self, key: str) -> Path:
        return self.root / f"bound-{key}.json"

    def get(self, key: str) -> BoundResult | None:
        p = self.path(key)
        if not p.exists():
            return None
        data = json.loads(p.read_text())
        return BoundResult.from_dict(data["bound"])

    def put(self, key: str, result: BoundResult, meta: dict) -> Path:
        payload = {
            "povm_hash": result.povm_hash,
            "partition": result.label,
            "prefix_maxima": result.prefix_maxima.tolist(),
            "omega": result.omega.tolist(),
            "method": result.method,
            "seed": result.seed,
            "tool_version": __version__,
            "meta": meta,
            "bound": result.to_dict(),
        }
        p = self.path(key)
        atomic_write_text(p, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return p
