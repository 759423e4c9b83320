"""POVMs, outcome distributions and the reference bases.

Probability vectors are plain 1-D float arrays; :func:`probability_vector`
validates and clamps them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .tensor import DensityMatrix, HermitianOperator, HilbertSpec, as_spec

PSD_TOL = 1e-10
COMPLETENESS_TOL = 1e-10
CLAMP_TOL = 1e-12
SUM_TOL = 1e-10


def probability_vector(values) -> np.ndarray:
    """Validate a probability vector, snapping sub-``1e-12`` noise to zero."""
    p = np.array(values, dtype=float).reshape(-1)
    if p.size == 0:
        raise ValueError("empty probability vector")
    if np.any(p < -CLAMP_TOL):
        raise ValueError(f"negative probability {p.min():.3g}")
    p[np.abs(p) < CLAMP_TOL] = 0.0
    p = np.clip(p, 0.0, 1.0)
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise ValueError(f"probabilities sum to {p.sum()!r}")
    return p


@dataclass(frozen=True, eq=False)
class Povm:
    spec: HilbertSpec
    elements: tuple[HermitianOperator, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        elements = tuple(
            e if isinstance(e, HermitianOperator) else HermitianOperator(self.spec, e)
            for e in self.elements
        )
        if len(elements) < 2:
            raise ValueError("a POVM needs at least two elements")
        for i, e in enumerate(elements):
            if e.spec != self.spec:
                raise ValueError(f"element {i} acts on {e.dims}, POVM on {self.spec.dims}")
            lam = np.linalg.eigvalsh(e.matrix)[0]
            if lam < -PSD_TOL:
                raise ValueError(f"element {i} is not positive (min eigenvalue {lam:.3g})")
        total = sum(e.matrix for e in elements)
        err = np.max(np.abs(total - np.eye(self.spec.total_dim)))
        if err > COMPLETENESS_TOL:
            raise ValueError(f"elements do not sum to the identity (max deviation {err:.3g})")
        object.__setattr__(self, "elements", elements)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != len(elements):
                raise ValueError("one label per element required")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_matrices(cls, dims, matrices, labels=None) -> "Povm":
        spec = as_spec(dims)
        return cls(spec, tuple(HermitianOperator(spec, m) for m in matrices), labels)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def stack(self) -> np.ndarray:
        """Elements as an ``(m, D, D)`` array."""
        return np.stack([e.matrix for e in self.elements])

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(repr(self.spec.dims).encode())
        # rounding keeps the hash stable against last-bit noise
        h.update(np.round(self.stack, 12).astype(np.complex128).tobytes())
        return h.hexdigest()


def measure(rho: DensityMatrix, povm: Povm) -> np.ndarray:
    """Outcome distribution ``tr(rho E_j)``."""
    if rho.spec != povm.spec:
        raise ValueError(f"state dims {rho.dims} do not match POVM dims {povm.spec.dims}")
    # tr(rho E) = sum_ij rho_ij E_ji
    p = np.real(np.einsum("ij,mji->m", rho.matrix, povm.stack))
    p[np.abs(p) < CLAMP_TOL] = 0.0
    return np.clip(p, 0.0, 1.0)


def tensor_dist(ps: Sequence[np.ndarray]) -> np.ndarray:
    """Joint distribution of independent outcomes, lexicographic order."""
    if len(ps) < 2:
        raise ValueError("tensor_dist needs at least two distributions")
    return reduce(np.kron, (np.asarray(p, dtype=float) for p in ps))


def computational_basis(d: int) -> Povm:
    spec = HilbertSpec((d,))
    elements = []
    for j in range(d):
        e = np.zeros((d, d))
        e[j, j] = 1.0
        elements.append(e)
    return Povm.from_matrices(spec, elements, labels=[str(j) for j in range(d)])


def shift_clock(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Shift ``X|j> = |j+1>`` and clock ``Z|j> = w^j |j>`` with ``w = exp(2 pi i/d)``."""
    X = np.roll(np.eye(d), 1, axis=0)
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return X, Z


def bell_states(d: int) -> np.ndarray:
    """Generalized Bell vectors as rows; row ``s*d + t`` is ``(I (x) X^s Z^t)|B_1>``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    X, Z = shift_clock(d)
    phi = np.eye(d).reshape(-1) / np.sqrt(d)
    rows = []
    for s in range(d):
        for t in range(d):
            U = np.linalg.matrix_power(X, s) @ np.linalg.matrix_power(Z, t)
            rows.append(np.kron(np.eye(d), U) @ phi)
    return np.array(rows)


def bell_basis(d: int) -> Povm:
    """Projective measurement onto the d^2 generalized Bell states."""
    vecs = bell_states(d)
    elements = [np.outer(v, v.conj()) for v in vecs]
    labels = [f"B{s * d + t + 1}" for s in range(d) for t in range(d)]
    return Povm.from_matrices((d, d), elements, labels)


def basis_povm(dims, vectors) -> Povm:
    """Projective POVM from the columns of a unitary."""
    U = np.asarray(vectors, dtype=complex)
    return Povm.from_matrices(dims, [np.outer(U[:, j], U[:, j].conj()) for j in range(U.shape[1])])


def product_povm(a: Povm, b: Povm) -> Povm:
    elements = [np.kron(ea.matrix, eb.matrix) for ea in a.elements for eb in b.elements]
    labels = None
    if a.labels is not None and b.labels is not None:
        labels = [f"{la},{lb}" for la in a.labels for lb in b.labels]
    return Povm(a.spec + b.spec, tuple(HermitianOperator(a.spec + b.spec, e) for e in elements), labels)


def random_povm(rng: np.random.Generator, dims, outcomes: int, rank: int | None = None) -> Povm:
    """Random POVM: Wishart elements ``G_i`` conjugated by ``S^{-1/2}``, ``S = sum G_i``."""
    spec = as_spec(dims)
    D = spec.total_dim
    rank = D if rank is None else rank
    gs = []
    for _ in range(outcomes):
        a = rng.standard_normal((D, rank)) + 1j * rng.standard_normal((D, rank))
        gs.append(a @ a.conj().T)
    w, v = np.linalg.eigh(sum(gs))
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    return Povm.from_matrices(spec, [s_inv_half @ g @ s_inv_half for g in gs])


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
