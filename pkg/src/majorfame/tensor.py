"""Dense linear algebra on small multipartite Hilbert spaces.

Operators are stored as full complex matrices; the target scale is a total
dimension of at most 64, so nothing here bothers with sparsity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Mapping, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
NORM_TOL = 1e-12


@dataclass(frozen=True)
class HilbertSpec:
    """Local dimensions of an n-party Hilbert space."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("a Hilbert space needs at least one party")
        if any(d < 2 for d in dims):
            raise ValueError(f"local dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def __add__(self, other: "HilbertSpec") -> "HilbertSpec":
        return HilbertSpec(self.dims + other.dims)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A Hermitian matrix acting on ``spec``.

    Drift below ``HERMITIAN_TOL`` is symmetrized away; anything larger is
    rejected.
    """

    spec: HilbertSpec
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        D = self.spec.total_dim
        if m.shape != (D, D):
            raise ValueError(f"matrix shape {m.shape} does not match total dimension {D}")
        asym = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if asym > HERMITIAN_TOL:
            raise ValueError(f"matrix is not Hermitian (max asymmetry {asym:.3g})")
        object.__setattr__(self, "matrix", _frozen((m + m.conj().T) / 2))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.spec.dims

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def expectation(self, psi: "PureState") -> float:
        if psi.spec != self.spec:
            raise ValueError("state and operator live on different spaces")
        v = psi.amplitudes
        return float(np.real(v.conj() @ self.matrix @ v))


class DensityMatrix(HermitianOperator):
    """Unit-trace positive semidefinite operator."""

    def __post_init__(self):
        super().__post_init__()
        tr = np.trace(self.matrix).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        lam = np.linalg.eigvalsh(self.matrix)[0]
        if lam < -PSD_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lam:.3g}")

    @classmethod
    def from_operator(cls, op: HermitianOperator) -> "DensityMatrix":
        return cls(op.spec, op.matrix)


@dataclass(frozen=True, eq=False)
class PureState:
    spec: HilbertSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if v.shape[0] != self.spec.total_dim:
            raise ValueError(
                f"state has {v.shape[0]} amplitudes, space has dimension {self.spec.total_dim}"
            )
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {nrm!r})")
        object.__setattr__(self, "amplitudes", _frozen(v))

    @classmethod
    def normalized(cls, spec: HilbertSpec, amplitudes) -> "PureState":
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(spec, v / np.linalg.norm(v))

    @classmethod
    def basis(cls, spec: HilbertSpec, index: int) -> "PureState":
        v = np.zeros(spec.total_dim, dtype=complex)
        v[index] = 1.0
        return cls(spec, v)


def as_spec(dims) -> HilbertSpec:
    if isinstance(dims, HilbertSpec):
        return dims
    if isinstance(dims, (int, np.integer)):
        return HilbertSpec((int(dims),))
    return HilbertSpec(tuple(dims))


def kron(*ops: HermitianOperator) -> HermitianOperator:
    """Kronecker product; the result's parties are the inputs' parties in order."""
    if not ops:
        raise ValueError("kron needs at least one operator")
    spec = reduce(lambda a, b: a + b, (op.spec for op in ops))
    mat = reduce(np.kron, (op.matrix for op in ops))
    if all(isinstance(op, DensityMatrix) for op in ops):
        return DensityMatrix(spec, mat)
    return HermitianOperator(spec, mat)


def kron_states(*states: PureState) -> PureState:
    spec = reduce(lambda a, b: a + b, (s.spec for s in states))
    return PureState.normalized(spec, reduce(np.kron, (s.amplitudes for s in states)))


def identity(spec) -> HermitianOperator:
    spec = as_spec(spec)
    return HermitianOperator(spec, np.eye(spec.total_dim))


def pure_to_density(psi: PureState) -> DensityMatrix:
    v = psi.amplitudes
    return DensityMatrix(psi.spec, np.outer(v, v.conj()))


def partial_contract(op: HermitianOperator, fixed: Mapping[int, PureState]) -> HermitianOperator:
    """Sandwich ``op`` with pure states on some of its parties.

    ``fixed`` maps a 0-based party index to a single-party state. The result
    acts on the remaining parties, in their original order, and satisfies
    ``<chi|result|chi> = <psi (x) chi|op|psi (x) chi>`` with the fixed states
    slotted into their positions.
    """
    dims = op.dims
    n = len(dims)
    if not fixed:
        return op
    if any(p < 0 or p >= n for p in fixed):
        raise ValueError(f"party index out of range for {n} parties")
    if len(fixed) >= n:
        raise ValueError("cannot fix every party; use HermitianOperator.expectation")
    for p, psi in fixed.items():
        if psi.spec.dims != (dims[p],):
            raise ValueError(f"party {p} has dimension {dims[p]}, state has dims {psi.spec.dims}")

    t = op.matrix.reshape(dims + dims)
    # contract from the highest party down so remaining axis indices stay valid
    for p in sorted(fixed, reverse=True):
        v = fixed[p].amplitudes
        n_now = t.ndim // 2
        t = np.tensordot(t, v, axes=([n_now + p], [0]))
        t = np.tensordot(v.conj(), t, axes=([0], [p]))
    keep = tuple(d for i, d in enumerate(dims) if i not in fixed)
    D = int(np.prod(keep))
    return HermitianOperator(HilbertSpec(keep), t.reshape(D, D))


def top_eigpair(op: HermitianOperator) -> tuple[float, PureState]:
    """Largest eigenvalue of ``op`` and one unit eigenvector for it.

    With a degenerate top eigenvalue any vector from the eigenspace may come
    back.
    """
    w, v = np.linalg.eigh(op.matrix)
    return float(w[-1]), PureState.normalized(op.spec, v[:, -1])


def haar_state(rng: np.random.Generator, dim: int, size: int | None = None) -> np.ndarray:
    """Haar-random unit vectors (a single one if ``size`` is None)."""
    shape = (dim,) if size is None else (size, dim)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the induced (Ginibre) measure."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2


def permute_parties(matrix: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of an operator: new party i is old party ``order[i]``."""
    dims = tuple(dims)
    n = len(dims)
    t = np.asarray(matrix).reshape(dims + dims)
    t = t.transpose(tuple(order) + tuple(n + o for o in order))
    D = int(np.prod(dims))
    return t.reshape(D, D)
