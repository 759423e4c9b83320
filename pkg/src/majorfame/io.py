"""JSON encoding of matrices, POVMs and states.

Complex entries are ``[re, im]`` pairs and matrices are flattened row-major.
Nested row lists are also accepted on input.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .measurements import Povm
from .tensor import DensityMatrix, HilbertSpec


def encode_matrix(a) -> list:
    a = np.asarray(a, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in a]


def decode_matrix(data, dim: int) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    z = arr[..., 0] + 1j * arr[..., 1]
    if z.size != dim * dim:
        raise ValueError(f"expected {dim * dim} entries, got {z.size}")
    return z.reshape(dim, dim)


def povm_to_dict(povm: Povm) -> dict:
    out = {"dims": list(povm.spec.dims), "elements": [encode_matrix(e.matrix) for e in povm.elements]}
    if povm.labels is not None:
        out["labels"] = list(povm.labels)
    return out


def povm_from_dict(data: dict) -> Povm:
    spec = HilbertSpec(tuple(data["dims"]))
    mats = [decode_matrix(e, spec.total_dim) for e in data["elements"]]
    return Povm.from_matrices(spec, mats, data.get("labels"))


def density_to_dict(rho: DensityMatrix) -> dict:
    return {"dims": list(rho.dims), "matrix": encode_matrix(rho.matrix)}


def density_from_dict(data: dict) -> DensityMatrix:
    spec = HilbertSpec(tuple(data["dims"]))
    return DensityMatrix(spec, decode_matrix(data["matrix"], spec.total_dim))


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
