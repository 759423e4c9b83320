"""Independent reference computations used by the tests.

Nothing here calls into the see-saw or eigen-solver paths under test.
"""

import numpy as np
from scipy.optimize import minimize


def kron_entrywise(A, B):
    ra, ca = A.shape
    rb, cb = B.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = A[i, j] * B[k, l]
    return out


def _unpack(x, dims):
    vecs, pos = [], 0
    for d in dims:
        z = x[pos:pos + d] + 1j * x[pos + d:pos + 2 * d]
        vecs.append(z / np.linalg.norm(z))
        pos += 2 * d
    return vecs


def block_product(local_dims, blocks, vecs):
    """State vector in party order for one unit vector per block."""
    n = len(local_dims)
    t = vecs[0]
    for v in vecs[1:]:
        t = np.multiply.outer(t, v).reshape(-1)
    order = [p for b in blocks for p in b]
    t = t.reshape([local_dims[p] for p in order])
    return t.transpose(np.argsort(order)).reshape(-1)


def polished_product_max(op, local_dims, blocks, rng, starts=24):
    """Max of <psi|op|psi> over block-product unit vectors.

    Random starts, each polished by BFGS over unnormalized real coordinates.
    """
    bdims = [int(np.prod([local_dims[p] for p in b])) for b in blocks]

    def neg(x):
        psi = block_product(local_dims, blocks, _unpack(x, bdims))
        return -np.real(psi.conj() @ op @ psi)

    best = -np.inf
    for _ in range(starts):
        res = minimize(neg, rng.standard_normal(2 * sum(bdims)), method="BFGS", options={"gtol": 1e-9})
        best = max(best, -res.fun)
    return best


def polished_omega(stack, local_dims, blocks, rng, starts=24):
    """Omega_k for every k: max over subsets of the polished product maximum."""
    from itertools import combinations

    m = len(stack)
    out = []
    for k in range(1, m + 1):
        out.append(max(
            polished_product_max(stack[list(c)].sum(axis=0), local_dims, blocks, rng, starts)
            for c in combinations(range(m), k)
        ))
    return np.minimum(np.maximum.accumulate(out), 1.0)


def brute_prefix(probs, k):
    return np.sort(probs)[::-1][:k].sum()


def concave_majorant_chords(v):
    """Least concave majorant by brute force over every chord (i, j) straddling k."""
    v = np.asarray(v, dtype=float)
    n = v.size
    out = v.copy()
    for k in range(n):
        for i in range(k + 1):
            for j in range(k, n):
                if i == j:
                    continue
                t = (k - i) / (j - i)
                out[k] = max(out[k], (1 - t) * v[i] + t * v[j])
    return out


def majorized_by_definition(x, y, tol=1e-10):
    """x < y straight from the prefix-sum definition, no shared helpers."""
    n = max(len(x), len(y))
    xs = sorted(list(x) + [0.0] * (n - len(x)), reverse=True)
    ys = sorted(list(y) + [0.0] * (n - len(y)), reverse=True)
    sx = sy = 0.0
    for a, b in zip(xs, ys):
        sx += a
        sy += b
        if sx > sy + tol:
            return False
    return abs(sx - sy) <= tol


def werner_bell_dist(d, q):
    p = np.full(d * d, (1 - q) / d**2)
    p[0] += q
    return p


def werner_hellinger_crossing(d, tol=1e-14):
    """q where the Werner/Bell distribution reaches the product-state Hellinger radius.

    Solves sqrt(q + (1-q)/d^2) + (d^2 - 1) sqrt(1-q) / d = sqrt(d) by bisection;
    the left side decreases from d on [0, 1].
    """
    def g(q):
        return np.sqrt(q + (1 - q) / d**2) + (d * d - 1) * np.sqrt(1 - q) / d - np.sqrt(d)

    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2
