import numpy as np
import pytest

from majorfame.measurements import (
    Povm,
    basis_povm,
    bell_basis,
    computational_basis,
    measure,
    probability_vector,
    product_povm,
    random_povm,
    random_unitary,
    tensor_dist,
)
from majorfame.states import werner
from majorfame.tensor import DensityMatrix, HilbertSpec, kron, random_density


def test_probability_vector_clamps_noise():
    p = probability_vector([0.5, 0.5 + 1e-13, -1e-13])
    assert p[2] == 0.0
    with pytest.raises(ValueError):
        probability_vector([0.6, 0.6])
    with pytest.raises(ValueError):
        probability_vector([1.1, -0.1])


def test_povm_validation():
    spec = HilbertSpec((2,))
    with pytest.raises(ValueError):
        Povm.from_matrices(spec, [np.eye(2)])
    with pytest.raises(ValueError):
        Povm.from_matrices(spec, [np.diag([1, 0]), np.diag([0, 0.9])])
    with pytest.raises(ValueError):
        Povm.from_matrices(spec, [np.diag([1.2, 0]), np.diag([-0.2, 1])])


def test_measure_maximally_mixed_is_uniform():
    rho = DensityMatrix(HilbertSpec((2, 2)), np.eye(4) / 4)
    np.testing.assert_allclose(measure(rho, bell_basis(2)), [0.25] * 4, atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("q", [0.0, 0.25, 0.5, 1.0])
def test_measure_werner_closed_form(d, q):
    p = measure(werner(d, q), bell_basis(d))
    expect = np.full(d * d, (1 - q) / d**2)
    expect[0] += q
    np.testing.assert_allclose(p, expect, atol=1e-12)


def test_measure_matches_basis_change(rng):
    U = random_unitary(rng, 4)
    rho = DensityMatrix(HilbertSpec((2, 2)), random_density(rng, 4))
    p = measure(rho, basis_povm((2, 2), U))
    np.testing.assert_allclose(p, np.diag(U.conj().T @ rho.matrix @ U).real, atol=1e-12)


def test_measure_rejects_mismatched_spaces():
    with pytest.raises(ValueError):
        measure(werner(2, 0.5), bell_basis(3))


def test_measure_permutation_covariant(rng):
    povm = random_povm(rng, (2, 2), 5)
    rho = DensityMatrix(povm.spec, random_density(rng, 4))
    perm = rng.permutation(5)
    permuted = Povm(povm.spec, tuple(povm.elements[i] for i in perm))
    np.testing.assert_allclose(measure(rho, permuted), measure(rho, povm)[perm], atol=1e-15)
    assert abs(measure(rho, povm).sum() - 1) < 1e-10


def test_tensor_dist_examples():
    np.testing.assert_allclose(tensor_dist([[1, 0], [0.5, 0.5]]), [0.5, 0.5, 0, 0])
    np.testing.assert_allclose(tensor_dist([np.full(2, 0.5), np.full(3, 1 / 3)]), np.full(6, 1 / 6))
    with pytest.raises(ValueError):
        tensor_dist([[1.0]])


def test_tensor_dist_associative(rng):
    a, b, c = (rng.dirichlet(np.ones(n)) for n in (2, 3, 4))
    three = tensor_dist([a, b, c])
    assert abs(three.sum() - 1) < 1e-12
    np.testing.assert_allclose(three, tensor_dist([tensor_dist([a, b]), c]), atol=1e-15)
    np.testing.assert_allclose(three, tensor_dist([a, tensor_dist([b, c])]), atol=1e-15)
    # lexicographic order: index (i, j, k) -> i*12 + j*4 + k
    assert three[1 * 12 + 2 * 4 + 3] == pytest.approx(a[1] * b[2] * c[3])


def test_bell_basis_first_element():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    np.testing.assert_allclose(bell_basis(2).elements[0].matrix, np.outer(phi, phi), atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_bell_basis_complete_and_unit_trace(d):
    b = bell_basis(d)
    assert len(b) == d * d
    np.testing.assert_allclose(b.stack.sum(axis=0), np.eye(d * d), atol=1e-12)
    for e in b.elements:
        assert abs(e.trace() - 1) < 1e-12


def test_bell_basis_d3_orthonormal():
    b = bell_basis(3)
    # recover vectors from the rank-1 projectors and tabulate overlaps
    vecs = [np.linalg.eigh(e.matrix)[1][:, -1] for e in b.elements]
    table = np.abs(np.array([[u.conj() @ v for v in vecs] for u in vecs]))
    np.testing.assert_allclose(table, np.eye(9), atol=1e-12)


def test_product_povm_bell_computational():
    p = product_povm(bell_basis(2), computational_basis(2))
    assert len(p) == 8 and p.spec.dims == (2, 2, 2)
    np.testing.assert_allclose(p.stack.sum(axis=0), np.eye(8), atol=1e-12)


def test_product_povm_factorizes(rng):
    A, B = random_povm(rng, 2, 3), random_povm(rng, 3, 4)
    rho = DensityMatrix(HilbertSpec((2,)), random_density(rng, 2))
    sigma = DensityMatrix(HilbertSpec((3,)), random_density(rng, 3))
    joint = measure(kron(rho, sigma), product_povm(A, B))
    np.testing.assert_allclose(joint, tensor_dist([measure(rho, A), measure(sigma, B)]), atol=1e-12)


def test_content_hash_stable():
    assert bell_basis(2).content_hash() == bell_basis(2).content_hash()
    assert bell_basis(2).content_hash() != bell_basis(3).content_hash()
