import math

import numpy as np
import pytest

from majorfame.bounds import (
    BoundResult,
    PartitionSpec,
    bell_computational_bound,
    bell_product_bound,
    make_bound,
    seesaw_bound,
    spectral_bound,
)
from majorfame.detect import (
    build_witnesses,
    check_bistochastic_criterion,
    check_circle_criterion,
    check_majorization_criterion,
    check_schur_criterion,
    check_witness_criterion,
    circle_radius,
    conclusion_for,
    evaluate_witness,
    normalize_criterion,
    run_detection,
)
from majorfame.majorization import uniform
from majorfame.measurements import bell_basis, computational_basis, measure, product_povm, random_povm
from majorfame.states import build_state, werner
from majorfame.tensor import DensityMatrix, HilbertSpec, haar_state

from oracles import block_product, werner_bell_dist, werner_hellinger_crossing


def random_bound(rng, m, n=2, covers=None, k=None):
    prefix = np.sort(rng.random(m))
    prefix = np.maximum.accumulate(np.clip(prefix + rng.random() * 0.5, 0, 1))
    part = PartitionSpec.singletons(n)
    return make_bound(prefix, "analytic", n, covers=covers or (part,), k=k)


# conclusions


def test_conclusion_lattice():
    assert conclusion_for(bell_product_bound(2)) == "entangled"
    assert conclusion_for(bell_computational_bound(2)) == "not-type-AB|C"
    assert conclusion_for(spectral_bound(bell_basis(2))) == "inconclusive"
    base = bell_computational_bound(2)
    b3 = make_bound(base.prefix_maxima, "seesaw", 3, k=3)
    b2 = make_bound(base.prefix_maxima, "seesaw", 3, k=2)
    assert conclusion_for(b3) == "entangled"
    assert conclusion_for(b2) == "genuinely-entangled"
    b3_of_4 = make_bound(base.prefix_maxima, "seesaw", 4, k=3)
    assert conclusion_for(b3_of_4) == "at-most-2-separable"
    cuts = tuple(PartitionSpec.parse(p) for p in ("AB|C", "AC|B", "A|BC"))
    assert conclusion_for(make_bound(base.prefix_maxima, "seesaw", 3, covers=cuts)) == "genuinely-entangled"
    two = make_bound(base.prefix_maxima, "seesaw", 3, covers=cuts[:2])
    assert conclusion_for(two) == "not-type-AB|C+AC|B"


# majorization criterion


def test_majorization_werner_example():
    dist = measure(werner(2, 0.5), bell_basis(2))
    np.testing.assert_allclose(dist, [0.625, 0.125, 0.125, 0.125], atol=1e-12)
    v = check_majorization_criterion(dist, bell_product_bound(2))
    assert v.violated and v.prefix == 1 and v.gap == pytest.approx(0.125)
    assert v.conclusion == "entangled"


@pytest.mark.parametrize("d", [2, 3, 4])
def test_majorization_werner_threshold(d):
    b = bell_product_bound(d)
    t = 1 / (1 + d)
    for q in np.linspace(0, 1, 201):
        v = check_majorization_criterion(werner_bell_dist(d, q), b)
        assert v.violated == (q > t + 1e-9), q
    v = check_majorization_criterion(werner_bell_dist(d, t), b)
    assert not v.violated and abs(v.margin) <= 1e-9


def test_werner_times_maxmixed_never_violates_cut_bound():
    povm = product_povm(bell_basis(2), computational_basis(2))
    b = bell_computational_bound(2)
    for q in np.linspace(0, 1, 11):
        rho = build_state(f"product(werner(2,{q}),maxmixed(2))")
        assert not check_majorization_criterion(measure(rho, povm), b).violated


# schur


def test_schur_examples():
    b = bell_product_bound(2)
    assert not check_schur_criterion(b.omega, b).violated
    v = check_schur_criterion(werner_bell_dist(2, 1.0), b, "shannon")
    assert v.violated and v.margin == pytest.approx(math.log(2))


def test_schur_implies_majorization(rng):
    for _ in range(300):
        m = int(rng.integers(2, 9))
        dist, b = rng.dirichlet(np.full(m, 0.5)), random_bound(rng, m)
        for name in ("shannon", "renyi-2", "tsallis-2"):
            if check_schur_criterion(dist, b, name).violated:
                assert check_majorization_criterion(dist, b).violated


# bistochastic


def test_bistochastic_certificate_and_refusal():
    b = bell_product_bound(2)
    v = check_bistochastic_criterion(werner_bell_dist(2, 0.2), b)
    assert not v.violated and v.certificate is not None
    Q = v.certificate.matrix
    np.testing.assert_allclose(Q @ b.omega, np.sort(werner_bell_dist(2, 0.2))[::-1], atol=1e-12)
    v = check_bistochastic_criterion(werner_bell_dist(2, 0.5), b)
    assert v.violated and v.certificate is None and v.conclusion == "entangled"


def test_bistochastic_equals_majorization(rng):
    for _ in range(500):
        m = int(rng.integers(2, 9))
        dist, b = rng.dirichlet(np.full(m, 0.5)), random_bound(rng, m)
        assert check_bistochastic_criterion(dist, b).violated == check_majorization_criterion(dist, b).violated


# circles


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_circle_radius_bell(d):
    assert circle_radius(bell_product_bound(d)) ** 2 == pytest.approx(1 - d**-0.5, abs=1e-12)


def test_circle_radius_uniform_and_nesting():
    assert circle_radius(make_bound(np.arange(1, 5) / 4, "analytic", 2)) == pytest.approx(0, abs=1e-12)
    povm = random_povm(np.random.default_rng(3), (2, 2, 2), 5)
    fine = seesaw_bound(povm, "A|B|C", restarts=4)
    coarse = seesaw_bound(povm, "AB|C", restarts=4)
    assert circle_radius(fine) <= circle_radius(coarse) + 1e-12


@pytest.mark.parametrize("d", [2, 3, 4])
def test_circle_hellinger_werner_crossing(d):
    b = bell_product_bound(d)
    qstar = werner_hellinger_crossing(d)
    assert not check_circle_criterion(werner_bell_dist(d, qstar - 1e-6), b).violated
    assert check_circle_criterion(werner_bell_dist(d, qstar + 1e-6), b).violated


def test_circle_hellinger_crossing_d3_closed_form():
    # sqrt(100/108) + 8 sqrt(1/108) = sqrt 3 exactly
    assert werner_hellinger_crossing(3) == pytest.approx(11 / 12, abs=1e-12)
    v = check_circle_criterion(werner_bell_dist(3, 11 / 12), bell_product_bound(3))
    assert abs(v.margin) < 1e-12


def test_circle_center_and_tags():
    b = bell_product_bound(3)
    for f in ("hellinger", "hellinger-gen", "kl", "chi2"):
        assert not check_circle_criterion(uniform(9), b, f).violated
    with pytest.raises(ValueError):
        check_circle_criterion(uniform(9), b, "tv")


def test_circle_implies_majorization(rng):
    for _ in range(300):
        m = int(rng.integers(2, 9))
        dist, b = rng.dirichlet(np.full(m, 0.5)), random_bound(rng, m)
        for f in ("hellinger", "kl", "chi2"):
            if check_circle_criterion(dist, b, f).violated:
                assert check_majorization_criterion(dist, b).violated


# witnesses


def test_witness_operator_form():
    povm = bell_basis(2)
    b = bell_product_bound(2)
    ws = build_witnesses(povm, b)
    assert len(ws) == 4
    w1 = ws[0]
    np.testing.assert_allclose(w1.operator.matrix, 0.5 * np.eye(4) - povm.elements[0].matrix, atol=1e-12)
    for w in ws:
        expect = w.omega_k * np.eye(4) - povm.stack[list(w.subset)].sum(axis=0)
        np.testing.assert_allclose(w.operator.matrix, expect, atol=1e-12)


def test_witness_werner_formula():
    ws = build_witnesses(bell_basis(2), bell_product_bound(2))
    for q in np.linspace(0, 1, 31):
        val = evaluate_witness(ws[0], werner(2, q))
        assert val == pytest.approx(0.5 - q - (1 - q) / 4, abs=1e-12)
        assert (val < 0) == (q > 1 / 3 + 1e-12)
    assert evaluate_witness(ws[0], werner(2, 1)) == pytest.approx(-0.5, abs=1e-12)


def test_witness_full_omega_is_psd():
    povm = product_povm(bell_basis(2), computational_basis(2))
    for w in build_witnesses(povm, bell_computational_bound(2)):
        assert np.linalg.eigvalsh(w.operator.matrix).min() >= -1e-12


def test_witness_sound_on_biseparable(rng):
    povm = product_povm(bell_basis(2), computational_basis(2))
    b = bell_computational_bound(2)
    ws = build_witnesses(povm, b)
    for _ in range(200):
        rho = np.zeros((8, 8), dtype=complex)
        for wi in rng.dirichlet(np.ones(3)):
            psi = block_product((2, 2, 2), [(0, 1), (2,)], [haar_state(rng, 4), haar_state(rng, 2)])
            rho += wi * np.outer(psi, psi.conj())
        rho = DensityMatrix(HilbertSpec((2, 2, 2)), rho)
        assert min(evaluate_witness(w, rho) for w in ws) >= -1e-9


def test_witness_linear(rng):
    povm = random_povm(rng, (2, 2), 4)
    w = build_witnesses(povm, bell_product_bound(2))[1]
    a, c = build_state("werner(2,0.3)"), build_state("werner(2,0.9)")
    mix = DensityMatrix(a.spec, 0.25 * a.matrix + 0.75 * c.matrix)
    assert evaluate_witness(w, mix) == pytest.approx(0.25 * evaluate_witness(w, a) + 0.75 * evaluate_witness(w, c),
                                                     abs=1e-12)


def test_witness_heuristic_flag_and_mismatch():
    from majorfame.bounds import sampled_bound

    s = sampled_bound(bell_basis(2), "A|B", samples=1000)
    v = check_witness_criterion(werner(2, 0.9), bell_basis(2), s)
    assert v.warning == "heuristic-omega"
    ws = build_witnesses(bell_basis(2), bell_product_bound(2))
    with pytest.raises(ValueError):
        evaluate_witness(ws[0], werner(3, 0.5))
    with pytest.raises(ValueError):
        build_witnesses(bell_basis(3), bell_product_bound(2))


# orchestration


def test_criterion_tags():
    assert normalize_criterion("schur") == "schur:shannon"
    assert normalize_criterion("hellinger") == "circle:hellinger"
    assert normalize_criterion("renyi-2") == "schur:renyi-2"
    with pytest.raises(ValueError):
        normalize_criterion("ppt")


ALL = ["majorization", "schur:shannon", "bistochastic", "circle:hellinger", "witness"]


def test_run_detection_product_states_inconclusive(rng):
    povm = bell_basis(2)
    b = bell_product_bound(2)
    for _ in range(200):
        psi = np.kron(haar_state(rng, 2), haar_state(rng, 2))
        rho = DensityMatrix(HilbertSpec((2, 2)), np.outer(psi, psi.conj()))
        assert run_detection(rho, povm, [b], ALL).conclusion == "inconclusive"


def test_run_detection_werner_d3():
    povm, b = bell_basis(3), bell_product_bound(3)
    rep = run_detection(werner(3, 0.9), povm, [b], ALL)
    flagged = {v.criterion for v in rep.verdicts if v.violated}
    assert rep.conclusion == "entangled"
    # the Hellinger circle only crosses at q = 11/12
    assert flagged == {"majorization", "schur:shannon", "bistochastic", "witness"}
    rep = run_detection(werner(3, 0.95), povm, [b], ALL)
    assert all(v.violated for v in rep.verdicts)


def test_run_detection_empty_criteria():
    rep = run_detection(werner(2, 1), bell_basis(2), [bell_product_bound(2)], [])
    assert rep.verdicts == [] and rep.conclusion == "inconclusive"


def test_run_detection_prefers_strongest():
    povm = product_povm(bell_basis(2), computational_basis(2))
    base = bell_computational_bound(2)
    rho = build_state("product(werner(2,1),ket(2,0))")
    # a fabricated uniform k=2 bound that any non-uniform state violates, to exercise ranking
    tight = make_bound(np.arange(1, 9) / 8, "analytic", 3, k=2)
    rep = run_detection(rho, povm, [base, tight], ["majorization"])
    assert rep.conclusion == "genuinely-entangled"
    d = rep.to_dict()
    assert {"verdicts", "conclusion", "radii"} <= set(d)
    assert {"criterion", "bound_id", "violated", "prefix", "gap"} <= set(d["verdicts"][0])
