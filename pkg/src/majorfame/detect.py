"""Entanglement criteria built on majorization bounds.

Every criterion is one-sided: a violation proves the state lies outside the
bound's separability class, a non-violation proves nothing and is reported
as inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bounds import BoundResult, PartitionSpec, set_partitions
from .majorization import (
    F_TAGS,
    NotMajorizedError,
    TransferChain,
    compare,
    construct_bistochastic,
    f_divergence,
    hellinger_distance,
    pad,
    schur_measure,
    uniform,
)
from .measurements import Povm, measure
from .tensor import DensityMatrix, HermitianOperator

VIOLATION_TOL = 1e-10
INCONCLUSIVE = "inconclusive"
ENTANGLED = "entangled"
GENUINE = "genuinely-entangled"


def conclusion_for(bound: BoundResult) -> str:
    """What a violation of ``bound`` proves about the state."""
    n = bound.n
    if bound.k is not None:
        if bound.k == n:
            return ENTANGLED
        if bound.k == 2:
            return GENUINE
        return f"at-most-{bound.k - 1}-separable"
    covers = set(bound.covers)
    if not covers:
        # the unconstrained bound holds for every state
        return INCONCLUSIVE
    if n > 2 and covers >= set(set_partitions(n, 2)):
        return GENUINE
    if len(covers) == 1 and next(iter(covers)).fully_separable:
        return ENTANGLED
    return "not-type-" + "+".join(str(p) for p in bound.covers)


def conclusion_rank(conclusion: str) -> float:
    if conclusion == GENUINE:
        return 1000
    if conclusion.startswith("at-most-"):
        return 500 - int(conclusion.split("-")[2])
    if conclusion.startswith("not-type-"):
        return 100
    if conclusion == ENTANGLED:
        return 50
    return 0


@dataclass(frozen=True)
class Verdict:
    """One criterion applied against one bound.

    ``prefix`` and ``gap`` locate the first violated prefix sum of the
    majorization comparison (``None`` if there is none). ``margin`` is the
    criterion's own signed score; positive means violated.
    """

    criterion: str
    bound_id: str
    violated: bool
    prefix: int | None
    gap: float | None
    margin: float
    conclusion: str
    certificate: TransferChain | None = None
    warning: str | None = None

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "bound_id": self.bound_id,
            "violated": self.violated,
            "prefix": self.prefix,
            "gap": self.gap,
            "margin": _finite(self.margin),
            "conclusion": self.conclusion,
            "warning": self.warning,
        }


def _finite(x):
    if x is None:
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def _verdict(criterion, dist, bound, violated, margin, **kw) -> Verdict:
    mv = compare(dist, bound.omega)
    return Verdict(
        criterion=criterion,
        bound_id=bound.label,
        violated=bool(violated),
        prefix=mv.first_violation_prefix,
        gap=mv.gap,
        margin=float(margin),
        conclusion=conclusion_for(bound) if violated else INCONCLUSIVE,
        **kw,
    )


def check_majorization_criterion(dist, bound: BoundResult) -> Verdict:
    mv = compare(dist, bound.omega)
    return _verdict("majorization", dist, bound, not mv.majorized, mv.margin)


def check_schur_criterion(dist, bound: BoundResult, measure_name: str = "shannon") -> Verdict:
    """Violation when the state's entropy is below the bound's by more than the tolerance."""
    x, w = pad(dist, bound.omega)
    margin = schur_measure(measure_name, w) - schur_measure(measure_name, x)
    return _verdict(f"schur:{measure_name}", dist, bound, margin > VIOLATION_TOL, margin)


def check_bistochastic_criterion(dist, bound: BoundResult) -> Verdict:
    """Violation when no doubly stochastic map takes the bound vector to ``dist``.

    On success the T-transform chain is attached as a certificate.
    """
    try:
        chain = construct_bistochastic(dist, bound.omega)
    except NotMajorizedError as err:
        return _verdict("bistochastic", dist, bound, True, err.verdict.margin)
    return _verdict("bistochastic", dist, bound, False, compare(dist, bound.omega).margin, certificate=chain)


def circle_radius(bound: BoundResult) -> float:
    """Hellinger distance of the bound vector from the uniform vector."""
    return hellinger_distance(bound.omega, uniform(bound.m))


def _f_tag(f: str) -> str:
    f = {"hellinger": "hellinger-gen", "d2": "hellinger-gen"}.get(f, f)
    if f not in F_TAGS:
        raise ValueError(f"unsupported convex function tag {f!r}; choose from {F_TAGS}")
    return f


def check_circle_criterion(dist, bound: BoundResult, f: str = "hellinger-gen") -> Verdict:
    """Violation when ``dist`` is farther from uniform than the bound vector.

    Distances are f-divergences ``D_f(. || uniform)``; states of the bound's
    class never exceed the bound's divergence.
    """
    f = _f_tag(f)
    x, w = pad(dist, bound.omega)
    K = uniform(x.size)
    dx, dw = f_divergence(f, x, K), f_divergence(f, w, K)
    margin = 0.0 if dx == dw else dx - dw
    name = "circle:hellinger" if f == "hellinger-gen" else f"circle:{f}"
    return _verdict(name, dist, bound, margin > VIOLATION_TOL, margin)


@dataclass(frozen=True, eq=False)
class WitnessOperator:
    """``Omega_k * I - sum_{i in subset} E_i``; nonnegative on the bound's class."""

    k: int
    subset: tuple[int, ...]
    omega_k: float
    operator: HermitianOperator
    heuristic: bool = False


def build_witnesses(povm: Povm, bound: BoundResult) -> list[WitnessOperator]:
    m = len(povm)
    if bound.m != m:
        raise ValueError(f"bound has {bound.m} outcomes, POVM has {m}")
    stack = povm.stack
    eye = np.eye(povm.spec.total_dim)
    out = []
    for k in range(1, m + 1):
        subset = tuple(bound.subsets[k - 1]) if bound.subsets else tuple(range(k))
        om = float(bound.prefix_maxima[k - 1])
        W = om * eye - stack[list(subset)].sum(axis=0)
        out.append(
            WitnessOperator(k, subset, om, HermitianOperator(povm.spec, W), heuristic=bound.method == "sampled")
        )
    return out


def evaluate_witness(w: WitnessOperator, rho: DensityMatrix) -> float:
    if rho.spec != w.operator.spec:
        raise ValueError("witness and state live on different spaces")
    return float(np.real(np.einsum("ij,ji->", w.operator.matrix, rho.matrix)))


def check_witness_criterion(rho: DensityMatrix, povm: Povm, bound: BoundResult) -> Verdict:
    ws = build_witnesses(povm, bound)
    values = np.array([evaluate_witness(w, rho) for w in ws])
    i = int(np.argmin(values))
    warning = "heuristic-omega" if ws[0].heuristic else None
    dist = measure(rho, povm)
    return _verdict("witness", dist, bound, values[i] < -VIOLATION_TOL, -values[i], warning=warning)


CRITERIA = (
    "majorization",
    "schur:shannon",
    "schur:renyi-2",
    "schur:tsallis-2",
    "bistochastic",
    "circle:hellinger",
    "circle:kl",
    "circle:chi2",
    "witness",
)


def normalize_criterion(tag: str) -> str:
    tag = tag.strip().lower()
    if tag == "schur":
        return "schur:shannon"
    if tag in ("circle", "hellinger"):
        return "circle:hellinger"
    if tag in ("shannon",) or tag.startswith(("renyi", "tsallis")):
        return f"schur:{tag}"
    if tag.startswith("schur:"):
        schur_measure(tag[6:], [1.0])  # validates the measure name
        return tag
    if tag.startswith("circle:"):
        _f_tag(tag[7:])
        return tag
    if tag in ("majorization", "bistochastic", "witness"):
        return tag
    raise ValueError(f"unknown criterion {tag!r}")


def apply_criterion(tag: str, rho: DensityMatrix, povm: Povm, dist, bound: BoundResult) -> Verdict:
    tag = normalize_criterion(tag)
    if tag == "majorization":
        return check_majorization_criterion(dist, bound)
    if tag == "bistochastic":
        return check_bistochastic_criterion(dist, bound)
    if tag == "witness":
        return check_witness_criterion(rho, povm, bound)
    kind, _, arg = tag.partition(":")
    if kind == "schur":
        return check_schur_criterion(dist, bound, arg)
    return check_circle_criterion(dist, bound, arg)


@dataclass
class DetectionReport:
    state_id: str
    povm_id: str
    distribution: np.ndarray
    verdicts: list[Verdict] = field(default_factory=list)
    conclusion: str = INCONCLUSIVE
    circle_radii: list[tuple[str, int | None, float]] = field(default_factory=list)
    state_radius: float = 0.0

    def to_dict(self) -> dict:
        return {
            "state_id": self.state_id,
            "povm_id": self.povm_id,
            "distribution": self.distribution.tolist(),
            "verdicts": [v.to_dict() for v in self.verdicts],
            "conclusion": self.conclusion,
            "radii": [{"bound_id": b, "k": k, "radius": r} for b, k, r in self.circle_radii],
            "state_radius": self.state_radius,
        }


def run_detection(
    rho: DensityMatrix,
    povm: Povm,
    bounds: Sequence[BoundResult],
    criteria: Sequence[str],
    state_id: str = "state",
    povm_id: str = "povm",
) -> DetectionReport:
    """Apply every criterion against every bound and keep the strongest conclusion.

    Equal-strength conclusions keep the first one found.
    """
    dist = measure(rho, povm)
    report = DetectionReport(state_id, povm_id, dist)
    report.state_radius = hellinger_distance(dist, uniform(dist.size))
    for bound in bounds:
        report.circle_radii.append((bound.label, bound.k, circle_radius(bound)))
        for tag in criteria:
            v = apply_criterion(tag, rho, povm, dist, bound)
            report.verdicts.append(v)
            if v.violated and conclusion_rank(v.conclusion) > conclusion_rank(report.conclusion):
                report.conclusion = v.conclusion
    return report
