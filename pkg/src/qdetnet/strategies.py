"""Measurement strategies with closed-form and numerically evaluated success.

Every strategy returns a :class:`DiscriminationReport` carrying both the
closed-form probability and the Born-rule value computed from the explicit
POVM it constructs, so the two routes can be compared point by point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import Ket, DenseOperator, hermitian_eig, inv_sqrt_on_support
from .network import (PhaseChannel, ProbeSpec, HypothesisEnsemble,
                      build_probe, hypothesis_states, symmetric_overlap_closed)

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class Povm:
    """Positive operators summing to the identity on their space.

    ``failure_index`` designates the inconclusive element of unambiguous
    schemes; minimum-error and pretty-good measurements leave it unset and
    their trailing complement element simply never fires.
    """

    elements: tuple[DenseOperator, ...]
    failure_index: int | None = None

    def __post_init__(self) -> None:
        elements = tuple(self.elements)
        if not elements:
            raise ValueError("a POVM needs at least one element")
        dim = elements[0].dim
        if any(e.dim != dim for e in elements):
            raise ValueError("POVM elements must share one dimension")
        if self.failure_index is not None and not 0 <= self.failure_index < len(elements):
            raise ValueError(f"failure index {self.failure_index} out of range")
        object.__setattr__(self, "elements", elements)

    @property
    def dim(self) -> int:
        return self.elements[0].dim

    def completeness_defect(self) -> float:
        """Largest entrywise deviation of the element sum from the identity."""
        total = sum(e.mat for e in self.elements)
        return float(np.abs(total - np.eye(self.dim)).max())


@dataclass(frozen=True)
class ReportParams:
    """Parameter tuple a report was evaluated at."""

    n: int
    k: int | None
    theta: float
    p: float | None


@dataclass(frozen=True)
class DiscriminationReport:
    strategy: str
    closed_form_success: float
    numeric_success: float
    failure_prob: float
    error_prob: float
    abs_diff: float
    params: ReportParams
    degenerate: bool = False
    notes: str = ""


def _report(strategy: str, closed: float, numeric: float, failure: float,
            error: float, params: ReportParams, degenerate: bool = False,
            notes: str = "") -> DiscriminationReport:
    return DiscriminationReport(
        strategy=strategy, closed_form_success=float(closed),
        numeric_success=float(numeric), failure_prob=float(failure),
        error_prob=float(error), abs_diff=abs(float(closed) - float(numeric)),
        params=params, degenerate=degenerate, notes=notes)


@dataclass(frozen=True)
class PgmScalars:
    """Scalars describing a uniform ensemble with constant pairwise overlap.

    ``r0`` is the overlap of any hypothesis with the ensemble mean, ``r1``
    the gap to the pairwise overlap; ``t = sqrt(r1/r0)``.  ``D0``/``D1`` are
    the inverse-square-root weights on and off the mean direction once a
    no-interaction prior is mixed in.
    """

    r0: float
    r1: float
    t: float = field(init=False)
    D0: float | None = None
    D1: float | None = None

    def __post_init__(self) -> None:
        if self.r0 > 1.0 + 1e-12:
            raise ValueError(f"r0 = {self.r0!r} exceeds 1")
        if self.r0 - self.r1 < -1e-12:
            raise ValueError(f"r0 - r1 = {self.r0 - self.r1!r} is negative")
        t = math.sqrt(self.r1 / self.r0) if self.r0 > 0 else math.inf
        object.__setattr__(self, "t", t)

    def with_null_prior(self, p: float, n: int) -> "PgmScalars":
        """Attach the D0/D1 weights for null prior p over n detectors."""
        d0 = (p + (1.0 - p) * self.r0) ** -0.5
        d1 = ((1.0 - p) * self.r1) ** -0.5 if p < 1.0 and self.r1 > 0 else None
        return PgmScalars(r0=self.r0, r1=self.r1, D0=d0, D1=d1)


def _born_pure(povm: Povm, ensemble: HypothesisEnsemble,
               outcome_map: tuple[int | None, ...]) -> tuple[float, float, float]:
    """Born-rule (success, failure, error) for a pure-state ensemble.

    ``outcome_map[i]`` is the hypothesis index element i decides, or None
    for the inconclusive / never-fires bucket.
    """
    if len(outcome_map) != len(povm.elements):
        raise ValueError("one outcome assignment per POVM element required")
    stack = np.column_stack([s.amplitudes for s in ensemble.states])
    success = failure = error = 0.0
    for element, target in zip(povm.elements, outcome_map):
        probs = ensemble.priors * np.real(
            np.einsum("ij,ij->j", stack.conj(), element.mat @ stack))
        if target is None:
            failure += probs.sum()
        else:
            success += probs[target]
            error += probs.sum() - probs[target]
    return success, failure, error


def _basis_ket(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


# ---------------------------------------------------------------------------
# two detectors


def min_error_two_detector(theta: float) -> tuple[DiscriminationReport, Povm]:
    """Minimum-error test for which of two detectors interacted.

    The measurement projects onto two fixed entangled vectors that do not
    depend on the interaction phase; only the outcome labelling flips with
    the sign of theta.
    """
    channel = PhaseChannel(theta)
    probe = build_probe(ProbeSpec.two_detector_optimal())
    ensemble = hypothesis_states(probe, channel)
    e01 = _basis_ket(4, 1)
    e10 = _basis_ket(4, 2)
    v1 = Ket((e01 - 1j * e10) / math.sqrt(2))
    v2 = Ket((e01 + 1j * e10) / math.sqrt(2))
    p1 = v1.projector()
    p2 = v2.projector()
    complement = DenseOperator(np.eye(4) - p1.mat - p2.mat, hermitian=True, positive=True)
    povm = Povm(elements=(p1, p2, complement))
    outcome_map: tuple[int | None, ...] = (0, 1, None) if theta >= 0 else (1, 0, None)
    success, fail, err = _born_pure(povm, ensemble, outcome_map)
    closed = 0.5 * (1.0 + abs(math.sin(2.0 * theta)))
    params = ReportParams(n=2, k=1, theta=theta, p=None)
    return _report("min_error_two_detector", closed, success, fail, err, params,
                   notes="projectors are phase-independent"), povm


def unambiguous_two_detector(theta: float) -> tuple[DiscriminationReport, Povm]:
    """Zero-error test for which of two detectors interacted.

    Each conclusive element projects onto the vector orthogonal to the
    *other* hypothesis, scaled by the largest constant keeping the failure
    element positive.
    """
    channel = PhaseChannel(theta)
    if theta == 0.0:
        raise ValueError("phase 0 leaves identical hypotheses; no conclusive outcome exists")
    probe = build_probe(ProbeSpec.two_detector_optimal())
    ensemble = hypothesis_states(probe, channel)
    e01 = _basis_ket(4, 1)
    e10 = _basis_ket(4, 2)
    up = np.exp(1j * theta)
    perp1 = Ket((up * e01 - e10 / up) / math.sqrt(2))
    perp2 = Ket((e01 / up - up * e10) / math.sqrt(2))
    d = 1.0 / (1.0 + math.cos(2.0 * theta))
    pi1 = DenseOperator.rank_one(perp2.amplitudes, d)
    pi2 = DenseOperator.rank_one(perp1.amplitudes, d)
    pif = DenseOperator(np.eye(4) - pi1.mat - pi2.mat, hermitian=True, positive=True)
    povm = Povm(elements=(pi1, pi2, pif), failure_index=2)
    success, fail, err = _born_pure(povm, ensemble, (0, 1, None))
    closed = 1.0 - abs(math.cos(2.0 * theta))
    params = ReportParams(n=2, k=1, theta=theta, p=None)
    return _report("unambiguous_two_detector", closed, success, fail, err, params), povm


def _binary_test_operator(p0: float, theta: float) -> tuple[DenseOperator, HypothesisEnsemble]:
    """Weighted difference of the none/one density matrices on the product probe."""
    channel = PhaseChannel(theta)
    probe = build_probe(ProbeSpec.separable(2))
    ensemble = hypothesis_states(probe, channel)
    p1 = 1.0 - p0
    rho0 = probe.projector().mat
    rho1 = 0.5 * sum(s.projector().mat for s in ensemble.states)
    lam = p0 * rho0 - p1 * rho1
    lam = 0.5 * (lam + lam.conj().T)
    return DenseOperator(lam, hermitian=True), ensemble


def one_or_none_trace_norm_closed(p0: float, theta: float) -> float:
    """Closed form of the trace norm governing the one-or-none test."""
    c = math.cos(theta)
    s = math.sin(theta)
    p1 = 1.0 - p0
    inner = (p1 * (1.0 + c * c)) ** 2 + 4.0 * p0 * p0 + 4.0 * p0 * p1 * (1.0 - 3.0 * c * c)
    return 0.5 * math.sqrt(max(inner, 0.0)) + 0.5 * p1 * s * s


def one_or_none_success_closed(p0: float, theta: float) -> float:
    return 0.5 * (1.0 + one_or_none_trace_norm_closed(p0, theta))


def one_or_none(p0: float, theta: float) -> tuple[DiscriminationReport, Povm]:
    """Decide whether a single detector fired or none did (two detectors).

    The optimal binary measurement projects onto the positive eigenspace of
    the prior-weighted difference operator ("none" outcome) and its
    complement ("one" outcome).
    """
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"prior {p0!r} outside [0, 1]")
    lam, ensemble = _binary_test_operator(p0, theta)
    decomp = hermitian_eig(lam)
    dim = lam.dim
    pos = np.zeros((dim, dim), dtype=complex)
    for val, vec in zip(decomp.eigenvalues, decomp.eigenvectors):
        if val > 0.0:
            pos += np.outer(vec.amplitudes, vec.amplitudes.conj())
    pi_none = DenseOperator(0.5 * (pos + pos.conj().T), hermitian=True, positive=True)
    pi_one = DenseOperator(np.eye(dim) - pi_none.mat, hermitian=True, positive=True)
    povm = Povm(elements=(pi_none, pi_one))
    p1 = 1.0 - p0
    probe_state = build_probe(ProbeSpec.separable(2))
    success = p0 * pi_none.expectation(probe_state)
    for out_state in ensemble.states:
        success += p1 * 0.5 * pi_one.expectation(out_state)
    closed = one_or_none_success_closed(p0, theta)
    params = ReportParams(n=2, k=None, theta=theta, p=p0)
    return _report("one_or_none", closed, success, 0.0, 1.0 - success, params), povm


def small_theta_sensitivity(p0: float) -> float:
    """Right-sided slope of the one-or-none success at vanishing phase.

    Central differences taken at phases 1e-3 and 2e-3, extrapolated to zero;
    away from the balanced prior the leading behaviour is quadratic and the
    estimate collapses to ~0.
    """
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"prior {p0!r} outside [0, 1]")
    h = 5e-4

    def slope_at(t: float) -> float:
        return (one_or_none_success_closed(p0, t + h)
                - one_or_none_success_closed(p0, t - h)) / (2.0 * h)

    return 2.0 * slope_at(1e-3) - slope_at(2e-3)


# ---------------------------------------------------------------------------
# N detectors


def pgm_symmetric_scalars(n: int, theta: float, probe_kind: str) -> PgmScalars:
    """Closed-form ensemble scalars for the half-excited symmetric probe or
    the uniform product probe."""
    PhaseChannel(theta)
    if n < 2:
        raise ValueError("need at least 2 detectors")
    x = math.cos(2.0 * theta)
    if probe_kind == "entangled":
        if n % 2 != 0:
            raise ValueError(
                "closed-form scalars assume a half-excited probe (even N); "
                "odd N is handled by the numeric measurement path")
        return PgmScalars(r0=0.5 * (1.0 + x), r1=(1.0 - x) / (2.0 * (n - 1)))
    if probe_kind == "separable":
        return PgmScalars(r0=1.0 / n + (n - 1) * (1.0 + x) / (2.0 * n),
                          r1=(1.0 - x) / (2.0 * n))
    raise ValueError(f"unknown probe kind {probe_kind!r}")


def scalars_from_overlap(n: int, overlap: float) -> PgmScalars:
    """Ensemble scalars of n equiprobable unit states with constant real
    pairwise overlap."""
    return PgmScalars(r0=(1.0 + (n - 1) * overlap) / n, r1=(1.0 - overlap) / n)


def equal_overlap_success(n: int, scalars: PgmScalars) -> float:
    """Square-root-measurement success for a constant-overlap ensemble."""
    return (math.sqrt(scalars.r0) + (n - 1) * math.sqrt(scalars.r1)) ** 2 / n


def _orthonormal_measurement_vectors(ensemble: HypothesisEnsemble,
                                     scalars: PgmScalars) -> tuple[list[np.ndarray], np.ndarray]:
    """The orthonormal detection vectors of the square-root measurement.

    Each vector tilts its hypothesis's deviation from the ensemble mean back
    toward the mean direction by the weight ratio of the two eigenspaces.
    """
    n = len(ensemble)
    h = np.mean([s.amplitudes for s in ensemble.states], axis=0)
    vecs = []
    for state in ensemble.states:
        v = (state.amplitudes - h) / math.sqrt(n * scalars.r1) \
            + h / math.sqrt(n * scalars.r0)
        vecs.append(v)
    return vecs, h


def _degenerate_report(strategy: str, success: float,
                       params: ReportParams) -> tuple[DiscriminationReport, None]:
    report = _report(strategy, success, success, 0.0, 1.0 - success, params,
                     degenerate=True,
                     notes="phase 0 leaves identical hypotheses; guessing value returned")
    return report, None


def pgm_symmetric(n: int, theta: float, probe_kind: str = "entangled",
                  k: int | None = None) -> tuple[DiscriminationReport, Povm | None]:
    """Square-root (pretty-good) measurement for which detector interacted.

    ``probe_kind`` selects the half-excited symmetric probe ("entangled")
    or the uniform product probe ("separable").  For even N the closed form
    uses the paper-exact scalars; odd N or a custom excitation count k fall
    back to scalars derived from the actual constant overlap, with the POVM
    built by the generic measurement path.
    """
    channel = PhaseChannel(theta)
    if n < 2:
        raise ValueError("need at least 2 detectors")
    if probe_kind not in ("entangled", "separable"):
        raise ValueError(f"unknown probe kind {probe_kind!r}")
    if probe_kind == "separable" and k is not None:
        raise ValueError("excitation count applies to the entangled probe only")
    k_used = (n // 2 if k is None else k) if probe_kind == "entangled" else None
    params = ReportParams(n=n, k=k_used, theta=theta, p=None)
    if theta == 0.0:
        return _degenerate_report(f"pgm_symmetric_{probe_kind}", 1.0 / n, params)

    if probe_kind == "entangled":
        probe = build_probe(ProbeSpec.symmetric(n, k_used))
        if n % 2 == 0 and k_used == n // 2:
            scalars = pgm_symmetric_scalars(n, theta, "entangled")
            generic_path = False
        else:
            scalars = scalars_from_overlap(n, symmetric_overlap_closed(n, k_used, theta))
            generic_path = True
    else:
        probe = build_probe(ProbeSpec.separable(n))
        scalars = pgm_symmetric_scalars(n, theta, "separable")
        generic_path = False
    ensemble = hypothesis_states(probe, channel)

    if generic_path:
        povm = _pgm_povm(ensemble)
    else:
        vecs, _ = _orthonormal_measurement_vectors(ensemble, scalars)
        elements = [Ket(v).projector() for v in vecs]
        total = sum(e.mat for e in elements)
        complement = DenseOperator(np.eye(ensemble.dim) - total,
                                   hermitian=True, positive=True)
        povm = Povm(elements=tuple(elements) + (complement,))
    outcome_map = tuple(range(n)) + (None,)
    success, fail, err = _born_pure(povm, ensemble, outcome_map)
    closed = equal_overlap_success(n, scalars)
    notes = "general equal-overlap scalars" if generic_path else ""
    return _report(f"pgm_symmetric_{probe_kind}", closed, success, fail, err,
                   params, notes=notes), povm


def unambiguous_symmetric(n: int, theta: float) -> tuple[DiscriminationReport, Povm]:
    """Zero-error which-detector test on the half-excited symmetric probe.

    Valid when the mean-direction weight exceeds 1/N and the transverse
    weight stays below it; the boundary where both hit 1/N is the orthogonal
    ensemble, answered perfectly with zero failure.
    """
    channel = PhaseChannel(theta)
    if n < 2 or n % 2 != 0:
        raise ValueError("the zero-error construction assumes an even detector count")
    if theta == 0.0:
        raise ValueError("phase 0 leaves identical hypotheses; no conclusive outcome exists")
    scalars = pgm_symmetric_scalars(n, theta, "entangled")
    if scalars.r0 < 1.0 / n - DEGENERACY_TOL:
        raise ValueError(f"mean-direction weight r0 = {scalars.r0!r} is not above 1/N = {1.0 / n!r}")
    if scalars.r1 > 1.0 / n + DEGENERACY_TOL:
        raise ValueError(f"transverse weight r1 = {scalars.r1!r} is not below 1/N = {1.0 / n!r}")
    probe = build_probe(ProbeSpec.symmetric(n, n // 2))
    ensemble = hypothesis_states(probe, channel)
    vecs, h = _orthonormal_measurement_vectors(ensemble, scalars)
    shift = (scalars.t - 1.0) / math.sqrt(n * scalars.r0)
    elements = []
    for v in vecs:
        bar = v + shift * h
        elements.append(DenseOperator.rank_one(bar))
    total = sum(e.mat for e in elements)
    pif = DenseOperator(np.eye(ensemble.dim) - total, hermitian=True, positive=True)
    povm = Povm(elements=tuple(elements) + (pif,), failure_index=n)
    outcome_map = tuple(range(n)) + (None,)
    success, fail, err = _born_pure(povm, ensemble, outcome_map)
    closed_failure = (n * scalars.r0 - 1.0) / (n - 1.0)
    closed = 1.0 - closed_failure
    params = ReportParams(n=n, k=n // 2, theta=theta, p=None)
    return _report("unambiguous_symmetric", closed, success, fail, err, params), povm


def _pgm_povm(ensemble: HypothesisEnsemble, support_tol: float = 1e-12) -> Povm:
    """Pretty-good measurement of an ensemble, with a trailing complement
    element covering the orthogonal space."""
    dim = ensemble.dim
    rho = np.zeros((dim, dim), dtype=complex)
    for state, prior in zip(ensemble.states, ensemble.priors):
        rho += prior * np.outer(state.amplitudes, state.amplitudes.conj())
    rho_op = DenseOperator(rho, hermitian=True, positive=True)
    root = inv_sqrt_on_support(rho_op, tol=support_tol)
    elements = []
    projected = np.zeros((dim, dim), dtype=complex)
    for state, prior in zip(ensemble.states, ensemble.priors):
        w = root.mat @ state.amplitudes
        element = DenseOperator.rank_one(w, prior)
        projected += element.mat
        elements.append(element)
    complement = DenseOperator(np.eye(dim) - projected, hermitian=True, positive=True)
    return Povm(elements=tuple(elements) + (complement,))


def pgm_success_from_gram(gram_matrix: np.ndarray | DenseOperator, priors,
                          support_tol: float = 1e-12) -> float:
    """Pretty-good-measurement success from the hypothesis Gram matrix alone.

    The conclusive amplitudes are the diagonal of the positive square root
    of the prior-weighted Gram matrix; eigenvalues below
    ``support_tol * max`` count as outside the support.
    """
    g = gram_matrix.mat if isinstance(gram_matrix, DenseOperator) else np.asarray(gram_matrix)
    weights = np.sqrt(np.asarray(priors, dtype=float))
    if g.shape[0] != weights.shape[0]:
        raise ValueError("one prior per hypothesis required")
    weighted = g * np.outer(weights, weights)
    vals, vecs = np.linalg.eigh(weighted)
    cutoff = support_tol * max(float(vals[-1]), 0.0)
    vals = np.where(vals > cutoff, vals, 0.0)
    root = (vecs * np.sqrt(vals)) @ vecs.conj().T
    return float(np.sum(np.abs(np.diag(root)) ** 2))


def null_added_success_closed(n: int, theta: float, p: float) -> float:
    """Closed-form success of the null-added pretty-good measurement."""
    if p >= 1.0:
        return 1.0
    scalars = pgm_symmetric_scalars(n, theta, "entangled").with_null_prior(p, n)
    return (p * p * scalars.D0 ** 2
            + (1.0 - p) ** 2 / n
            * (scalars.r0 * scalars.D0 + (1.0 - scalars.r0) * scalars.D1) ** 2)


def pgm_with_null(n: int, theta: float, p: float) -> tuple[DiscriminationReport, Povm | None]:
    """Pretty-good measurement including the no-interaction alternative.

    The untouched probe carries prior p, each detector (1-p)/N.  The probe
    coincides with the normalized ensemble mean, so the average state splits
    into a weight on that direction and a flat weight on the transverse
    space, giving the closed form through the D0/D1 scalars.
    """
    channel = PhaseChannel(theta)
    if n < 2 or n % 2 != 0:
        raise ValueError("the closed form assumes an even detector count")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"null prior {p!r} outside [0, 1]")
    params = ReportParams(n=n, k=n // 2, theta=theta, p=p)
    if theta == 0.0:
        return _degenerate_report("pgm_with_null", max(p, (1.0 - p) / n), params)
    probe = build_probe(ProbeSpec.symmetric(n, n // 2))
    ensemble = hypothesis_states(probe, channel, include_null=True, null_prior=p)
    povm = _pgm_povm(ensemble)
    outcome_map = tuple(range(n + 1)) + (None,)
    success, fail, err = _born_pure(povm, ensemble, outcome_map)
    closed = null_added_success_closed(n, theta, p)
    notes = "single effective hypothesis" if p == 1.0 else ""
    return _report("pgm_with_null", closed, success, fail, err, params, notes=notes), povm


def pgm_numeric(ensemble: HypothesisEnsemble) -> tuple[DiscriminationReport, Povm]:
    """Pretty-good measurement of an arbitrary pure-state ensemble.

    The report pairs two independent computations: the Gram-space
    square-root value (closed-form slot) and the full-space Born evaluation
    of the explicit POVM (numeric slot).
    """
    povm = _pgm_povm(ensemble)
    outcome_map = tuple(range(len(ensemble))) + (None,)
    success, fail, err = _born_pure(povm, ensemble, outcome_map)
    g = np.array([[a.inner(b) for b in ensemble.states] for a in ensemble.states])
    gram_value = pgm_success_from_gram(g, ensemble.priors)
    params = ReportParams(n=len(ensemble), k=None, theta=math.nan, p=None)
    return _report("pgm_numeric", gram_value, success, fail, err, params,
                   notes="closed-form slot holds the Gram-space value"), povm


# ---------------------------------------------------------------------------
# limits and baselines

ASYMPTOTIC_VARIANTS = ("entangled_expansion", "separable_expansion",
                       "entangled_limit", "unambiguous_failure_limit",
                       "null_added_limit")


def asymptotic_success(n: int, theta: float, variant: str,
                       p: float | None = None) -> float:
    """Large-N expansions and limits used for convergence testing."""
    if n < 2:
        raise ValueError("need at least 2 detectors")
    x = 1.0 - math.cos(2.0 * theta)
    s = abs(math.sin(2.0 * theta))
    if variant == "entangled_expansion":
        return 0.5 * x + s / math.sqrt(n) + 1.0 / n - x / n
    if variant == "separable_expansion":
        return 0.5 * x + s / math.sqrt(n) + 1.0 / n - 1.5 * x / n
    if variant == "entangled_limit":
        return 0.5 * x
    if variant == "unambiguous_failure_limit":
        return 1.0 - 0.5 * x
    if variant == "null_added_limit":
        if p is None:
            raise ValueError("the null-added limit needs the null prior p")
        return 0.5 * (1.0 - p) * x + p * p / (p + 0.5 * (1.0 - p) * (2.0 - x))
    raise ValueError(f"unknown variant {variant!r}; expected one of {ASYMPTOTIC_VARIANTS}")


def guessing_baseline(n: int, p: float | None = None) -> float:
    """Success of naming the most probable hypothesis without measuring."""
    if n < 1:
        raise ValueError("need at least one hypothesis")
    if p is None:
        return 1.0 / n
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"prior {p!r} outside [0, 1]")
    return max(p, (1.0 - p) / n)
