"""Probe states, the single-site phase channel, and hypothesis ensembles.

The detector model: N qubits are prepared in a joint probe state, at most
one of them is acted on by the phase unitary U = diag(e^{i theta},
e^{-i theta}), and the task is to identify the affected site (optionally
against the alternative that none was affected).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import Ket, DenseOperator, apply_site_unitary

THETA_MAX = math.pi / 4
_THETA_SLACK = 1e-12

DEFAULT_SEED = 20240601


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not abs(theta) <= THETA_MAX + _THETA_SLACK:
        raise ValueError(
            f"phase {theta!r} outside the supported range [-pi/4, pi/4]; "
            "see equivalent_phase() for the in-range reduction"
        )
    return theta


def equivalent_phase(theta: float) -> tuple[float, bool]:
    """Reduce an arbitrary phase to its canonical nonnegative equivalent.

    Every quantity in this package depends on the phase only through
    cos(2 theta) and |sin(2 theta)|, so theta is equivalent to -theta and to
    theta + k*pi.  Returns the folded value in [0, pi/2] and whether it lies
    in the supported range [0, pi/4].  The input is reported, never rewritten.
    """
    folded = math.remainder(float(theta), math.pi)  # (-pi/2, pi/2]
    folded = abs(folded)
    return folded, folded <= THETA_MAX + _THETA_SLACK


@dataclass(frozen=True)
class PhaseChannel:
    """Single-qubit interaction with eigenphases +theta and -theta."""

    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", _check_theta(self.theta))

    def unitary(self) -> DenseOperator:
        phases = np.exp([1j * self.theta, -1j * self.theta])
        return DenseOperator(np.diag(phases), unitary=True)

    def site_apply(self, state: Ket, site: int, n_sites: int) -> Ket:
        """Act with the channel unitary on one site of a multi-qubit state."""
        return apply_site_unitary(state, self.unitary(), site, n_sites)


@dataclass(frozen=True)
class ProbeSpec:
    """Recipe for an initial detector state.

    Kinds: ``symmetric`` (equal superposition of all basis strings with k
    plus factors), ``separable`` (uniform product state),
    ``two_detector_optimal`` (the optimal N=2 entangled probe) and
    ``custom`` (explicit coefficients).
    """

    kind: str
    n: int
    k: int | None = None
    coefficients: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("symmetric", "separable", "two_detector_optimal", "custom"):
            raise ValueError(f"unknown probe kind {self.kind!r}")
        if self.n < 2:
            raise ValueError(f"need at least 2 detectors, got {self.n}")
        if self.kind == "symmetric":
            if self.k is None or not 0 <= self.k <= self.n:
                raise ValueError(f"excitation count k={self.k!r} outside 0..{self.n}")
        if self.kind == "custom":
            arr = np.asarray(self.coefficients, dtype=complex).reshape(-1)
            if arr.shape[0] != 2 ** self.n:
                raise ValueError(f"custom probe needs 2**{self.n} coefficients")
            if np.linalg.norm(arr) == 0:
                raise ValueError("custom probe coefficients are all zero")
            object.__setattr__(self, "coefficients", arr)

    @classmethod
    def symmetric(cls, n: int, k: int | None = None) -> "ProbeSpec":
        if k is None:
            k = n // 2  # deterministic choice between the tied odd-N optima
        return cls(kind="symmetric", n=n, k=k)

    @classmethod
    def separable(cls, n: int) -> "ProbeSpec":
        return cls(kind="separable", n=n)

    @classmethod
    def two_detector_optimal(cls) -> "ProbeSpec":
        return cls(kind="two_detector_optimal", n=2)

    @classmethod
    def custom(cls, coefficients) -> "ProbeSpec":
        arr = np.asarray(coefficients, dtype=complex).reshape(-1)
        n = int(round(math.log2(arr.shape[0])))
        if 2 ** n != arr.shape[0]:
            raise ValueError("custom probe length must be a power of 2")
        return cls(kind="custom", n=n, coefficients=arr)


def build_probe(spec: ProbeSpec) -> Ket:
    """Materialize a probe state from its spec."""
    dim = 2 ** spec.n
    if spec.kind == "separable":
        return Ket(np.full(dim, dim ** -0.5, dtype=complex))
    if spec.kind == "two_detector_optimal":
        return build_probe(ProbeSpec.symmetric(2, 1))
    if spec.kind == "custom":
        return Ket.normalized(spec.coefficients)
    # symmetric: plus factors are 0-bits, so k plus factors = (n - k) set bits
    amps = np.zeros(dim, dtype=complex)
    target_ones = spec.n - spec.k
    for i in range(dim):
        if i.bit_count() == target_ones:
            amps[i] = 1.0
    return Ket.normalized(amps)


@dataclass(frozen=True)
class HypothesisEnsemble:
    """Candidate output states with prior probabilities.

    When ``includes_null`` is set, index 0 is the untouched probe and the
    remaining entries are the one-site interaction outputs in site order.
    """

    states: tuple[Ket, ...]
    priors: np.ndarray
    includes_null: bool = False

    def __post_init__(self) -> None:
        states = tuple(self.states)
        priors = np.array(self.priors, dtype=float).reshape(-1)
        if len(states) != priors.shape[0]:
            raise ValueError("one prior per state required")
        if len(states) == 0:
            raise ValueError("ensemble must contain at least one state")
        if np.any(priors < -1e-15):
            raise ValueError("priors must be nonnegative")
        if abs(priors.sum() - 1.0) > 1e-12:
            raise ValueError(f"priors sum to {priors.sum()!r}, not 1")
        dim = states[0].dim
        if any(s.dim != dim for s in states):
            raise ValueError("all states must share one dimension")
        priors.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "priors", priors)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self) -> int:
        return len(self.states)


def hypothesis_states(probe: Ket, channel: PhaseChannel,
                      include_null: bool = False,
                      null_prior: float = 0.0) -> HypothesisEnsemble:
    """Outputs of the one-site interaction applied at every site.

    Priors are uniform over the sites; with the null alternative included,
    the untouched probe gets prior ``null_prior`` and each site
    ``(1 - null_prior)/N``.
    """
    n_sites = int(round(math.log2(probe.dim)))
    if 2 ** n_sites != probe.dim:
        raise ValueError(f"probe dimension {probe.dim} is not a power of 2")
    u = channel.unitary()
    site_states = [apply_site_unitary(probe, u, site, n_sites)
                   for site in range(1, n_sites + 1)]
    if include_null:
        if not 0.0 <= null_prior <= 1.0:
            raise ValueError(f"null prior {null_prior!r} outside [0, 1]")
        states = [probe] + site_states
        priors = [null_prior] + [(1.0 - null_prior) / n_sites] * n_sites
    else:
        states = site_states
        priors = [1.0 / n_sites] * n_sites
    return HypothesisEnsemble(states=tuple(states), priors=np.array(priors),
                              includes_null=include_null)


def symmetric_overlap_closed(n: int, k: int, theta: float) -> float:
    """Pairwise overlap of two distinct interaction outputs of a symmetric probe.

    The value does not depend on which pair of sites is compared.
    """
    if n < 2:
        raise ValueError("need at least 2 detectors")
    if not 0 <= k <= n:
        raise ValueError(f"excitation count k={k} outside 0..{n}")
    return 1.0 - (2.0 * k) * (n - k) * (1.0 - math.cos(2.0 * theta)) / (n * (n - 1.0))


def separable_overlap_closed(theta: float) -> float:
    """Pairwise overlap of interaction outputs for the uniform product probe."""
    return 1.0 - 0.5 * (1.0 - math.cos(2.0 * theta))


@dataclass(frozen=True)
class TriangleCoefficients:
    """Two-detector probe amplitudes and the derived channel overlap.

    ``z`` is the expectation of (U at site 1) x (inverse U at site 2); its
    possible values fill the triangle with vertices e^{2i theta}, 1,
    e^{-2i theta}.
    """

    c_pp: complex
    c_pm: complex
    c_mp: complex
    c_mm: complex
    theta: float
    z: complex = field(init=False)

    def __post_init__(self) -> None:
        weights = self.weights()
        total = float(weights.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"coefficient magnitudes sum to {total!r}, not 1")
        phase = np.exp(2j * self.theta)
        z = weights[1] * phase + (weights[0] + weights[3]) + weights[2] / phase
        object.__setattr__(self, "z", complex(z))

    def weights(self) -> np.ndarray:
        """|c|^2 in the order (pp, pm, mp, mm)."""
        return np.array([abs(self.c_pp) ** 2, abs(self.c_pm) ** 2,
                         abs(self.c_mp) ** 2, abs(self.c_mm) ** 2])

    def as_ket(self) -> Ket:
        return Ket(np.array([self.c_pp, self.c_pm, self.c_mp, self.c_mm], dtype=complex))


def _project_simplex(w: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    idx = np.nonzero(u * np.arange(1, w.size + 1) > (css - 1.0))[0][-1]
    tau = (css[idx] - 1.0) / (idx + 1.0)
    return np.maximum(w - tau, 0.0)


def _minimize_weight_quadratic(h: np.ndarray, w0: np.ndarray,
                               max_iter: int = 2000) -> tuple[np.ndarray, float]:
    """Projected gradient descent for w' H w / 2-style quadratics on the simplex.

    Exact line search along the gradient with Armijo backtracking after
    projection; zero weights land exactly on the boundary.
    """
    w = _project_simplex(np.array(w0, dtype=float))

    def value(x: np.ndarray) -> float:
        return float(x @ h @ x)

    f = value(w)
    for _ in range(max_iter):
        g = 2.0 * (h @ w)
        curvature = float(g @ h @ g)
        eta = float(g @ g) / curvature if curvature > 1e-300 else 1.0
        improved = False
        for _ in range(60):
            cand = _project_simplex(w - eta * g)
            f_cand = value(cand)
            if f_cand <= f - 1e-18 or (f_cand < f and np.abs(cand - w).max() > 1e-16):
                w, f = cand, f_cand
                improved = True
                break
            eta *= 0.5
        if not improved:
            break
    return w, f


def minimize_two_detector_overlap(channel: PhaseChannel, restarts: int = 8,
                                  seed: int = DEFAULT_SEED) -> TriangleCoefficients:
    """Numerically minimize |z| over normalized two-detector probes.

    |z| depends on the probe only through the four basis weights, and is a
    convex quadratic of them, so each restart runs projected gradient
    descent on the weight simplex from a seeded complex Gaussian draw (whose
    phases are kept for the returned amplitudes).  The optimum is known in
    closed form (|cos 2 theta|), making this a verification device; ties
    across restarts resolve to the lowest restart index.
    """
    if channel.theta == 0.0:
        raise ValueError("phase 0 makes |z| identically 1; nothing to minimize")
    if restarts < 1:
        raise ValueError("need at least one restart")
    vertices = np.array([1.0, np.exp(2j * channel.theta),
                         np.exp(-2j * channel.theta), 1.0])
    # |z|^2 = w' (r r' + i i') w
    h = np.outer(vertices.real, vertices.real) + np.outer(vertices.imag, vertices.imag)
    rng = np.random.default_rng(seed)
    best: tuple[float, int, np.ndarray, np.ndarray] | None = None
    for idx in range(restarts):
        draw = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        w0 = np.abs(draw) ** 2
        w0 /= w0.sum()
        w, f = _minimize_weight_quadratic(h, w0)
        if best is None or f < best[0] - 1e-15:
            best = (f, idx, w, np.where(np.abs(draw) > 0, draw / np.abs(draw), 1.0))
    _, _, w, phases = best
    c = np.sqrt(w) * phases
    c /= np.linalg.norm(c)
    return TriangleCoefficients(c_pp=complex(c[0]), c_pm=complex(c[1]),
                                c_mp=complex(c[2]), c_mm=complex(c[3]),
                                theta=channel.theta)


def one_or_none_overlaps(coefficients: TriangleCoefficients,
                         theta: float) -> tuple[complex, complex]:
    """Overlaps of a two-detector probe with its two one-site outputs.

    Returns (<psi|U_1|psi>, <psi|U_2|psi>); each is a convex combination of
    e^{i theta} and e^{-i theta} weighted by how much of the probe sits in
    the corresponding site eigenspace.
    """
    w = coefficients.weights()
    up = np.exp(1j * theta)
    down = np.exp(-1j * theta)
    first = (w[0] + w[1]) * up + (w[2] + w[3]) * down
    second = (w[0] + w[2]) * up + (w[1] + w[3]) * down
    return complex(first), complex(second)
