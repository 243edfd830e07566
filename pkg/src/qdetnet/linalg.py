"""Dense complex linear algebra for multi-qubit detector states.

Conventions used throughout the package:

* the single-qubit computational basis is the interaction eigenbasis, so
  basis bit 0 is the ``+`` eigenvector and bit 1 the ``-`` eigenvector;
* detector site 1 is the most significant tensor factor, i.e. the bit of
  site ``s`` in basis index ``i`` is ``(i >> (n_sites - s)) & 1``.

All operations are pure functions; values are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Structural flags (norms, hermiticity, unitarity) are verified at 1e-12;
# spectral comparisons at 1e-10; positive operators may dip to -1e-10.
STRUCT_TOL = 1e-12
SPECTRAL_TOL = 1e-10
PSD_SLACK = -1e-10

MAX_DIM = 2 ** 14


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Ket:
    """A normalized complex state vector."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if arr.size == 0:
            raise ValueError("ket must have at least one amplitude")
        if arr.size > MAX_DIM:
            raise ValueError(f"dimension {arr.size} exceeds supported maximum {MAX_DIM}")
        nrm = float(np.linalg.norm(arr))
        if abs(nrm - 1.0) > STRUCT_TOL:
            raise ValueError(f"ket norm is {nrm!r}, not 1 within {STRUCT_TOL}")
        object.__setattr__(self, "amplitudes", _freeze(arr))

    @classmethod
    def normalized(cls, values) -> "Ket":
        """Build a ket from an arbitrary nonzero coefficient vector."""
        arr = np.asarray(values, dtype=complex).reshape(-1)
        nrm = float(np.linalg.norm(arr))
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(arr / nrm)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.shape[0])

    def inner(self, other: "Ket") -> complex:
        """Inner product <self|other>."""
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> "DenseOperator":
        """Rank-1 projector |self><self|."""
        return DenseOperator.rank_one(self.amplitudes)


def _min_eigenvalue_certified(m: np.ndarray) -> float:
    """Lower bound on the smallest eigenvalue of a hermitian matrix.

    Three certificates, cheapest first: (1) matrices entrywise close to the
    outer product built from their dominant column are eigenvalue-perturbed
    rank-1 PSD matrices, off by at most dim * defect; (2) a shifted Cholesky
    factorization certifies min eig > PSD_SLACK; (3) exact eigenvalues.
    """
    dim = m.shape[0]
    scale = float(np.abs(m).max())
    if scale == 0.0:
        return 0.0
    diag = np.real(np.diag(m))
    j = int(np.argmax(diag))
    if diag[j] > 0.0:
        defect = float(np.abs(m - np.outer(m[:, j], m[j, :]) / m[j, j]).max())
        bound = -dim * defect
        if bound >= PSD_SLACK:
            return bound
    try:
        np.linalg.cholesky(m + (-PSD_SLACK) * np.eye(dim))
        return 0.0
    except np.linalg.LinAlgError:
        return float(np.linalg.eigvalsh(m)[0])


@dataclass(frozen=True)
class DenseOperator:
    """Square complex matrix with verified structural flags.

    Flags are assertions: setting ``hermitian``, ``unitary`` or ``positive``
    makes the constructor check the corresponding property and raise on
    violation.
    """

    mat: np.ndarray
    hermitian: bool = False
    unitary: bool = False
    positive: bool = False

    def __post_init__(self) -> None:
        m = np.array(self.mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        if m.shape[0] > MAX_DIM:
            raise ValueError(f"dimension {m.shape[0]} exceeds supported maximum {MAX_DIM}")
        object.__setattr__(self, "mat", _freeze(m))
        if self.hermitian or self.positive:
            defect = float(np.abs(m - m.conj().T).max())
            if defect > STRUCT_TOL:
                raise ValueError(f"hermitian flag violated, defect {defect:.3e}")
        if self.unitary:
            defect = float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())
            if defect > STRUCT_TOL:
                raise ValueError(f"unitary flag violated, defect {defect:.3e}")
        if self.positive:
            lo = _min_eigenvalue_certified(m)
            if lo < PSD_SLACK:
                raise ValueError(f"positive flag violated, minimum eigenvalue {lo:.3e}")

    @classmethod
    def identity(cls, dim: int) -> "DenseOperator":
        return cls(np.eye(dim, dtype=complex), hermitian=True, unitary=True, positive=True)

    @classmethod
    def rank_one(cls, vector: np.ndarray, scale: float = 1.0) -> "DenseOperator":
        """scale * |v><v| with flags certified by construction.

        The outer product of a vector with its own conjugate is exactly
        hermitian in IEEE arithmetic, and entrywise rounding perturbs its
        eigenvalues by at most a few ulps of scale * |v|^2, far inside the
        positivity slack, so the per-entry verification passes are skipped.
        """
        if scale < 0.0:
            raise ValueError(f"rank-one scale must be nonnegative, got {scale!r}")
        v = np.asarray(vector, dtype=complex).reshape(-1)
        m = scale * np.outer(v, v.conj())
        self = cls.__new__(cls)
        object.__setattr__(self, "mat", _freeze(m))
        object.__setattr__(self, "hermitian", True)
        object.__setattr__(self, "unitary", False)
        object.__setattr__(self, "positive", True)
        return self

    @property
    def dim(self) -> int:
        return int(self.mat.shape[0])

    def dagger(self) -> "DenseOperator":
        return DenseOperator(self.mat.conj().T,
                             hermitian=self.hermitian,
                             unitary=self.unitary,
                             positive=self.positive)

    def apply(self, state: Ket) -> np.ndarray:
        """Raw matrix-vector product; the result is not necessarily normalized."""
        if self.dim != state.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {state.dim}")
        return self.mat @ state.amplitudes

    def expectation(self, state: Ket) -> float:
        """<state|A|state>, real part (exact for hermitian A)."""
        return float(np.real(np.vdot(state.amplitudes, self.apply(state))))


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition of a hermitian operator.

    Eigenvalues are real and sorted descending; eigenvectors form an
    orthonormal set aligned with the eigenvalues.
    """

    eigenvalues: np.ndarray
    eigenvectors: tuple[Ket, ...] = field(repr=False)

    def __post_init__(self) -> None:
        vals = np.array(self.eigenvalues, dtype=float).reshape(-1)
        if vals.size != len(self.eigenvectors):
            raise ValueError("eigenvalue / eigenvector count mismatch")
        object.__setattr__(self, "eigenvalues", _freeze(vals))

    def reconstruct(self) -> np.ndarray:
        """Sum of eigenvalue-weighted rank-1 projectors."""
        dim = self.eigenvectors[0].dim
        out = np.zeros((dim, dim), dtype=complex)
        for lam, vec in zip(self.eigenvalues, self.eigenvectors):
            out += lam * np.outer(vec.amplitudes, vec.amplitudes.conj())
        return out


def kron(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    """Kronecker product; dimensions multiply, a's indices are most significant."""
    hermitian = a.hermitian and b.hermitian
    unitary = a.unitary and b.unitary
    return DenseOperator(np.kron(a.mat, b.mat), hermitian=hermitian, unitary=unitary)


def apply_site_unitary(state: Ket, u: DenseOperator, site: int, n_sites: int) -> Ket:
    """Apply a single-qubit unitary to one detector site of an n-qubit state.

    Equivalent to multiplying by I x ... x u x ... x I with u at position
    ``site`` (1-based, site 1 most significant), computed without building
    the full matrix.
    """
    if state.dim != 2 ** n_sites:
        raise ValueError(f"state dim {state.dim} is not 2**{n_sites}")
    if u.mat.shape != (2, 2):
        raise ValueError(f"site operator must be 2x2, got {u.mat.shape}")
    if not u.unitary:
        raise ValueError("site operator must be flagged unitary")
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} out of range 1..{n_sites}")
    psi = state.amplitudes.reshape((2,) * n_sites)
    out = np.tensordot(u.mat, psi, axes=([1], [site - 1]))
    out = np.moveaxis(out, 0, site - 1)
    return Ket(out.reshape(-1))


def hermitian_eig(a: DenseOperator) -> EigenDecomposition:
    """Eigendecomposition of a hermitian-flagged operator, eigenvalues descending."""
    if not a.hermitian:
        raise ValueError("hermitian_eig requires a hermitian-flagged operator")
    vals, vecs = np.linalg.eigh(a.mat)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    kets = tuple(Ket(vecs[:, j]) for j in order)
    return EigenDecomposition(eigenvalues=vals, eigenvectors=kets)


def trace_norm(a: DenseOperator) -> float:
    """Sum of absolute eigenvalues of a hermitian operator."""
    if not a.hermitian:
        raise ValueError("trace_norm requires a hermitian-flagged operator")
    decomp = hermitian_eig(a)
    return float(np.abs(decomp.eigenvalues).sum())


def inv_sqrt_on_support(rho: DenseOperator, tol: float = 1e-12) -> DenseOperator:
    """Pseudo-inverse square root of a positive operator.

    Eigenvalues >= tol are mapped to 1/sqrt(lam); eigenvalues in
    [-tol, tol) are treated as zero (outside the support); anything below
    -tol is rejected.
    """
    if not rho.positive:
        raise ValueError("inv_sqrt_on_support requires a positive-flagged operator")
    vals, vecs = np.linalg.eigh(rho.mat)
    if vals[0] < -tol:
        raise ValueError(f"eigenvalue {vals[0]:.3e} below -tol; operator is not positive")
    inv = np.where(vals >= tol, 1.0 / np.sqrt(np.where(vals >= tol, vals, 1.0)), 0.0)
    m = (vecs * inv) @ vecs.conj().T
    m = 0.5 * (m + m.conj().T)
    return DenseOperator(m, hermitian=True, positive=True)


def gram(states: list[Ket] | tuple[Ket, ...]) -> DenseOperator:
    """Gram matrix G[j, k] = <state_j|state_k> of a family of kets."""
    if not states:
        raise ValueError("gram of an empty family")
    dim = states[0].dim
    if any(s.dim != dim for s in states):
        raise ValueError("all states must share one dimension")
    m = len(states)
    g = np.empty((m, m), dtype=complex)
    for j in range(m):
        g[j, j] = 1.0
        for k in range(j + 1, m):
            val = states[j].inner(states[k])
            g[j, k] = val
            g[k, j] = val.conjugate()
    return DenseOperator(g, hermitian=True, positive=True)
