"""Exact linear-algebra ground truth for bipartite states.

Density matrices are stored with the composite index ``i_A * dim_b + i_B``.
Everything here works by dense diagonalization and is deliberately independent
of the moment machinery in the rest of the package, so it can serve as the
oracle those routines are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EigensolverError, InputError
from .moments import MomentSequence

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
RANK_TOL = 1e-10

KINDS = ("haar_pure", "induced_mixed", "separable_mixture", "werner")


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on ``dim_a x dim_b``.

    Construction checks the invariants and raises :class:`InputError` when one
    fails. The stored array is read-only.
    """

    dim_a: int
    dim_b: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise InputError(f"dimensions must be positive, got {self.dim_a}x{self.dim_b}")
        x = np.array(self.entries, dtype=complex)
        d = self.dim_a * self.dim_b
        if x.shape != (d, d):
            raise InputError(
                f"matrix shape {x.shape} does not match bipartition {self.dim_a}x{self.dim_b}"
            )
        scale = max(np.abs(x).max(), 1.0e-300)
        if np.abs(x - x.conj().T).max() > HERMITIAN_TOL * scale:
            raise InputError("matrix is not Hermitian")
        if abs(np.trace(x) - 1.0) > TRACE_TOL:
            raise InputError(f"trace is {np.trace(x).real!r}, expected 1")
        if _eigvalsh(x).min() < -PSD_TOL:
            raise InputError("matrix is not positive semidefinite")
        x.setflags(write=False)
        object.__setattr__(self, "entries", x)

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: tuple[float, ...]
    one_norm: float
    negativity: float
    log_negativity: float
    nonzero_count: int

    def to_dict(self) -> dict:
        return {
            "eigenvalues": list(self.eigenvalues),
            "one_norm": self.one_norm,
            "negativity": self.negativity,
            "log_negativity": self.log_negativity,
            "nonzero_count": self.nonzero_count,
        }


def _eigvalsh(x):
    try:
        return np.linalg.eigvalsh(x)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc


def _as_matrix(rho):
    if isinstance(rho, DensityMatrix):
        return rho.entries, rho.dim_a, rho.dim_b
    raise InputError("expected a DensityMatrix")


def partial_transpose_matrix(x, dim_a, dim_b, subsystem="B"):
    """Partial transpose of a raw ``(dim_a*dim_b)``-square matrix.

    Works for any square matrix, not only states, which is what makes the
    involution property checkable on arbitrary inputs.
    """
    x = np.asarray(x)
    d = dim_a * dim_b
    if x.shape != (d, d):
        raise InputError(f"matrix shape {x.shape} does not match bipartition {dim_a}x{dim_b}")
    t = x.reshape(dim_a, dim_b, dim_a, dim_b)
    if subsystem == "B":
        t = t.transpose(0, 3, 2, 1)
    elif subsystem == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise InputError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return t.reshape(d, d)


def partial_transpose(rho: DensityMatrix, subsystem: str = "B") -> np.ndarray:
    """Return ``rho^{T_B}`` (or ``rho^{T_A}``) as a Hermitian array.

    ``X[(i,j),(k,l)] = rho[(i,l),(k,j)]`` for subsystem B.
    """
    x, da, db = _as_matrix(rho)
    return partial_transpose_matrix(x, da, db, subsystem)


def pt_moments(rho: DensityMatrix, n_max: int, subsystem: str = "B") -> MomentSequence:
    """Moments ``Tr((rho^T)^k)`` for ``k = 1..n_max`` by repeated matrix products."""
    if n_max < 2:
        raise InputError("n_max must be at least 2")
    x = partial_transpose(rho, subsystem)
    values = []
    power = np.eye(x.shape[0], dtype=complex)
    for _ in range(n_max):
        power = power @ x
        values.append(float(np.trace(power).real))
    return MomentSequence(tuple(values))


def spectrum_moments(eigenvalues, n_max: int) -> MomentSequence:
    """Power sums of a given real spectrum, as a moment sequence."""
    ev = np.asarray(eigenvalues, dtype=float)
    return MomentSequence(tuple(float(np.sum(ev**k)) for k in range(1, n_max + 1)))


def exact_spectrum_report(rho: DensityMatrix, subsystem: str = "B") -> SpectrumReport:
    x = partial_transpose(rho, subsystem)
    ev = np.sort(_eigvalsh(x))
    one_norm = float(np.abs(ev).sum())
    negativity = float(-ev[ev < 0].sum())
    scale = max(1.0, float(np.abs(ev).max()))
    return SpectrumReport(
        eigenvalues=tuple(float(v) for v in ev),
        one_norm=one_norm,
        negativity=negativity,
        log_negativity=math.log(one_norm),
        nonzero_count=int(np.sum(np.abs(ev) > RANK_TOL * scale)),
    )


def bell_state() -> DensityMatrix:
    """``|Phi+><Phi+|`` on two qubits."""
    psi = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0)
    return DensityMatrix(2, 2, np.outer(psi, psi))


def werner_state(p: float) -> DensityMatrix:
    """``p |Phi+><Phi+| + (1-p) I/4``; entangled for ``p > 1/3``."""
    if not 0.0 <= p <= 1.0:
        raise InputError(f"werner parameter must lie in [0, 1], got {p}")
    return DensityMatrix(2, 2, p * bell_state().entries + (1.0 - p) * np.eye(4) / 4.0)


def maximally_mixed(dim_a: int, dim_b: int) -> DensityMatrix:
    d = dim_a * dim_b
    return DensityMatrix(dim_a, dim_b, np.eye(d) / d)


def _ginibre(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def _haar_vector(rng, d):
    v = _ginibre(rng, d, 1)[:, 0]
    return v / np.linalg.norm(v)


def _finish(x):
    x = 0.5 * (x + x.conj().T)
    return x / np.trace(x).real


def gen_random_state(
    kind: str,
    dim_a: int,
    dim_b: int,
    seed: int,
    p: float | None = None,
    env_dim: int | None = None,
    n_terms: int | None = None,
) -> DensityMatrix:
    """Draw a random bipartite state, deterministically from ``seed``.

    Parameters
    ----------
    kind : {"haar_pure", "induced_mixed", "separable_mixture", "werner"}
        ``induced_mixed`` traces out an environment of size ``env_dim``
        (default ``dim_a * dim_b``) from a Haar-random pure state.
        ``separable_mixture`` is a Dirichlet-weighted mixture of ``n_terms``
        random pure product states (default: drawn from ``2..dim_a*dim_b+1``).
        ``werner`` needs ``p`` and two qubits; the seed is ignored.
    """
    if kind not in KINDS:
        raise InputError(f"unknown state kind {kind!r}; expected one of {KINDS}")
    if dim_a < 2 or dim_b < 2:
        raise InputError("both subsystem dimensions must be at least 2")
    if kind == "werner":
        if (dim_a, dim_b) != (2, 2):
            raise InputError("werner states are defined on two qubits only")
        if p is None:
            raise InputError("werner states need the mixing parameter p")
        return werner_state(p)

    rng = np.random.default_rng(seed)
    d = dim_a * dim_b
    if kind == "haar_pure":
        v = _haar_vector(rng, d)
        x = np.outer(v, v.conj())
    elif kind == "induced_mixed":
        k = env_dim or d
        if k < 1:
            raise InputError("env_dim must be positive")
        g = _ginibre(rng, d, k)
        # partial trace of a Haar pure state on d*k: normalised G G^dagger
        x = g @ g.conj().T
    else:
        terms = n_terms or int(rng.integers(2, d + 2))
        if terms < 1:
            raise InputError("n_terms must be positive")
        weights = rng.dirichlet(np.ones(terms))
        x = np.zeros((d, d), dtype=complex)
        for w in weights:
            va = _haar_vector(rng, dim_a)
            vb = _haar_vector(rng, dim_b)
            v = np.kron(va, vb)
            x += w * np.outer(v, v.conj())
    return DensityMatrix(dim_a, dim_b, _finish(x))
