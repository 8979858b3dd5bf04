"""Moment sequences of a partially transposed state and the spectral range.

Orders run contiguously from 1. Even orders are the absolute power sums
``mu_n``; odd orders are the signed sums ``nu_n``. ``nu_1`` is the trace and is
pinned to 1 by :func:`perturb`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import InputError

DEFAULT_A = -0.5
DEFAULT_B = 1.0


@dataclass(frozen=True)
class SpectralRange:
    """Interval ``[a, b]`` assumed to contain every eigenvalue of ``rho^T``.

    The default ``[-1/2, 1]`` holds for every bipartite state. Tighter
    intervals are accepted; ``strict=False`` lifts the ``a >= -1/2, b <= 1``
    limits for experimentation with other supports.
    """

    a: float = DEFAULT_A
    b: float = DEFAULT_B
    strict: bool = True

    def __post_init__(self):
        if not self.a < self.b:
            raise InputError(f"spectral range needs a < b, got [{self.a}, {self.b}]")
        if self.strict and (self.a < -0.5 or self.b > 1.0):
            raise InputError(f"spectral range [{self.a}, {self.b}] exceeds [-1/2, 1]")

    @property
    def radius(self) -> float:
        return max(abs(self.a), abs(self.b))


@dataclass(frozen=True)
class MomentSequence:
    """Values ``c_1..c_n`` of ``Tr((rho^T)^k)``.

    Parameters
    ----------
    values : sequence of float
        ``values[k-1]`` is the order-``k`` moment.
    stderr : sequence of float, optional
        Standard errors aligned with ``values``.
    mu0 : float, optional
        Back-stepped zeroth moment; set only by the backstep.
    """

    values: tuple[float, ...]
    stderr: Optional[tuple[float, ...]] = None
    mu0: Optional[float] = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise InputError("a moment sequence needs orders 1 and 2 at least")
        if not all(np.isfinite(vals)):
            raise InputError("moment values must be finite")
        object.__setattr__(self, "values", vals)
        if self.stderr is not None:
            err = tuple(float(e) for e in self.stderr)
            if len(err) != len(vals):
                raise InputError("stderr must align with values")
            if any(e < 0 or not np.isfinite(e) for e in err):
                raise InputError("stderr entries must be finite and nonnegative")
            object.__setattr__(self, "stderr", err)

    @classmethod
    def from_orders(cls, entries):
        """Build from ``(order, value[, stderr])`` records; orders must be 1..n."""
        entries = sorted(entries, key=lambda e: e[0])
        orders = [int(e[0]) for e in entries]
        if orders != list(range(1, len(orders) + 1)):
            raise InputError(f"moment orders must be contiguous from 1, got {orders}")
        values = [e[1] for e in entries]
        errs = [e[2] if len(e) > 2 else None for e in entries]
        if all(e is None for e in errs):
            stderr = None
        else:
            stderr = tuple(0.0 if e is None else e for e in errs)
        return cls(tuple(values), stderr)

    @property
    def n_max(self) -> int:
        return len(self.values)

    def __getitem__(self, order: int) -> float:
        if order == 0:
            if self.mu0 is None:
                raise KeyError("mu0 has not been back-stepped")
            return self.mu0
        if not 1 <= order <= self.n_max:
            raise KeyError(order)
        return self.values[order - 1]

    @staticmethod
    def parity(order: int) -> str:
        """``"mu"`` for even orders, ``"nu"`` for odd ones."""
        return "mu" if order % 2 == 0 else "nu"

    def with_mu0(self, mu0: float) -> "MomentSequence":
        return replace(self, mu0=float(mu0))

    def extended(self) -> np.ndarray:
        """``[mu0, c_1, ..., c_n]``; requires a back-stepped ``mu0``."""
        if self.mu0 is None:
            raise InputError("sequence has no back-stepped mu0")
        return np.array((self.mu0,) + self.values)

    def array(self) -> np.ndarray:
        return np.array(self.values)


@dataclass(frozen=True)
class Finding:
    severity: str
    order: int
    message: str


def validate(seq: MomentSequence, rng: SpectralRange = SpectralRange(), tol: float = 1e-6):
    """Soft consistency checks; returns a list of :class:`Finding`.

    Flags a trace different from 1, negative even moments, and moments larger
    than any spectrum inside ``rng`` could produce (``|c_k| <= R^(k-2) mu_2``
    with ``R`` the range radius).
    """
    findings = []
    c = seq.values
    if abs(c[0] - 1.0) > tol:
        findings.append(Finding("error", 1, f"trace constraint violated: nu_1 = {c[0]!r}"))
    for k in range(2, seq.n_max + 1, 2):
        if seq[k] < -tol:
            findings.append(Finding("error", k, f"even moment negative at order {k}"))
    mu2 = max(seq[2], 0.0)
    radius = rng.radius
    for k in range(3, seq.n_max + 1):
        limit = radius ** (k - 2) * mu2
        if abs(seq[k]) > limit * (1 + tol) + tol:
            findings.append(
                Finding("warning", k, f"|c_{k}| = {abs(seq[k])!r} exceeds range limit {limit!r}")
            )
    return findings


def perturb(seq: MomentSequence, sigma: float, seed: int) -> MomentSequence:
    """Add relative Gaussian noise ``N(0, (sigma |c_k|)^2)`` to every order >= 2.

    Each order draws from its own generator keyed by ``(seed, order)``, so noise
    on a shared order does not depend on how long the sequence is.
    """
    if sigma < 0:
        raise InputError("sigma must be nonnegative")
    values = [1.0]
    errs = [0.0]
    for k in range(2, seq.n_max + 1):
        c = seq[k]
        noise = np.random.default_rng([seed, k]).standard_normal()
        values.append(c + sigma * abs(c) * noise)
        errs.append(sigma * abs(c))
    return MomentSequence(tuple(values), tuple(errs))


def truncate(seq: MomentSequence, new_max: int) -> MomentSequence:
    if not 2 <= new_max <= seq.n_max:
        raise InputError(f"new_max must lie in [2, {seq.n_max}], got {new_max}")
    stderr = None if seq.stderr is None else seq.stderr[:new_max]
    return MomentSequence(seq.values[:new_max], stderr)


def as_sequence(values: Sequence[float] | MomentSequence) -> MomentSequence:
    if isinstance(values, MomentSequence):
        return values
    return MomentSequence(tuple(values))
