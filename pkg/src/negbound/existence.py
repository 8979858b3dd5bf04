"""Hankel existence conditions for the truncated Hausdorff moment problem.

For an even number of moments ``c_0..c_{2m+1}`` a measure on ``[a, b]`` exists
iff the localizing matrices of ``(lambda - a)`` and ``(b - lambda)`` are
positive semidefinite. For an odd number ``c_0..c_{2m}`` the forms are the
plain Hankel matrix and the localizing matrix of ``(lambda - a)(b - lambda)``.
We test leading principal minors, each against ``tol`` times its Hadamard bound
(product of row norms), which keeps the test scale-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InputError
from .moments import MomentSequence, SpectralRange


class Verdict(str, Enum):
    STRICT = "StrictlyPositive"
    SINGULAR = "SingularlyPositive"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class HankelForm:
    """Localizing matrix ``[sum_t w_t c_{i+j+t}]`` of a given size.

    ``weights[0]`` is also the coefficient of ``c_0`` in entry ``(0, 0)``, the
    only entry that sees ``c_0``.
    """

    name: str
    weights: tuple[float, ...]
    size: int

    def matrix(self, c: Sequence[float]) -> np.ndarray:
        return localizing_matrix(c, self.weights, self.size)


def localizing_matrix(c, weights, size):
    c = np.asarray(c, dtype=float)
    need = 2 * (size - 1) + len(weights)
    if len(c) < need:
        raise InputError(f"need {need} moments for a {size}x{size} form, have {len(c)}")
    h = np.zeros((size, size))
    for t, w in enumerate(weights):
        if w == 0.0:
            continue
        for i in range(size):
            h[i, :] += w * c[i + t : i + t + size]
    return h


def hadamard_scale(h: np.ndarray) -> float:
    """Product of row norms, an upper bound on ``|det h|``."""
    return float(np.prod(np.linalg.norm(h, axis=1)))


def hankel_forms(count: int, rng: SpectralRange) -> tuple[HankelForm, HankelForm]:
    """The two existence forms for ``count`` moments ``c_0..c_{count-1}``."""
    a, b = rng.a, rng.b
    if count < 2:
        raise InputError("need at least two moments")
    if count % 2 == 0:
        m = (count - 2) // 2
        return (
            HankelForm("H1", (-a, 1.0), m + 1),
            HankelForm("H2", (b, -1.0), m + 1),
        )
    m = (count - 1) // 2
    return (
        HankelForm("H1", (1.0,), m + 1),
        HankelForm("H2", (-a * b, a + b, -1.0), m),
    )


def hankel_pair(c, rng: SpectralRange = SpectralRange(), parity: str | None = None):
    """Return ``(H1, H2)`` for moments ``c_0..c_n``.

    ``parity`` ("even_count" or "odd_count") is optional; when given it must
    agree with ``len(c)``.
    """
    count = len(c)
    actual = "even_count" if count % 2 == 0 else "odd_count"
    if parity is not None and parity != actual:
        raise InputError(f"{count} moments is an {actual} system, not {parity}")
    f1, f2 = hankel_forms(count, rng)
    return f1.matrix(c), f2.matrix(c)


@dataclass(frozen=True)
class MinorCheck:
    form: str
    size: int
    det: float
    scale: float
    status: str  # "ok" | "tight" | "violated"

    @property
    def id(self) -> str:
        return f"{self.form}[{self.size}]"

    def to_dict(self):
        return {"form": self.form, "size": self.size, "det": self.det,
                "scale": self.scale, "status": self.status}


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    details: tuple[MinorCheck, ...]
    mode: str

    def failing(self):
        return [d for d in self.details if d.status == "violated"]

    def to_dict(self):
        return {"verdict": self.verdict.value, "mode": self.mode,
                "details": [d.to_dict() for d in self.details]}


def check_minor(name, h, k, tol) -> MinorCheck:
    sub = h[:k, :k]
    det = float(np.linalg.det(sub))
    scale = hadamard_scale(sub)
    if det < -tol * scale:
        status = "violated"
    elif abs(det) <= tol * scale:
        status = "tight"
    else:
        status = "ok"
    return MinorCheck(name, k, det, scale, status)


def classify_values(c, rng: SpectralRange, tol: float, mode: str) -> Classification:
    """Classify a raw moment vector ``c_0..c_n`` (shared by both modes)."""
    details = []
    for form in hankel_forms(len(c), rng):
        if form.size == 0:
            continue
        h = form.matrix(c)
        for k in range(1, form.size + 1):
            details.append(check_minor(form.name, h, k, tol))
    if any(d.status == "violated" for d in details):
        verdict = Verdict.INFEASIBLE
    elif any(d.status == "tight" for d in details):
        verdict = Verdict.SINGULAR
    else:
        verdict = Verdict.STRICT
    return Classification(verdict, tuple(details), mode)


def classify(seq: MomentSequence, rng: SpectralRange = SpectralRange(),
             tol: float = 1e-10, mode: str = "with_c0") -> Classification:
    """Classify a moment system as strictly/singularly positive or infeasible.

    ``with_c0`` uses ``(mu0, c_1, ..., c_n)`` and needs a back-stepped ``mu0``.
    ``shifted_precheck`` reuses ``c_1..c_n`` with ``nu_1 = 1`` in the zeroth
    slot. That is the moment sequence of ``lambda * sigma``, a genuine measure
    only for nonnegative spectra, so NPT states may fail it without any noise.
    """
    if mode == "with_c0":
        c = seq.extended()
    elif mode == "shifted_precheck":
        c = seq.array()
    else:
        raise InputError(f"unknown classification mode {mode!r}")
    return classify_values(c, rng, tol, mode)
