"""Backwards extension: the smallest zeroth moment consistent with ``c_1..c_n``.

``mu0`` only enters entry ``(0, 0)`` of each existence form, with coefficient
``w_0`` of the form's weight polynomial, so every leading minor is affine,
``det = A + B mu0`` with ``B = w_0 * cofactor_00``. Minors with ``B > 0`` give
a threshold ``-A / B``; the bound is the largest threshold, never below 1
because the trace forces at least one nonzero eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBackstep, InputError
from .existence import MinorCheck, check_minor, hadamard_scale, hankel_forms
from .moments import MomentSequence, SpectralRange

TRACE_CONSTRAINT = "trace"


@dataclass(frozen=True)
class BackstepResult:
    mu0_bound: float
    active_constraint: str
    all_candidates: tuple[tuple[str, float], ...]
    delegated: tuple[MinorCheck, ...] = ()

    def to_dict(self):
        return {
            "mu0_bound": self.mu0_bound,
            "active_constraint": self.active_constraint,
            "candidates": [{"constraint": c, "threshold": t} for c, t in self.all_candidates],
            "delegated": [d.to_dict() for d in self.delegated],
        }


def mu0_lower_bound(seq: MomentSequence, rng: SpectralRange = SpectralRange(),
                    tol: float = 1e-10) -> BackstepResult:
    """Greatest lower bound on ``mu0`` from the existence determinants.

    Raises
    ------
    DegenerateBackstep
        A minor is violated for every ``mu0`` because its ``mu0`` coefficient
        vanishes.
    """
    if seq.n_max < 3:
        raise InputError("backstep needs at least three moments")
    c = np.concatenate(([0.0], seq.array()))
    candidates = [(TRACE_CONSTRAINT, 1.0)]
    delegated = []
    for form in hankel_forms(len(c), rng):
        if form.size == 0:
            continue
        h0 = form.matrix(c)
        w0 = form.weights[0]
        for k in range(1, form.size + 1):
            sub = h0[:k, :k]
            cofactor_block = sub[1:, 1:]
            cofactor = float(np.linalg.det(cofactor_block)) if k > 1 else 1.0
            cof_scale = hadamard_scale(cofactor_block) if k > 1 else 1.0
            slope = w0 * cofactor
            intercept = float(np.linalg.det(sub))
            name = f"{form.name}[{k}]"
            if abs(slope) <= tol * abs(w0) * cof_scale or w0 == 0.0:
                # det does not depend on mu0
                lifted = sub.copy()
                lifted[0, 0] += w0 * max(1.0, abs(sub[0, 0]))
                scale = max(hadamard_scale(sub), hadamard_scale(lifted))
                if intercept < -tol * scale:
                    raise DegenerateBackstep(
                        f"{name} is violated ({intercept:.3e}) and does not depend on mu0"
                    )
                continue
            if slope > 0:
                candidates.append((name, -intercept / slope))
        if form.size > 1:
            trailing = h0[1:, 1:]
            for k in range(1, form.size):
                check = check_minor(f"{form.name}~", trailing, k, tol)
                delegated.append(check)
    best = max(candidates, key=lambda item: item[1])
    return BackstepResult(
        mu0_bound=float(best[1]),
        active_constraint=best[0],
        all_candidates=tuple(candidates),
        delegated=tuple(delegated),
    )
