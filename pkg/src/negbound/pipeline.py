"""Progressive-degradation pipeline, ensemble sweeps and noise trials."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import spectral
from .errors import NegboundError, NoFeasibleOrder, NoiseError, PrecheckFailed, InputError
from .existence import Verdict, classify
from .moments import MomentSequence, SpectralRange, perturb, truncate, validate
from .principal import (
    DEGRADED,
    LOWER,
    STRICT,
    UPPER,
    NegativityBound,
    OrderResult,
    Tolerances,
    exp_fit_lower,
    generic_bound,
)

log = logging.getLogger(__name__)

PRECHECK_MODES = ("enforce", "warn", "skip")
SANDWICH_TOL = 1e-8
PRECHECK_WARNING = "inconsistent with a nonnegative spectrum: NPT signature or noise"


@dataclass(frozen=True)
class PipelineConfig:
    range: SpectralRange = SpectralRange()
    max_order: Optional[int] = None
    precheck_mode: str = "warn"
    tolerances: Tolerances = Tolerances()
    seed: int = 0
    output_format: str = "json"

    def __post_init__(self):
        if self.precheck_mode not in PRECHECK_MODES:
            raise InputError(f"precheck_mode must be one of {PRECHECK_MODES}")
        if self.max_order is not None and self.max_order < 3:
            raise InputError("max_order must be at least 3")
        if self.output_format not in ("json", "text"):
            raise InputError("output_format must be 'json' or 'text'")


@dataclass
class OrderEntry:
    order: int
    precheck: Optional[dict] = None
    backstep: Optional[dict] = None
    bound: Optional[NegativityBound] = None
    mu0_stderr: Optional[float] = None
    recovered: bool = False
    warnings: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.bound is not None

    def to_dict(self):
        return {
            "order": self.order,
            "precheck": self.precheck,
            "backstep": self.backstep,
            "mu0_stderr": self.mu0_stderr,
            "bound": None if self.bound is None else self.bound.to_dict(),
            "quality": None if self.bound is None else self.bound.quality,
            "singular_recovery": self.recovered,
            "warnings": list(self.warnings),
            "errors": list(self.errors),
        }


@dataclass
class BoundReport:
    entries: list
    exp_fit: Optional[NegativityBound]
    best_lower: Optional[NegativityBound]
    best_upper: Optional[NegativityBound]
    degradation_trace: list
    findings: list
    range: SpectralRange

    @property
    def bound_crossing(self) -> bool:
        if self.best_lower is None or self.best_upper is None:
            return False
        return self.best_lower.negativity > self.best_upper.negativity + SANDWICH_TOL

    def entry(self, order: int) -> Optional[OrderEntry]:
        for e in self.entries:
            if e.order == order:
                return e
        return None

    def bound_at(self, order: int) -> Optional[NegativityBound]:
        e = self.entry(order)
        return None if e is None else e.bound

    def to_dict(self):
        return {
            "range": {"a": self.range.a, "b": self.range.b},
            "findings": [{"severity": f.severity, "order": f.order, "message": f.message}
                         for f in self.findings],
            "orders": [e.to_dict() for e in self.entries],
            "exp_fit": None if self.exp_fit is None else self.exp_fit.to_dict(),
            "chosen_best": {
                "lower": None if self.best_lower is None else self.best_lower.to_dict(),
                "upper": None if self.best_upper is None else self.best_upper.to_dict(),
            },
            "bound_crossing": self.bound_crossing,
            "degradation_trace": [{"order": o, "reason": r} for o, r in self.degradation_trace],
        }


def _propagate(seq: MomentSequence, rng, tol, base: OrderResult):
    """First-order error propagation of the negativity and ``mu0`` through one order."""
    if seq.stderr is None or not any(seq.stderr[1:]):
        return None, None
    var_n = var_mu0 = 0.0
    values = list(seq.values)
    for k in range(2, seq.n_max + 1):
        sigma = seq.stderr[k - 1]
        if sigma == 0:
            continue
        h = max(1e-6 * abs(values[k - 1]), 1e-12)
        shifted = []
        for sign in (1.0, -1.0):
            trial = list(values)
            trial[k - 1] += sign * h
            try:
                shifted.append(generic_bound(MomentSequence(tuple(trial)), rng, tol))
            except NegboundError:
                return None, None
        dn = (shifted[0].bound.negativity - shifted[1].bound.negativity) / (2 * h)
        dm = (shifted[0].backstep.mu0_bound - shifted[1].backstep.mu0_bound) / (2 * h)
        var_n += (dn * sigma) ** 2
        var_mu0 += (dm * sigma) ** 2
    return math.sqrt(var_n), math.sqrt(var_mu0)


def run_pipeline(seq: MomentSequence, config: PipelineConfig = PipelineConfig()) -> BoundReport:
    """Bounds at every order from ``max_order`` down to 3.

    A noise-type failure at one order is recorded in the degradation trace and
    the next lower order is tried. Shifted pre-checks only gate the
    computation in ``enforce`` mode; in ``warn`` mode they are reported.

    Raises
    ------
    NoFeasibleOrder
        No order produced a bound; ``exc.report`` holds the full trace.
    """
    rng, tol = config.range, config.tolerances
    top = seq.n_max if config.max_order is None else min(config.max_order, seq.n_max)
    if top < 3:
        raise InputError("at least three moments are needed for a principal bound")
    findings = validate(seq, rng)
    entries, trace = [], []
    for n in range(top, 2, -1):
        sub = truncate(seq, n)
        entry = OrderEntry(n)
        entries.append(entry)
        if config.precheck_mode != "skip":
            pre = classify(sub, rng, tol.det, "shifted_precheck")
            entry.precheck = pre.to_dict()
            if pre.verdict is Verdict.INFEASIBLE:
                failed = ", ".join(d.id for d in pre.failing())
                if config.precheck_mode == "enforce":
                    exc = PrecheckFailed(f"shifted pre-check infeasible at {failed}")
                    entry.errors.append(f"{type(exc).__name__}: {exc}")
                    trace.append((n, entry.errors[-1]))
                    continue
                entry.warnings.append(f"shifted pre-check {failed}: {PRECHECK_WARNING}")
        try:
            result = generic_bound(sub, rng, tol)
        except NoiseError as exc:
            entry.errors.append(f"{type(exc).__name__}: {exc}")
            trace.append((n, entry.errors[-1]))
            log.debug("order %d abandoned: %s", n, exc)
            continue
        entry.backstep = result.backstep.to_dict()
        entry.recovered = result.recovered
        if result.recovered:
            entry.warnings.append(f"singular recovery after {result.note}")
        bound = result.bound
        if trace and bound.quality == STRICT:
            bound = replace(bound, quality=DEGRADED)
        n_err, mu0_err = _propagate(sub, rng, tol, result)
        if n_err is not None:
            bound = replace(bound, stderr=n_err)
            entry.mu0_stderr = mu0_err
        entry.bound = bound

    exp_fit = None
    if seq.n_max >= 4 and seq[2] > 0 and seq[4] > 0:
        exp_fit = exp_fit_lower(seq[2], seq[4])
        if seq.stderr is not None and exp_fit.negativity > 0:
            mu2, mu4 = seq[2], seq[4]
            d2 = 0.75 * math.sqrt(mu2 / mu4)
            d4 = -0.25 * mu2**1.5 / mu4**1.5
            err = math.hypot(d2 * seq.stderr[1], d4 * seq.stderr[3])
            exp_fit = replace(exp_fit, stderr=err)

    lowers = [e.bound for e in entries if e.ok and e.bound.direction == LOWER]
    if exp_fit is not None:
        lowers.append(exp_fit)
    uppers = [e.bound for e in entries if e.ok and e.bound.direction == UPPER]
    report = BoundReport(
        entries=entries,
        exp_fit=exp_fit,
        best_lower=max(lowers, key=lambda b: b.negativity) if lowers else None,
        best_upper=min(uppers, key=lambda b: b.negativity) if uppers else None,
        degradation_trace=trace,
        findings=findings,
        range=rng,
    )
    if not any(e.ok for e in entries):
        raise NoFeasibleOrder(f"no order in [3, {top}] admits a bound", report)
    return report


# -- sweeps ---------------------------------------------------------------------

SWEEP_HEADER = ("seed", "kind", "dimA", "dimB", "N_exact", "N3_lower", "Nexp_lower",
                "N4_upper", "mu0_bound", "sandwich_ok", "quality")


def sandwich_ok(exact, lower=(), upper=(), tol=SANDWICH_TOL) -> bool:
    lower = [x for x in lower if x is not None]
    upper = [x for x in upper if x is not None]
    if not lower and not upper:
        return False
    return all(x <= exact + tol for x in lower) and all(x >= exact - tol for x in upper)


def sweep_row(kind, dim_a, dim_b, seed, config: PipelineConfig, p=None) -> dict:
    row = dict.fromkeys(SWEEP_HEADER)
    row.update(seed=seed, kind=kind, dimA=dim_a, dimB=dim_b, sandwich_ok=False)
    try:
        state = spectral.gen_random_state(kind, dim_a, dim_b, seed, p=p)
        oracle = spectral.exact_spectrum_report(state)
        row["N_exact"] = oracle.negativity
        order = max(4, config.max_order or 4)
        seq = spectral.pt_moments(state, order)
        report = run_pipeline(seq, replace(config, max_order=order))
    except NoFeasibleOrder as exc:
        row["quality"] = f"error:{type(exc).__name__}"
        return row
    except NegboundError as exc:
        row["quality"] = f"error:{type(exc).__name__}"
        return row
    b3, b4 = report.bound_at(3), report.bound_at(4)
    row["N3_lower"] = None if b3 is None else b3.negativity
    row["N4_upper"] = None if b4 is None else b4.negativity
    row["Nexp_lower"] = None if report.exp_fit is None else report.exp_fit.negativity
    e3 = report.entry(3)
    if e3 is not None and e3.backstep is not None:
        row["mu0_bound"] = e3.backstep["mu0_bound"]
    lowers = [b.negativity for b in (report.best_lower,) if b is not None]
    lowers += [x for x in (row["N3_lower"], row["Nexp_lower"]) if x is not None]
    row["sandwich_ok"] = sandwich_ok(oracle.negativity, lowers, [row["N4_upper"]])
    row["quality"] = ";".join(
        f"{e.order}:{e.bound.quality if e.ok else 'failed'}" for e in report.entries
    )
    return row


def run_sweep(kind: str, dim_a: int, dim_b: int, count: int, seed: int = 0,
              config: PipelineConfig = PipelineConfig()) -> list[dict]:
    """One row per sampled state; row ``i`` uses seed ``seed + i``.

    For ``kind="werner"`` the rows walk the grid ``p = i / (count - 1)``.
    """
    rows = []
    for i in range(count):
        p = None
        if kind == "werner":
            p = i / (count - 1) if count > 1 else 1.0
        rows.append(sweep_row(kind, dim_a, dim_b, seed + i, config, p=p))
    return rows


# -- noise trials ----------------------------------------------------------

def run_degradation(seq: MomentSequence, sigma: float, trials: int, seed: int = 0,
                    config: PipelineConfig = PipelineConfig()) -> dict:
    """Run the pipeline on ``trials`` independently perturbed copies of ``seq``."""
    records = []
    abandoned = {}
    for t in range(trials):
        noisy = perturb(seq, sigma, seed + t)
        rec = {"seed": seed + t, "lower": None, "lower_stderr": None, "upper": None,
               "abandoned": []}
        try:
            report = run_pipeline(noisy, config)
        except NoFeasibleOrder as exc:
            report = exc.report
            rec["error"] = "NoFeasibleOrder"
        rec["abandoned"] = [o for o, _ in report.degradation_trace]
        for o in rec["abandoned"]:
            abandoned[o] = abandoned.get(o, 0) + 1
        if report.best_lower is not None:
            rec["lower"] = report.best_lower.negativity
            rec["lower_stderr"] = report.best_lower.stderr
            rec["lower_order"] = report.best_lower.order
            rec["lower_method"] = report.best_lower.method
        if report.best_upper is not None:
            rec["upper"] = report.best_upper.negativity
        records.append(rec)
    lowers = np.array([r["lower"] for r in records if r["lower"] is not None])
    return {
        "sigma": sigma,
        "trials": trials,
        "valid_fraction": float(np.mean([r["lower"] is not None or r["upper"] is not None
                                         for r in records])) if records else 0.0,
        "lower_mean": float(lowers.mean()) if lowers.size else None,
        "lower_min": float(lowers.min()) if lowers.size else None,
        "lower_max": float(lowers.max()) if lowers.size else None,
        "abandoned_counts": {str(k): v for k, v in sorted(abandoned.items())},
        "records": records,
    }
