import time
from dataclasses import dataclass

import numpy as np
import pytest

from negbound import spectral
from negbound.errors import NegboundError
from negbound.pipeline import PipelineConfig, run_pipeline

# total dimension <= 16
ENSEMBLE_DIMS = [(2, 2), (2, 3), (2, 4), (3, 3), (4, 4), (2, 8), (3, 5)]
ENSEMBLE_KINDS = ("haar_pure", "induced_mixed", "separable_mixture")
ENSEMBLE_SIZE = 500

_criteria = []


@dataclass
class EnsembleCase:
    kind: str
    dims: tuple
    seed: int
    oracle: spectral.SpectrumReport
    moments: object
    report: object
    error: str = ""


def build_ensemble(kind, size=ENSEMBLE_SIZE, max_order=5, base_seed=10_000):
    cases = []
    for i in range(size):
        da, db = ENSEMBLE_DIMS[i % len(ENSEMBLE_DIMS)]
        rho = spectral.gen_random_state(kind, da, db, base_seed + i)
        oracle = spectral.exact_spectrum_report(rho)
        seq = spectral.pt_moments(rho, max_order)
        try:
            report = run_pipeline(seq, PipelineConfig(max_order=max_order))
            err = ""
        except NegboundError as exc:
            report, err = getattr(exc, "report", None), f"{type(exc).__name__}: {exc}"
        cases.append(EnsembleCase(kind, (da, db), base_seed + i, oracle, seq, report, err))
    return cases


@pytest.fixture(scope="session")
def ensemble():
    start = time.perf_counter()
    data = {kind: build_ensemble(kind) for kind in ENSEMBLE_KINDS}
    elapsed = time.perf_counter() - start
    return data, elapsed


@pytest.fixture
def bell():
    return spectral.bell_state()


@pytest.fixture
def werner23():
    return spectral.werner_state(2 / 3)


@pytest.fixture
def product_pure():
    rng = np.random.default_rng(42)
    va = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    vb = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    v = np.kron(va / np.linalg.norm(va), vb / np.linalg.norm(vb))
    return spectral.DensityMatrix(2, 3, np.outer(v, v.conj()))


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, passed, detail)``."""

    def record(number, passed, detail=""):
        _criteria.append((number, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_criteria, key=lambda c: str(c[0])):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}")
