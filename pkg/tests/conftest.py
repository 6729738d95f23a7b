import numpy as np
import pytest

from riskcore.dataset import LabeledDataset, generate_synthetic, planted_config
from riskcore.schema import QuestionnaireSchema, QuestionSpec

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def small_schema():
    return QuestionnaireSchema((
        QuestionSpec("Q1", "smoker", "single_choice", 3),
        QuestionSpec("Q2", "relatives", "multi_choice", 4),
        QuestionSpec("Q3", "age", "fill_in"),
    ))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_planted():
    """600 planted-truth rows on the reference schema; cheap enough for unit tests."""
    cfg = planted_config(n_samples=600, seed=3)
    return cfg, generate_synthetic(cfg)


def blobs(n_per_class=40, d=2, gap=3.0, seed=0):
    r = np.random.default_rng(seed)
    x0 = r.standard_normal((n_per_class, d))
    x1 = r.standard_normal((n_per_class, d)) + gap
    x = np.vstack([x0, x1])
    y = np.r_[np.zeros(n_per_class, int), np.ones(n_per_class, int)]
    return x, y


def toy_dataset(n=20, d=3, seed=0, pos=None):
    r = np.random.default_rng(seed)
    x = r.random((n, d))
    y = np.zeros(n, int)
    y[: (n // 2 if pos is None else pos)] = 1
    return LabeledDataset(x, y, tuple(f"f{i}" for i in range(d)))
