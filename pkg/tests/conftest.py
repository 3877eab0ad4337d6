import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from drifteval.data import FeatureSpec, TemporalDataset  # noqa: E402

SCHEMA = {"entity": "id", "time": "t", "label": "y",
          "features": {"cat": "categorical", "num": "numerical"}}


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(c) for c in r) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def toy_dataset(n_times=3, per_time=40, seed=0, signal=2.0):
    """Two-feature dataset whose label depends on ``num`` and the ``cat`` level."""
    rng = np.random.default_rng(seed)
    n = n_times * per_time
    times = np.repeat(np.arange(n_times), per_time)
    num = rng.normal(size=n)
    cat = rng.choice(["a", "b", "c"], size=n)
    logit = signal * num + np.where(cat == "a", 1.0, -0.5)
    y = (rng.random(n) < 1 / (1 + np.exp(-logit))).astype(int)
    specs = [FeatureSpec("cat", "categorical"), FeatureSpec("num", "numerical")]
    return TemporalDataset(specs, [f"e{i}" for i in range(n)], times, y,
                           {"cat": list(cat), "num": list(num)})


@pytest.fixture
def toy():
    return toy_dataset()


# one (criterion, passed, detail) entry per acceptance criterion, echoed in the summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
