import numpy as np
import pytest

from dpc.core import Dataset, Sample, Threshold


def make_dataset(values, features=None, per_experiment=1, prop="y"):
    """One sample per value; ``per_experiment`` consecutive samples share an experiment."""
    values = list(values)
    if features is None:
        features = [[float(i)] for i in range(len(values))]
    samples = []
    for i, (v, x) in enumerate(zip(values, features)):
        eid = f"E{i // per_experiment:02d}"
        samples.append(Sample(eid, f"{eid}-S{i:03d}", tuple(float(f) for f in x), {prop: float(v)}))
    names = [f"x{j}" for j in range(len(features[0]))]
    return Dataset.from_samples(samples, names, [prop])


@pytest.fixture
def three_points():
    # y = {0, 10, 20}, the hand-enumerated pairing example
    return make_dataset([0.0, 10.0, 20.0])


@pytest.fixture
def unit_threshold():
    return Threshold.absolute(1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_RESULTS: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.setdefault(criterion, []).append((bool(ok), detail))


def acceptance_lines() -> list[str]:
    lines = []
    for n in sorted(ACCEPTANCE_RESULTS):
        parts = ACCEPTANCE_RESULTS[n]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        lines.append(f"criterion {n:>2}: {status}  " + "; ".join(d for _, d in parts))
    return lines


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
