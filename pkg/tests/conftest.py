import numpy as np
import pytest

from blastfrag.ingest import DetectionSet, Instance


def make_ds(boxes, areas=None, width=100.0, height=100.0, conf=0.9, scale=None, image_id="img"):
    if areas is None:
        areas = [(b[2] - b[0]) * (b[3] - b[1]) for b in boxes]
    insts = tuple(Instance(tuple(map(float, b)), float(a), conf) for b, a in zip(boxes, areas))
    return DetectionSet(image_id, float(width), float(height), scale, insts)


def random_ds(rng, n, width=640.0, height=480.0):
    x1 = rng.uniform(0, width - 2, n)
    y1 = rng.uniform(0, height - 2, n)
    x2 = np.minimum(x1 + rng.uniform(1, 80, n), width)
    y2 = np.minimum(y1 + rng.uniform(1, 80, n), height)
    areas = rng.uniform(1, 5000, n)
    boxes = np.column_stack([x1, y1, x2, y2])
    return make_ds(boxes.tolist(), areas.tolist(), width, height)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


ACCEPTANCE = {}


def record(criterion, ok, detail):
    """Log one acceptance verdict; the lines are repeated in the terminal summary."""
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
