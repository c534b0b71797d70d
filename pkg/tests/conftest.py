import numpy as np
import pytest

from rboundlab.spaces import SpaceModel, build_basis_decomposition

_acceptance = []


def random_space(rng, dim, exact_only=False):
    kinds = ["l1", "l2", "sup", "weighted"] + ([] if exact_only else ["l3", "l1.5"])
    kind = kinds[rng.integers(len(kinds))]
    if kind == "weighted":
        return SpaceModel.weighted_l1(rng.uniform(0.2, 2.0, dim))
    if kind == "sup":
        return SpaceModel.sup(dim)
    return SpaceModel.lp(dim, float(kind[1:]))


def random_blocks(rng, dim):
    dims = []
    left = dim
    while left:
        d = int(rng.integers(1, min(3, left) + 1))
        dims.append(d)
        left -= d
    return dims


def random_model(rng, dim=None, exact_only=True, complex_basis=False, spread=0.3):
    """Well-conditioned random basis (identity plus a perturbation) grouped into blocks."""
    dim = dim or int(rng.integers(2, 9))
    B = np.eye(dim) + spread * rng.standard_normal((dim, dim)) / np.sqrt(dim)
    if complex_basis:
        B = B + 1j * spread * rng.standard_normal((dim, dim)) / np.sqrt(dim)
    space = random_space(rng, dim, exact_only)
    return build_basis_decomposition(space, B, random_blocks(rng, dim), name="random")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
