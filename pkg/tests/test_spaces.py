import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_model
from rboundlab.spaces import (DimensionError, SpaceModel, build_coordinate_decomposition,
                              build_haar_l1, build_trig_lp, load_decomposition, norm,
                              operator_norm, partial_sum, save_decomposition, tail_projection,
                              validate_decomposition)


def test_norm_examples():
    assert norm(SpaceModel.lp(3, 1), [1, -2, 3j]) == pytest.approx(6)
    assert norm(SpaceModel.sup(2), [1, -2]) == 2
    assert norm(SpaceModel.weighted_l1([0.5, 0.5]), [2, 2]) == 2


def test_norm_dimension_mismatch():
    with pytest.raises(DimensionError):
        norm(SpaceModel.lp(3, 2), [1, 2])


def test_weighted_l1_rejects_nonpositive_weights():
    with pytest.raises(ValueError):
        SpaceModel.weighted_l1([1.0, 0.0])


def test_operator_norm_examples():
    assert operator_norm(SpaceModel.lp(2, 1), np.diag([1, -3])) == (3.0, True)
    assert operator_norm(SpaceModel.sup(2), np.ones((2, 2))) == (2.0, True)
    # singular value oracle for a diagonal 2x2
    val, exact = operator_norm(SpaceModel.lp(2, 2), np.diag([2.0, 1.0]))
    assert abs(val - np.linalg.svd(np.diag([2.0, 1.0]), compute_uv=False)[0]) < 1e-6
    assert exact


def test_weighted_l1_operator_norm_is_column_formula(rng):
    w = rng.uniform(0.1, 3, 5)
    B = rng.standard_normal((5, 5))
    space = SpaceModel.weighted_l1(w)
    expected = max((w @ np.abs(B[:, j])) / w[j] for j in range(5))
    assert operator_norm(space, B)[0] == pytest.approx(expected)
    # attained at a coordinate vector
    vals = [norm(space, B[:, j]) / norm(space, np.eye(5)[j]) for j in range(5)]
    assert max(vals) == pytest.approx(expected)


def test_lp_search_is_lower_bound_and_flagged(rng):
    space = SpaceModel.lp(4, 3)
    B = rng.standard_normal((4, 4))
    val, exact = operator_norm(space, B)
    assert not exact
    xs = rng.standard_normal((2000, 4))
    sampled = max(norm(space, B @ x) / norm(space, x) for x in xs)
    assert val >= sampled - 1e-9
    # Riesz-Thorin between the exact l1 and l-inf norms
    n1 = np.abs(B).sum(axis=0).max()
    ninf = np.abs(B).sum(axis=1).max()
    assert val <= n1 ** (1 / 3) * ninf ** (2 / 3) + 1e-9


def test_coordinate_decomposition():
    m = build_coordinate_decomposition(SpaceModel.lp(4, 1), [1, 1, 1, 1])
    assert m.n_blocks == 4 and m.K == 1
    for n in range(1, 5):
        assert np.linalg.matrix_rank(m.block(n)) == 1
    m2 = build_coordinate_decomposition(SpaceModel.lp(4, 2), [2, 2])
    assert [np.linalg.matrix_rank(m2.block(n)) for n in (1, 2)] == [2, 2]
    assert validate_decomposition(m).passed and validate_decomposition(m2).passed
    with pytest.raises(ValueError):
        build_coordinate_decomposition(SpaceModel.lp(4, 2), [2, 1])


def test_haar_level_one():
    m = build_haar_l1(1)
    np.testing.assert_allclose(m.block(1), [[0.5, 0.5], [0.5, 0.5]])
    np.testing.assert_allclose(m.block(2), [[0.5, -0.5], [-0.5, 0.5]])
    np.testing.assert_allclose(partial_sum(m, 2), np.eye(2))


def test_haar_monotone_constant():
    m = build_haar_l1(3)
    norms = [operator_norm(m.space, partial_sum(m, N))[0] for N in range(1, 9)]
    assert abs(max(norms) - 1) < 1e-9
    assert abs(m.K - 1) < 1e-9


def test_haar_nested_partial_sums():
    m = build_haar_l1(3)
    for a in range(9):
        for b in range(9):
            np.testing.assert_allclose(partial_sum(m, a) @ partial_sum(m, b),
                                       partial_sum(m, min(a, b)), atol=1e-9)


def test_haar_dyadic_partial_sums_are_conditional_expectations():
    m = build_haar_l1(3)
    # P_4 averages over the four dyadic intervals of length 1/4
    E = np.kron(np.eye(4), np.full((2, 2), 0.5))
    np.testing.assert_allclose(partial_sum(m, 4), E, atol=1e-12)


@pytest.mark.parametrize("levels", [0, 13, 2.5])
def test_haar_levels_out_of_range(levels):
    with pytest.raises(ValueError):
        build_haar_l1(levels)


def test_trig_p2_orthogonal():
    m = build_trig_lp(2, 4)
    assert abs(m.K - 1) < 1e-9
    assert validate_decomposition(m).passed


def test_trig_p4_conditional():
    m = build_trig_lp(4, 8)
    assert np.isfinite(m.K) and m.K > 1
    assert not m.K_exact
    assert validate_decomposition(m).passed


@pytest.mark.parametrize("p", [1, np.inf])
def test_trig_rejects_endpoints(p):
    with pytest.raises(ValueError):
        build_trig_lp(p, 4)


def test_partial_sum_and_tail_edges():
    m = build_haar_l1(2)
    np.testing.assert_array_equal(partial_sum(m, 0), np.zeros((4, 4)))
    np.testing.assert_allclose(partial_sum(m, 4), np.eye(4))
    np.testing.assert_allclose(tail_projection(m, 4), np.zeros((4, 4)), atol=1e-15)
    np.testing.assert_allclose(tail_projection(m, 0), np.eye(4))
    for N in range(5):
        np.testing.assert_allclose(partial_sum(m, N) + tail_projection(m, N), np.eye(4))
    with pytest.raises(IndexError):
        partial_sum(m, 5)


def test_validate_detects_tampering():
    m = build_haar_l1(2)
    blocks = m.blocks.copy()
    doubled = blocks.copy()
    doubled[0] = 2 * doubled[0]
    rep = validate_decomposition(m.with_projections(doubled))
    assert not rep.passed
    assert rep.checks["resolution_of_identity"] > 1e-9
    skew = blocks.copy()
    skew[1] = skew[1] + 0.1 * np.eye(4)
    rep = validate_decomposition(m.with_projections(skew))
    assert not rep.passed and rep.checks["idempotence"] > 1e-9


def test_validate_large_factorized_model():
    rep = validate_decomposition(build_haar_l1(8))
    assert rep.passed and rep.method == "factorized"


def test_json_roundtrip(tmp_path):
    m = build_trig_lp(3, 3)
    path = tmp_path / "model.json"
    save_decomposition(m, path)
    m2 = load_decomposition(path)
    np.testing.assert_allclose(m2.blocks, m.blocks)
    assert m2.K == m.K and m2.space.to_dict() == m.space.to_dict()
    doc = json.loads(path.read_text())
    assert doc["space"]["kind"] == "lp" and doc["block_dims"] == [1, 2, 2, 1]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_operator_norm_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, exact_only=True)
    A = rng.standard_normal((m.dim, m.dim))
    B = rng.standard_normal((m.dim, m.dim))
    ab = operator_norm(m.space, A @ B)[0]
    assert ab <= operator_norm(m.space, A)[0] * operator_norm(m.space, B)[0] + 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_builder_K_equals_max_partial_sum_norm(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, exact_only=True)
    direct = max(operator_norm(m.space, partial_sum(m, N))[0] for N in range(1, m.n_blocks + 1))
    assert abs(direct - m.K) < 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_norm_axioms(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, exact_only=False)
    x, y = rng.standard_normal((2, m.dim)) + 1j * rng.standard_normal((2, m.dim))
    a = complex(rng.standard_normal(), rng.standard_normal())
    assert norm(m.space, x + y) <= norm(m.space, x) + norm(m.space, y) + 1e-12
    assert norm(m.space, a * x) == pytest.approx(abs(a) * norm(m.space, x))
    assert norm(m.space, np.zeros(m.dim)) == 0 and norm(m.space, x) > 0
