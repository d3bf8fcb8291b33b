# tests/test_theta.py

import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from errors import DomainError, InvalidParameterError
from graphs import WeightedGraph, build_gd, build_odd_cycle, cycle_rotation, epsilon_expand, gd_block_swaps
from theta import (
    amplification_precondition,
    epsilon_theta_relaxation,
    lovasz_theta,
    orthonormal_representation,
    recover_orthonormal_rep,
    representation_certificate,
    symmetrize_solution,
    theta_c5_conditional,
    theta_c5_objective,
    theta_c5_stationary_points,
    theta_gd_analytic,
    theta_odd_cycle_closed,
)


def _complete(n: int) -> WeightedGraph:
    return WeightedGraph(n, frozenset(combinations(range(n), 2)), tuple(Fraction(1) for _ in range(n)))


# ---------------------------------------------------------------------------
# θ via SDP
# ---------------------------------------------------------------------------

def test_theta_c5_is_sqrt5():
    r = lovasz_theta(build_odd_cycle(5))
    assert r.value == pytest.approx(math.sqrt(5), abs=1e-6)
    assert r.moment_matrix.shape == (6, 6)
    assert sum(r.per_vertex_contribution) == pytest.approx(r.value, abs=1e-9)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_theta_complete_graph_is_one(n):
    assert lovasz_theta(_complete(n)).value == pytest.approx(1.0, abs=1e-6)


def test_theta_edgeless_is_total_weight():
    g = WeightedGraph(3, frozenset(), (1, 2, Fraction(1, 2)))
    assert lovasz_theta(g).value == pytest.approx(3.5, abs=1e-6)


@pytest.mark.parametrize("n", [7, 9])
def test_theta_odd_cycle_matches_closed_form(n):
    assert lovasz_theta(build_odd_cycle(n)).value == pytest.approx(theta_odd_cycle_closed(n), abs=1e-6)


def test_theta_gd3(theta_g3):
    assert theta_g3.value == pytest.approx(7.6753, abs=1e-3)
    assert theta_g3.value == pytest.approx(theta_gd_analytic(3), abs=1e-4)


REFERENCE_ROWS = {4: 9.8030, 5: 11.8869, 6: 13.9419, 7: 15.9762, 8: 17.9944}


@pytest.mark.parametrize(
    "d",
    [4, 5] + [pytest.param(d, marks=pytest.mark.slow) for d in (6, 7, 8, 9)],
)
def test_theta_gd_sdp_matches_analytic(d):
    value = lovasz_theta(build_gd(d)).value
    assert value == pytest.approx(theta_gd_analytic(d), abs=1e-4)
    if d in REFERENCE_ROWS:
        assert value == pytest.approx(REFERENCE_ROWS[d], abs=1e-3)


@pytest.mark.parametrize("g", [build_odd_cycle(5), build_odd_cycle(9), build_gd(3)], ids=["C5", "C9", "G3"])
def test_theta_dual_bounds_primal(g):
    sol = lovasz_theta(g).solution
    scale = 1.0 + abs(sol.primal_value)
    assert sol.ok
    assert sol.dual_value >= sol.primal_value - 1e-6 * scale
    assert sol.dual_value - sol.primal_value <= 1e-5 * scale


@pytest.mark.slow
def test_theta_gd9_equals_fractional_packing():
    g = build_gd(9)
    assert lovasz_theta(g).value == pytest.approx(20.0, abs=1e-4)
    alpha_star, theta, ok = amplification_precondition(g)
    assert ok
    assert alpha_star == pytest.approx(20.0, abs=1e-6)


def test_amplification_precondition_fails_for_gd3(g3):
    alpha_star, theta, ok = amplification_precondition(g3)
    assert not ok
    assert alpha_star - theta == pytest.approx(8.0 - 7.6753, abs=1e-3)


# ---------------------------------------------------------------------------
# Simetrização e vetores
# ---------------------------------------------------------------------------

def test_symmetrized_star_marginals(g3, theta_g3):
    X = symmetrize_solution(theta_g3.moment_matrix, gd_block_swaps(3), g3)
    for i in range(3):
        assert X[0, 5 * i + 1] == pytest.approx(1 / 3, abs=1e-4)
    assert np.allclose(X, X.T)
    assert float(np.dot(g3.float_weights(), X[0, 1:])) == pytest.approx(theta_g3.value, abs=1e-7)


def test_symmetrize_identity_and_bad_perm(g3, theta_g3):
    X = symmetrize_solution(theta_g3.moment_matrix, [], g3)
    assert np.array_equal(X, theta_g3.moment_matrix)
    with pytest.raises(InvalidParameterError):
        symmetrize_solution(theta_g3.moment_matrix, [cycle_rotation(15)], g3)
    with pytest.raises(InvalidParameterError):
        symmetrize_solution(np.eye(3), [], g3)


def test_orthonormal_representation_c5():
    g = build_odd_cycle(5)
    r = lovasz_theta(g)
    psi, units = orthonormal_representation(r)
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    assert np.allclose(np.linalg.norm(units, axis=1), 1.0)
    for u, v in g.edges:
        assert abs(units[u] @ units[v]) < 1e-4
    assert float(np.sum((units @ psi) ** 2)) == pytest.approx(math.sqrt(5), abs=1e-4)


# ---------------------------------------------------------------------------
# Forma analítica
# ---------------------------------------------------------------------------

def test_theta_c5_conditional_t3():
    value, x = theta_c5_conditional(3)
    assert value == pytest.approx(2.5585, abs=1e-4)
    assert 0.5 <= x <= 1.0
    assert float(theta_c5_objective(x, 3)) == pytest.approx(value)


def test_theta_c5_conditional_t9():
    value, x = theta_c5_conditional(9)
    assert value == pytest.approx(2 + 2 / 9, abs=1e-8)
    assert x == pytest.approx(0.75, abs=1e-2)


def test_theta_c5_conditional_is_non_increasing_in_t():
    values = [theta_c5_conditional(t)[0] for t in np.linspace(3.0, 50.0, 48)]
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))
    value, x = theta_c5_conditional(16)
    assert value == pytest.approx(2.125, abs=1e-7)
    assert x == pytest.approx(0.579, abs=1e-3)


def test_theta_c5_stationary_points_above_nine():
    root = 0.25 * math.sqrt(8 / 16)
    pts = theta_c5_stationary_points(17)
    assert pts == pytest.approx([0.75 - root, 0.75 + root], abs=1e-6)


def test_theta_gd_analytic_large_d():
    assert theta_gd_analytic(20) == pytest.approx(42.0, abs=1e-6)


def test_theta_odd_cycle_closed():
    assert theta_odd_cycle_closed(7) == pytest.approx(3.3177, abs=1e-4)
    assert theta_odd_cycle_closed(5) == pytest.approx(math.sqrt(5), abs=1e-12)


@pytest.mark.parametrize(
    "call",
    [
        lambda: theta_c5_conditional(2),
        lambda: theta_c5_stationary_points(2.9),
        lambda: theta_gd_analytic(2),
        lambda: theta_odd_cycle_closed(4),
    ],
)
def test_analytic_domain_errors(call):
    with pytest.raises(DomainError):
        call()


# ---------------------------------------------------------------------------
# θ'_ε
# ---------------------------------------------------------------------------

def test_epsilon_relaxation_sandwich_c5():
    ge = epsilon_expand(build_odd_cycle(5), Fraction(1, 4))
    r = epsilon_theta_relaxation(ge)
    lower = lovasz_theta(ge.full_view()).value
    upper = 0.5 * lovasz_theta(ge.strict_view()).value + 0.5 * lower
    assert lower - 1e-5 <= r.value <= upper + 1e-5
    assert np.allclose(np.diag(r.X), np.diag(r.Y), atol=1e-6)
    assert np.trace(r.X) == pytest.approx(1.0, abs=1e-6)


def test_recovered_vectors_respect_strict_edges():
    ge = epsilon_expand(build_odd_cycle(5), Fraction(1, 4))
    r = epsilon_theta_relaxation(ge)
    psi, units = recover_orthonormal_rep(r, ge)
    assert r.recovered is not None
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    cert = representation_certificate(ge, psi, units)
    assert cert["max_strict_overlap"] < 1e-4
    assert 0.0 < cert["value"] <= float(sum(ge.weights)) + 1e-9
