# tests/test_epsmodels.py

import logging
import math

import numpy as np
import pytest

from epsmodels import (
    cycle_eps_bound,
    hv_table,
    bell_mermin_agreement,
    ks_model_agreement,
    min_cycle_length,
    monte_carlo_hv_check,
    odd_cycle_threshold,
    qubit_contextuality_gap,
    qubit_fan,
    qubit_fan_edges,
    qubit_fan_graph,
    qubit_fan_relaxation,
    qubit_gap_table,
    threshold_table,
)
from errors import DomainError, InvalidParameterError
from theta import theta_odd_cycle_closed


# ---------------------------------------------------------------------------
# Ciclos ímpares
# ---------------------------------------------------------------------------

def test_threshold_c5():
    assert odd_cycle_threshold(5) == pytest.approx(0.47214, abs=1e-5)


def test_threshold_c3_is_zero():
    assert odd_cycle_threshold(3) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n", [5, 7, 9, 15, 31])
def test_threshold_is_where_theta_meets_bound(n):
    eps = odd_cycle_threshold(n)
    assert theta_odd_cycle_closed(n) == pytest.approx(cycle_eps_bound(n, eps), abs=1e-12)
    assert theta_odd_cycle_closed(n) > cycle_eps_bound(n, eps - 0.01)


def test_threshold_grows_with_n():
    table = threshold_table(21)
    values = [row["threshold"] for row in table]
    assert [row["n"] for row in table] == list(range(3, 22, 2))
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[-1] < 1.0


def test_min_cycle_length():
    assert min_cycle_length(0.9) == 25
    assert min_cycle_length(0.0) == 3
    n = min_cycle_length(0.6)
    assert n % 2 == 1
    assert theta_odd_cycle_closed(n) > cycle_eps_bound(n, 0.6)
    with pytest.raises(DomainError):
        min_cycle_length(1.0)


def test_threshold_rejects_even():
    with pytest.raises(DomainError):
        odd_cycle_threshold(6)


# ---------------------------------------------------------------------------
# Leque de qubits
# ---------------------------------------------------------------------------

def test_qubit_fan_vectors():
    fan = qubit_fan(4)
    assert fan.vectors.shape == (8, 2)
    assert fan.epsilon == pytest.approx(math.sin(math.pi / 8) ** 2)
    assert np.allclose(fan.projector_sum(), 4 * np.eye(2))
    for k in range(1, 5):
        assert fan.vectors[fan.index(k, 0)] @ fan.vectors[fan.index(k, 1)] == pytest.approx(0.0, abs=1e-15)


def test_qubit_fan_eps_edges_have_overlap_sqrt_eps():
    fan = qubit_fan(5)
    strict, eps = qubit_fan_edges(5)
    assert len(strict) == 5
    assert len(eps) == 10
    for u, v in eps:
        assert abs(fan.vectors[u] @ fan.vectors[v]) == pytest.approx(math.sqrt(fan.epsilon), abs=1e-12)


@pytest.mark.parametrize("n, expected", [(3, (3.0, 2.25)), (2, (2.0, 1.5))])
def test_qubit_gap(n, expected):
    assert qubit_contextuality_gap(n) == pytest.approx(expected)


def test_qubit_gap_n2_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="epsmodels"):
        qubit_contextuality_gap(2)
    assert "n=2" in caplog.text


def test_qubit_gap_table_positive():
    rows = qubit_gap_table(8)
    assert [r["n"] for r in rows] == list(range(2, 9))
    for r in rows:
        assert r["quantum"] - r["classical_bound"] == pytest.approx(1.0 - r["epsilon"])
        assert r["quantum"] > r["classical_bound"]


def test_qubit_fan_graph_labels():
    ge = qubit_fan_graph(qubit_fan(3))
    assert ge.n_vertices == 6
    assert ge.labels[:2] == ("v_1^0", "v_1^1")
    assert float(ge.epsilon) == pytest.approx(0.25)


def test_qubit_fan_rejects_n1():
    with pytest.raises(DomainError):
        qubit_fan(1)


def test_qubit_fan_relaxation_sandwich():
    row = qubit_fan_relaxation(3)
    assert row["sandwich_ok"]
    assert row["theta_full"] - 1e-5 <= row["theta_eps"] <= 2.5 + 1e-5
    assert row["upper"] == pytest.approx(2.5, abs=1e-5)
    assert row["max_strict_overlap"] < 1e-4


# ---------------------------------------------------------------------------
# Modelos de variáveis ocultas
# ---------------------------------------------------------------------------

def test_ks_closed_form():
    assert ks_model_agreement(math.pi / 3) == pytest.approx((0.375, 0.25))


def test_bell_mermin_closed_form():
    s = math.sin(math.pi / 6)
    assert bell_mermin_agreement(math.pi / 6) == pytest.approx((s, s * s))


@pytest.mark.parametrize("theta_c", [math.pi / 12, math.pi / 4, math.pi / 3])
def test_models_exceed_overlap(theta_c):
    for model in (ks_model_agreement, bell_mermin_agreement):
        p, overlap = model(theta_c)
        assert p > overlap


@pytest.mark.parametrize("theta_c", [0.0, -0.1, math.pi])
def test_angle_domain(theta_c):
    with pytest.raises(DomainError):
        ks_model_agreement(theta_c)


@pytest.mark.parametrize("model, closed", [("ks", ks_model_agreement), ("bell-mermin", bell_mermin_agreement)])
def test_monte_carlo_agrees_with_closed_form(model, closed):
    theta_c = math.pi / 3
    p, se = monte_carlo_hv_check(model, theta_c, 200_000, seed=7)
    assert abs(p - closed(theta_c)[0]) <= 5 * se


def test_monte_carlo_independent_of_jobs():
    a = monte_carlo_hv_check("ks", math.pi / 4, 150_000, seed=3, jobs=1)
    b = monte_carlo_hv_check("ks", math.pi / 4, 150_000, seed=3, jobs=3)
    assert a == b


def test_monte_carlo_validation():
    with pytest.raises(InvalidParameterError):
        monte_carlo_hv_check("ks", 0.5, 100, seed=1)
    with pytest.raises(InvalidParameterError):
        monte_carlo_hv_check("spin", 0.5, 20_000, seed=1)


def test_hv_table_without_sampling():
    rows = hv_table([math.pi / 6, math.pi / 2])
    assert len(rows) == 2
    assert "ks_mc" not in rows[0]
    assert rows[1]["ks_model"] == pytest.approx(0.5)
    assert rows[1]["bm_model"] == pytest.approx(1.0)
