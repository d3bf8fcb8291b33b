# tests/test_randomness.py

import logging
import math

import numpy as np
import pandas as pd
import pytest

import randomness
from combinat import weighted_independence_number
from errors import DomainError, InfeasibleError, InvalidParameterError, RecoveryError
from randomness import (
    BehaviorSampler,
    ProtocolConfig,
    ProtocolTranscript,
    TradeoffFunction,
    behavior_score,
    build_guessing_sdp,
    build_moment_relaxation,
    classical_device_behavior,
    deterministic_moment_matrix,
    guessing_probability,
    honest_device_behavior,
    min_entropy_curve,
    min_tradeoff_family,
    normal_word,
    raw_bits,
    reduce_word,
    simulate_protocol,
    toeplitz_extract,
    toeplitz_matrix,
    verify_tradeoff,
)


@pytest.fixture(scope="module")
def honest():
    return honest_device_behavior(3)


@pytest.fixture(scope="module")
def classical():
    return classical_device_behavior(3)


# ---------------------------------------------------------------------------
# Cenário
# ---------------------------------------------------------------------------

def test_gd_scenario_shape(scenario3):
    assert scenario3.n_contexts == 16
    assert scenario3.star_context == (0, 5, 10)
    assert scenario3.eve_outcomes == 4
    assert scenario3.score_constant == 17.0  # 5d + 2
    assert scenario3.alpha == 7.0


def test_test_score_values(scenario3):
    star = scenario3.star_index
    edge = next(k for k in range(scenario3.n_contexts) if k != star)
    assert scenario3.test_score(star, True) == pytest.approx(12.25)
    assert scenario3.test_score(star, False) == pytest.approx(-3.75)
    assert scenario3.test_score(edge, True) == pytest.approx(8.25)
    assert scenario3.test_score(edge, False) == pytest.approx(0.25)


def test_expression_value_matches_weighted_sum(scenario3, rng):
    for _ in range(5):
        p = rng.uniform(0.0, 0.3, scenario3.graph.n_vertices)
        omega = float(np.dot(scenario3.score_map, p))
        assert (scenario3.score_constant - scenario3.expression_value(p)) / 4 == pytest.approx(omega)


# ---------------------------------------------------------------------------
# Palavras e relaxação de momentos
# ---------------------------------------------------------------------------

def test_reduce_word_rules(scenario3):
    n = scenario3.graph.n_vertices
    assert reduce_word((3, 3), scenario3) == (3,)
    assert reduce_word((0, 1), scenario3) is None  # aresta do ciclo
    assert reduce_word((0, 5), scenario3) is None  # clique central
    assert reduce_word((n, 0), scenario3) == (0, n)
    assert reduce_word((0, n, 0), scenario3) == (0, n)
    assert reduce_word((n, n + 1), scenario3) is None
    assert reduce_word((0, 2, 0), scenario3) == (0, 2, 0)


def test_normal_word_uses_reverse(scenario3):
    assert normal_word((2, 0), scenario3) == (0, 2)
    assert normal_word((0, 2), scenario3) == (0, 2)


@pytest.mark.parametrize("level, dim", [("1", 19), ("1+AB", 64)])
def test_relaxation_dimensions(scenario3, level, dim):
    relax = build_moment_relaxation(scenario3, level)
    assert relax.matrix_dim == dim
    assert relax.monomials[0] == ()
    assert relax.device_index(0) == 1
    assert relax.eve_index(0) == 16


def test_relaxation_rejects_unknown_level(scenario3):
    with pytest.raises(InvalidParameterError):
        build_moment_relaxation(scenario3, "3")


@pytest.mark.parametrize("level", ["1", "1+AB"])
def test_deterministic_strategy_is_feasible(scenario3, level):
    witness = weighted_independence_number(scenario3.graph).witness
    prog = build_guessing_sdp(scenario3, 7.0, level)
    M = deterministic_moment_matrix(prog.relaxation, witness)
    assert np.max(np.abs(prog.problem.residuals([M]))) < 1e-12
    assert prog.problem.objective_value([M]) == pytest.approx(1.0)


def test_guessing_sdp_rejects_negative_omega(scenario3):
    with pytest.raises(DomainError):
        build_guessing_sdp(scenario3, -1.0, "1")
    with pytest.raises(DomainError):
        build_guessing_sdp(scenario3, math.inf, "1")


def test_level2_is_too_large_for_dense_solver(scenario3):
    with pytest.raises(InvalidParameterError):
        guessing_probability(scenario3, 7.5, "2")


def test_omega_above_theta_is_infeasible(scenario3):
    with pytest.raises(InfeasibleError):
        guessing_probability(scenario3, 7.9, "1")


def test_level1_classical_point(scenario3):
    res = guessing_probability(scenario3, 7.0, "1")
    assert res.p_guess >= 1.0 - 1e-5
    assert res.multipliers.shape[0] == build_guessing_sdp(scenario3, 7.0, "1").problem.n_constraints


@pytest.mark.slow
def test_guessing_probability_endpoints(scenario3):
    assert guessing_probability(scenario3, 7.0).p_guess == pytest.approx(1.0, abs=1e-5)
    top = scenario3.theta.value - 1e-6
    p_top = guessing_probability(scenario3, top).p_guess
    assert p_top == pytest.approx(1 / 3, abs=2e-2)
    assert -math.log2(p_top) >= 1.50


@pytest.mark.slow
@pytest.mark.parametrize("omega", [7.2, 7.5])
def test_higher_level_is_tighter(scenario3, omega):
    coarse = guessing_probability(scenario3, omega, "1").p_guess
    fine = guessing_probability(scenario3, omega, "1+AB").p_guess
    assert fine <= coarse + 1e-5


# ---------------------------------------------------------------------------
# Tradeoff e curva
# ---------------------------------------------------------------------------

def test_tradeoff_function_algebra():
    fn = TradeoffFunction(anchor=7.5, lambda_score=-1.0, intercept=8.0, p_guess_anchor=0.5)
    assert float(fn.g(7.5)) == pytest.approx(0.5)
    assert float(fn.entropy(7.5)) == pytest.approx(1.0)
    assert float(fn.derivative(7.5)) == pytest.approx(1.0 / (0.5 * math.log(2.0)))
    with pytest.raises(DomainError):
        fn.entropy(8.5)


def test_verify_tradeoff_detects_violation():
    fn = TradeoffFunction(7.5, -1.0, 8.0)
    assert verify_tradeoff(fn, [7.0, 7.5], [0.9, 0.5])
    assert not verify_tradeoff(fn, [7.0, 7.5], [1.2, 0.5])


def test_min_entropy_curve_warns_once(scenario3, monkeypatch, caplog):
    monkeypatch.setattr(randomness, "_erratum_noted", False)
    with caplog.at_level(logging.WARNING, logger="randomness"):
        df = min_entropy_curve(scenario3, [7.0], "1")
        min_entropy_curve(scenario3, [7.0], "1")
    assert list(df.columns) == ["omega", "p_guess", "h_min", "level"]
    assert sum("5d+1" in r.getMessage() for r in caplog.records) == 1


@pytest.mark.slow
def test_curve_and_tradeoffs(scenario3):
    grid = [7.0, 7.3, 7.6, scenario3.theta.value]
    curve = min_entropy_curve(scenario3, grid, "1+AB", jobs=2)
    assert (curve["h_min"].diff().dropna() >= -1e-5).all()
    assert curve["omega"].iloc[-1] <= scenario3.theta.value - 1e-6 + 1e-12
    family = min_tradeoff_family(scenario3, [7.3, 7.6])
    for fn in family:
        assert float(fn.g(fn.anchor)) == pytest.approx(fn.p_guess_anchor, abs=1e-5)
        assert verify_tradeoff(fn, curve["omega"], curve["p_guess"], tol=1e-5)


@pytest.mark.slow
def test_tradeoffs_dominate_twenty_point_grid(scenario3):
    grid = np.linspace(scenario3.alpha, scenario3.theta.value, 20)
    curve = min_entropy_curve(scenario3, grid, "1")
    family = min_tradeoff_family(scenario3, [7.2, 7.5, 7.6], "1")
    for fn in family:
        assert float(fn.g(fn.anchor)) == pytest.approx(fn.p_guess_anchor, abs=1e-5)
        assert verify_tradeoff(fn, curve["omega"], curve["p_guess"], tol=1e-5)


# ---------------------------------------------------------------------------
# Dispositivos
# ---------------------------------------------------------------------------

def test_honest_device_marginals(honest, scenario3):
    star = list(scenario3.star_context)
    assert honest.vertex_probs[star] == pytest.approx([1 / 3] * 3, abs=1e-4)
    assert behavior_score(honest) == pytest.approx(7.6753, abs=1e-3)


def test_classical_device_scores_alpha(classical):
    assert behavior_score(classical) == pytest.approx(7.0)
    for k in range(classical.scenario.n_contexts):
        dist = classical.context_distribution(k)
        assert dist.sum() == pytest.approx(1.0)
        assert set(np.unique(dist)) <= {0.0, 1.0}


def test_behavior_validation(scenario3):
    with pytest.raises(RecoveryError):
        BehaviorSampler(scenario3, np.full(15, 0.5))
    with pytest.raises(RecoveryError):
        BehaviorSampler(scenario3, np.full(15, -0.2))
    with pytest.raises(InvalidParameterError):
        BehaviorSampler(scenario3, np.zeros(14))


# ---------------------------------------------------------------------------
# Protocolo
# ---------------------------------------------------------------------------

def _config(**kw):
    base = dict(n_rounds=100_000, gamma=0.5, omega_exp=7.6753, delta=0.15, seed=11)
    base.update(kw)
    return ProtocolConfig(**base)


@pytest.mark.parametrize(
    "kw",
    [dict(gamma=0.0), dict(gamma=1.5), dict(delta=0.0), dict(n_rounds=0), dict(l_ext=-1), dict(eps_s=1.0)],
)
def test_protocol_config_validation(kw):
    with pytest.raises(InvalidParameterError):
        _config(**kw)


def test_honest_device_passes(honest):
    t = simulate_protocol(_config(omega_exp=behavior_score(honest)), honest)
    assert not t.aborted
    assert abs(t.omega_obs - behavior_score(honest)) < 0.15
    assert t.n_test == int(t.rounds["T"].sum())
    assert abs(t.n_test - 50_000) < 1_000
    assert t.certified_length == 0  # sem f_min
    gen = t.rounds[t.rounds["T"] == 0]
    assert set(gen["input"].unique()) == {honest.scenario.star_index}
    assert gen["symbol"].between(0, 3).all()
    assert (t.rounds.loc[t.rounds["T"] == 1, "symbol"] == -1).all()


def test_classical_device_aborts(classical):
    t = simulate_protocol(_config(), classical)
    assert t.aborted
    assert t.omega_obs == pytest.approx(7.0, abs=0.1)
    assert t.certified_length == 0


def test_certified_length_from_tradeoff(honest):
    fn = TradeoffFunction(anchor=7.6, lambda_score=-0.5, intercept=4.0)
    cfg = _config(omega_exp=behavior_score(honest), f_min=fn, l_ext=100)
    t = simulate_protocol(cfg, honest)
    rate = float(fn.entropy(cfg.omega_exp - cfg.delta))
    assert t.certified_length == math.floor(cfg.n_rounds * rate - 100)


def test_same_seed_replays(honest):
    a = simulate_protocol(_config(n_rounds=5_000, seed=5), honest)
    b = simulate_protocol(_config(n_rounds=5_000, seed=5), honest)
    c = simulate_protocol(_config(n_rounds=5_000, seed=6), honest)
    assert a.rounds.equals(b.rounds)
    assert not a.rounds.equals(c.rounds)
    assert a.dump().splitlines()[0] == "round,T,input,outputs,score"


def test_gamma_one_tests_every_round(honest):
    t = simulate_protocol(_config(n_rounds=2_000, gamma=1.0, delta=1.0), honest)
    assert t.n_test == 2_000
    assert raw_bits(t).size == 0


@pytest.mark.slow
def test_honest_device_rarely_aborts(honest):
    omega = behavior_score(honest)
    aborts = sum(
        simulate_protocol(_config(omega_exp=omega, delta=0.1, seed=s), honest).aborted for s in range(100)
    )
    assert aborts <= 5


# ---------------------------------------------------------------------------
# Extração
# ---------------------------------------------------------------------------

def test_raw_bits_encoding():
    rounds = pd.DataFrame({"symbol": [1, 0, 3, -1, 2]})
    t = ProtocolTranscript(rounds, 0.0, False, 0, 1, 3)
    assert raw_bits(t).tolist() == [0, 0, 1, 0, 0, 1]


def test_toeplitz_hand_example():
    seed = [1, 0, 1]
    assert toeplitz_extract([1, 1], seed, 2).tolist() == [1, 1]
    assert toeplitz_extract([1, 0], seed, 2).tolist() == [0, 1]
    assert toeplitz_matrix(seed, 2, 2).tolist() == [[0, 1], [1, 0]]


def test_toeplitz_extract_matches_matrix(rng):
    raw = rng.integers(0, 2, 300)
    out_len = 40
    seed = rng.integers(0, 2, 300 + out_len - 1)
    T = toeplitz_matrix(seed, 300, out_len)
    assert T.shape == (out_len, 300)
    expected = (T @ raw) % 2
    assert np.array_equal(toeplitz_extract(raw, seed, out_len), expected)


def test_toeplitz_extract_is_linear(rng):
    x = rng.integers(0, 2, 257)
    y = rng.integers(0, 2, 257)
    seed = rng.integers(0, 2, 257 + 31)
    lhs = toeplitz_extract(x ^ y, seed, 32)
    rhs = toeplitz_extract(x, seed, 32) ^ toeplitz_extract(y, seed, 32)
    assert np.array_equal(lhs, rhs)


def test_toeplitz_validation():
    with pytest.raises(InvalidParameterError):
        toeplitz_extract([1, 0], [1, 0, 1], 2, certified=1)
    with pytest.raises(InvalidParameterError):
        toeplitz_extract([1, 0], [1, 0], 2)
    with pytest.raises(InvalidParameterError):
        toeplitz_extract([1, 2], [1, 0, 1], 2)
    assert toeplitz_extract([1, 0], [], 0).size == 0
