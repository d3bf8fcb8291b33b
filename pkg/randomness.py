# randomness.py
# Aleatoriedade certificada: relaxação de momentos (p_guess × ω), funções de tradeoff,
# simulação do protocolo de spot-checking e extrator de Toeplitz

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import pandas as pd
from scipy.linalg import toeplitz
from scipy.signal import fftconvolve

from combinat import weighted_independence_number
from config import SOLVER_TOL
from errors import (
    DomainError,
    InfeasibleError,
    InvalidParameterError,
    RecoveryError,
)
from graphs import WeightedGraph, build_gd, enumerate_maximal_cliques, gd_block_swaps
from optim import STATUS_INFEASIBLE, SdpConstraint, SdpProblem, SdpSolution, solve_sdp
from theta import ThetaResult, lovasz_theta, orthonormal_representation, symmetrize_solution

logger = logging.getLogger(__name__)

LEVELS = ("1", "1+AB", "2")
# acima disso o complemento de Schur denso não cabe
MAX_DENSE_CONSTRAINTS = 6000
# folga abaixo de θ para o ponto final da curva (a face ω = θ não tem ponto interior)
THETA_MARGIN = 1e-6

_erratum_noted = False


# ---------------------------------------------------------------------------
# Cenário
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContextualityScenario:
    """
    Grafo + contextos (cliques maximais) + contexto de geração c*.
    ω = Σ_v w(v)⟨P_v⟩; na rodada de teste o contexto c sai com probabilidade
    1/K e o termo de score é ((Σ coef) − K·coef_c·∏A)/4.
    """
    graph: WeightedGraph
    contexts: tuple[tuple[int, ...], ...]
    star_index: int
    coefficients: tuple[float, ...]

    @property
    def star_context(self) -> tuple[int, ...]:
        return self.contexts[self.star_index]

    @property
    def n_contexts(self) -> int:
        return len(self.contexts)

    @property
    def eve_outcomes(self) -> int:
        """Um símbolo por projetor de c* mais o de completude."""
        return len(self.star_context) + 1

    @property
    def score_constant(self) -> float:
        return float(sum(self.coefficients))

    @cached_property
    def score_map(self) -> np.ndarray:
        return self.graph.float_weights()

    @cached_property
    def alpha(self) -> float:
        return float(weighted_independence_number(self.graph).value)

    @cached_property
    def theta(self) -> ThetaResult:
        return lovasz_theta(self.graph)

    def test_score(self, context: int, fired: bool) -> float:
        prod = -1.0 if fired else 1.0
        return (self.score_constant - self.n_contexts * self.coefficients[context] * prod) / 4.0

    def expression_value(self, vertex_probs) -> float:
        """⟨I⟩ = Σ_c coef_c ⟨∏A_c⟩ com ∏A_c = 1 − 2 Σ_{v∈c} P_v."""
        p = np.asarray(vertex_probs, dtype=float)
        return float(sum(c * (1.0 - 2.0 * p[list(ctx)].sum()) for c, ctx in zip(self.coefficients, self.contexts)))


def gd_scenario(d: int) -> ContextualityScenario:
    g = build_gd(d)
    contexts = tuple(c.members for c in enumerate_maximal_cliques(g))
    star = tuple(sorted(5 * i for i in range(d)))
    star_index = contexts.index(star)
    coefficients = tuple(2.0 if k == star_index else 1.0 for k in range(len(contexts)))
    logger.debug("[gd_scenario] d=%d: %d contextos, c* = %s", d, len(contexts), star)
    return ContextualityScenario(g, contexts, star_index, coefficients)


def _note_erratum(d: int) -> None:
    global _erratum_noted
    if not _erratum_noted:
        logger.warning(
            "[min_entropy_curve] score usa ((5d+2) − ⟨I_d⟩)/4 = ((%d) − ⟨I⟩)/4; a variante (5d+1) é tratada como erro de digitação",
            5 * d + 2,
        )
        _erratum_noted = True


# ---------------------------------------------------------------------------
# Relaxação de momentos
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentRelaxation:
    """
    Palavras sobre símbolos 0..n−1 (projetores do dispositivo) e n..n+d−1 (Eve).
    O símbolo de completude de Eve é 1 − ΣE e não aparece nas palavras.
    """
    scenario: ContextualityScenario
    level: str
    monomials: tuple[tuple[int, ...], ...]
    classes: dict = field(repr=False)
    zero_entries: tuple[tuple[int, int], ...] = field(repr=False)

    @property
    def matrix_dim(self) -> int:
        return len(self.monomials)

    @property
    def n_device(self) -> int:
        return self.scenario.graph.n_vertices

    def index(self, word: tuple[int, ...]) -> int:
        return self.monomials.index(word)

    def device_index(self, v: int) -> int:
        return self.index((v,))

    def eve_index(self, a: int) -> int:
        return self.index((self.n_device + a,))


def reduce_word(word, scenario: ContextualityScenario) -> tuple[int, ...] | None:
    """
    Operador reduzido: Eve comuta com o dispositivo e vai para a direita,
    P² = P, P_u P_v = 0 nas arestas, E_a E_b = δ_ab E_a. None = zero.
    """
    g = scenario.graph
    n = g.n_vertices
    dev: list[int] = []
    eve: set[int] = set()
    for s in word:
        if s >= n:
            eve.add(s)
            if len(eve) > 1:
                return None
            continue
        if dev and dev[-1] == s:
            continue
        if dev and g.has_edge(dev[-1], s):
            return None
        dev.append(s)
    return tuple(dev) + tuple(eve)


def normal_word(word, scenario: ContextualityScenario) -> tuple[int, ...] | None:
    """Chave do momento ⟨w⟩: a menor entre w e o reverso, pois a matriz é real simétrica."""
    reduced = reduce_word(word, scenario)
    if reduced is None:
        return None
    n = scenario.graph.n_vertices
    dev = tuple(s for s in reduced if s < n)
    eve = tuple(s for s in reduced if s >= n)
    return min(dev, dev[::-1]) + eve


def _monomials(scenario: ContextualityScenario, level: str) -> list[tuple[int, ...]]:
    n = scenario.graph.n_vertices
    n_eve = len(scenario.star_context)
    device = [(v,) for v in range(n)]
    eve = [(n + a,) for a in range(n_eve)]
    words = [()] + device + eve
    if level == "1+AB":
        words += [(v, n + a) for v in range(n) for a in range(n_eve)]
    elif level == "2":
        letters = device + eve
        words += [x + y for x in letters for y in letters]

    # linhas são operadores: w e o reverso continuam distintos
    seen: dict[tuple[int, ...], None] = {}
    for w in words:
        reduced = reduce_word(w, scenario)
        if reduced is not None:
            seen.setdefault(reduced, None)
    return list(seen)


def build_moment_relaxation(scenario: ContextualityScenario, level="1+AB") -> MomentRelaxation:
    level = str(level)
    if level not in LEVELS:
        raise InvalidParameterError(f"Nível não suportado: {level!r} (use {', '.join(LEVELS)})")
    monomials = _monomials(scenario, level)
    classes: dict[tuple[int, ...], list[tuple[int, int]]] = {}
    zeros = []
    for i, mi in enumerate(monomials):
        for j in range(i, len(monomials)):
            word = normal_word(mi[::-1] + monomials[j], scenario)
            if word is None:
                zeros.append((i, j))
            else:
                classes.setdefault(word, []).append((i, j))
    logger.debug(
        "[build_moment_relaxation] nível %s: %d monômios, %d classes, %d zeros",
        level, len(monomials), len(classes), len(zeros),
    )
    return MomentRelaxation(scenario, level, tuple(monomials), classes, tuple(zeros))


def _entry(p: int, q: int, coeff: float) -> tuple[int, int, int, float]:
    """Coeficiente c em X_pq vira (0, p, q, c/2) fora da diagonal, pois S é simétrica."""
    p, q = min(p, q), max(p, q)
    return (0, p, q, coeff if p == q else coeff / 2.0)


def _merge(terms) -> tuple[tuple[int, int, int, float], ...]:
    acc: dict[tuple[int, int], float] = {}
    for p, q, c in terms:
        key = (min(p, q), max(p, q))
        acc[key] = acc.get(key, 0.0) + c
    return tuple(_entry(p, q, c) for (p, q), c in sorted(acc.items()) if c != 0.0)


def _objective_terms(relax: MomentRelaxation) -> list[tuple[int, int, float]]:
    """Σ_a ⟨P_{s_a} E_a⟩ + ⟨(1 − ΣP_s)(1 − ΣE)⟩ em entradas de X."""
    star = relax.scenario.star_context
    terms = [(0, 0, 1.0)]
    for a in range(len(star)):
        terms.append((0, relax.eve_index(a), -1.0))
    for s in star:
        terms.append((0, relax.device_index(s), -1.0))
    for s in star:
        for a in range(len(star)):
            terms.append((relax.device_index(s), relax.eve_index(a), 1.0))
    for a, s in enumerate(star):
        terms.append((relax.device_index(s), relax.eve_index(a), 1.0))
    return terms


def _score_terms(relax: MomentRelaxation) -> list[tuple[int, int, float]]:
    w = relax.scenario.score_map
    return [(0, relax.device_index(v), float(w[v])) for v in range(relax.n_device)]


@dataclass(frozen=True)
class GuessingProgram:
    problem: SdpProblem
    relaxation: MomentRelaxation
    norm_row: int
    score_row: int


def build_guessing_sdp(scenario: ContextualityScenario, omega: float, level="1+AB",
                       relaxation: MomentRelaxation | None = None) -> GuessingProgram:
    """max p_guess sobre matrizes de momentos com ⟨score⟩ = ω."""
    if not math.isfinite(omega) or omega < 0:
        raise DomainError(f"ω deve ser finito e >= 0 (recebido {omega})")
    relax = relaxation or build_moment_relaxation(scenario, level)
    dim = relax.matrix_dim

    constraints = [SdpConstraint(((0, 0, 0, 1.0),), 1.0)]
    norm_row = 0
    for i, j in relax.zero_entries:
        constraints.append(SdpConstraint((_entry(i, j, 1.0),), 0.0))
    for members in relax.classes.values():
        first = members[0]
        for p, q in members[1:]:
            constraints.append(SdpConstraint(_merge([(p, q, 1.0), (first[0], first[1], -1.0)]), 0.0))
    score_row = len(constraints)
    constraints.append(SdpConstraint(_merge(_score_terms(relax)), float(omega)))

    G = np.zeros((dim, dim))
    for blk, p, q, val in _merge(_objective_terms(relax)):
        G[p, q] += val
        if p != q:
            G[q, p] += val
    problem = SdpProblem((dim,), (G,), tuple(constraints))
    return GuessingProgram(problem, relax, norm_row, score_row)


def deterministic_moment_matrix(relax: MomentRelaxation, assignment, eve_outcome: int | None = None) -> np.ndarray:
    """
    Matriz de momentos (posto 1) de uma estratégia determinística: P_v = 1 nos
    vértices de `assignment`, E_a = 1 só para o resultado de Eve. Por padrão Eve
    responde o projetor de c* que disparou (ou completude se nenhum).
    """
    scenario = relax.scenario
    n = scenario.graph.n_vertices
    on = np.zeros(n)
    on[list(assignment)] = 1.0
    star = scenario.star_context
    if eve_outcome is None:
        fired = [a for a, s in enumerate(star) if on[s]]
        eve_outcome = fired[0] if fired else len(star)

    def value(word) -> float:
        out = 1.0
        for s in word:
            out *= on[s] if s < n else float(s - n == eve_outcome)
        return out

    vals = np.array([value(m) for m in relax.monomials])
    return np.outer(vals, vals)


@dataclass(frozen=True)
class GuessingResult:
    omega: float
    p_guess: float
    multipliers: np.ndarray = field(repr=False)
    lambda_score: float
    lambda_norm: float
    status: str
    solution: SdpSolution | None = field(default=None, repr=False)


def guessing_probability(
    scenario: ContextualityScenario,
    omega: float,
    level="1+AB",
    tol: float = SOLVER_TOL,
    relaxation: MomentRelaxation | None = None,
) -> GuessingResult:
    prog = build_guessing_sdp(scenario, omega, level, relaxation)
    m = prog.problem.n_constraints
    if m > MAX_DENSE_CONSTRAINTS:
        raise InvalidParameterError(
            f"Nível {prog.relaxation.level} gera {m} restrições (> {MAX_DENSE_CONSTRAINTS}); grande demais para o solver denso"
        )
    sol = solve_sdp(prog.problem, tol)
    if sol.status == STATUS_INFEASIBLE or (not sol.ok and sol.primal_infeasibility > 1e-5):
        raise InfeasibleError(
            f"ω = {omega} inviável no nível {prog.relaxation.level} "
            f"(status={sol.status}, pinf={sol.primal_infeasibility:.2e})"
        )
    if not sol.ok:
        logger.warning(
            "[guessing_probability] ω=%.6g terminou com '%s' (gap=%.2e); usando o melhor iterado",
            omega, sol.status, sol.gap,
        )
    if sol.dual_value < sol.primal_value - 1e-6 * (1.0 + abs(sol.primal_value)):
        logger.warning("[guessing_probability] dualidade fraca violada: %.8g < %.8g", sol.dual_value, sol.primal_value)
    lam = np.asarray(sol.dual, dtype=float)
    res = GuessingResult(
        omega=float(omega),
        p_guess=float(sol.primal_value),
        multipliers=lam,
        lambda_score=float(lam[prog.score_row]),
        lambda_norm=float(lam[prog.norm_row]),
        status=sol.status,
        solution=sol,
    )
    logger.info("[guessing_probability] ω=%.6g nível %s: p_guess=%.8f", omega, prog.relaxation.level, res.p_guess)
    return res


# ---------------------------------------------------------------------------
# Funções de tradeoff e curva de min-entropia
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TradeoffFunction:
    """g(ω) = λ₀·ω + λ_norm majora p_guess; f(ω) = −log₂ g(ω)."""
    anchor: float
    lambda_score: float
    intercept: float
    p_guess_anchor: float = float("nan")

    def g(self, omega):
        return self.lambda_score * np.asarray(omega, dtype=float) + self.intercept

    def entropy(self, omega):
        gv = self.g(omega)
        if np.any(gv <= 0):
            raise DomainError(f"g(ω) <= 0 em ω={omega}: f indefinida")
        return -np.log2(gv)

    def derivative(self, omega):
        return -self.lambda_score / (self.g(omega) * math.log(2.0))


def tradeoff_from_result(res: GuessingResult) -> TradeoffFunction:
    return TradeoffFunction(res.omega, res.lambda_score, res.lambda_norm, res.p_guess)


def _clip_omega(scenario: ContextualityScenario, omega: float) -> float:
    top = scenario.theta.value - THETA_MARGIN
    return min(float(omega), top)


def min_tradeoff_family(
    scenario: ContextualityScenario, anchors, level="1+AB", tol: float = SOLVER_TOL
) -> list[TradeoffFunction]:
    relax = build_moment_relaxation(scenario, level)
    family = []
    for anchor in anchors:
        res = guessing_probability(scenario, _clip_omega(scenario, anchor), level, tol, relax)
        fn = tradeoff_from_result(res)
        gap = float(fn.g(res.omega)) - res.p_guess
        if abs(gap) > 1e-5:
            logger.warning("[min_tradeoff_family] âncora %.6g sem tangência: g − p_guess = %.2e", anchor, gap)
        family.append(fn)
    return family


def verify_tradeoff(fn: TradeoffFunction, omegas, p_guesses, tol: float = 1e-6) -> bool:
    g = fn.g(np.asarray(omegas, dtype=float))
    bad = np.asarray(p_guesses, dtype=float) - g > tol
    if np.any(bad):
        logger.warning("[verify_tradeoff] âncora %.6g abaixo da curva em ω=%s", fn.anchor, np.asarray(omegas)[bad].tolist())
    return not bool(np.any(bad))


def min_entropy_curve(
    scenario: ContextualityScenario,
    omega_grid,
    level="1+AB",
    tol: float = SOLVER_TOL,
    jobs: int = 1,
) -> pd.DataFrame:
    """Tabela (omega, p_guess, h_min, level), um SDP por ponto."""
    _note_erratum(len(scenario.star_context))
    relax = build_moment_relaxation(scenario, level)
    omegas = [_clip_omega(scenario, w) for w in omega_grid]

    def point(omega: float) -> GuessingResult:
        return guessing_probability(scenario, omega, level, tol, relax)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(point, omegas))
    else:
        results = [point(w) for w in omegas]

    df = pd.DataFrame(
        {
            "omega": [r.omega for r in results],
            "p_guess": [r.p_guess for r in results],
            "level": relax.level,
        }
    )
    df["h_min"] = -np.log2(df["p_guess"].clip(lower=1e-300, upper=1.0))
    df = df[["omega", "p_guess", "h_min", "level"]]
    if (df["h_min"].diff().dropna() < -1e-5).any():
        logger.warning("[min_entropy_curve] H_min não monótona no grid (nível %s)", relax.level)
    return df


# ---------------------------------------------------------------------------
# Dispositivos
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BehaviorSampler:
    """
    Probabilidade de disparo por vértice; no contexto c dispara v ∈ c com
    probabilidade p(v) e nenhum com 1 − Σ.
    """
    scenario: ContextualityScenario
    vertex_probs: np.ndarray = field(repr=False)
    name: str = "device"

    def __post_init__(self):
        p = np.asarray(self.vertex_probs, dtype=float)
        if p.shape != (self.scenario.graph.n_vertices,):
            raise InvalidParameterError(f"vertex_probs com forma {p.shape}")
        if np.any(p < -1e-6) or np.any(p > 1 + 1e-6):
            raise RecoveryError(f"Probabilidades fora de [0, 1]: min={p.min():.3e} max={p.max():.3e}")
        p = np.clip(p, 0.0, 1.0)
        for ctx in self.scenario.contexts:
            total = p[list(ctx)].sum()
            if total > 1 + 1e-4:
                raise RecoveryError(f"Contexto {ctx} com Σp = {total:.6f} > 1")
        object.__setattr__(self, "vertex_probs", p)

    def context_distribution(self, context: int) -> np.ndarray:
        members = list(self.scenario.contexts[context])
        probs = self.vertex_probs[members]
        total = probs.sum()
        if total > 1.0:
            probs = probs / total
            total = 1.0
        return np.append(probs, 1.0 - total)

    @cached_property
    def outcome_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """(cumulativas K×(L+1), vértices K×(L+1)) com −1 para 'nenhum' e preenchimento."""
        contexts = self.scenario.contexts
        width = max(len(c) for c in contexts) + 1
        cum = np.ones((len(contexts), width))
        verts = np.full((len(contexts), width), -1, dtype=int)
        for k, ctx in enumerate(contexts):
            dist = self.context_distribution(k)
            cum[k, : len(dist)] = np.cumsum(dist)
            cum[k, len(dist) - 1] = 1.0
            verts[k, : len(ctx)] = ctx
        return cum, verts


def behavior_score(behavior: BehaviorSampler) -> float:
    return float(np.dot(behavior.scenario.score_map, behavior.vertex_probs))


def honest_device_behavior(d: int = 3, tol: float = SOLVER_TOL) -> BehaviorSampler:
    """p(v) = |⟨ψ|v⟩|² a partir da solução θ simetrizada pelas trocas de bloco."""
    scenario = gd_scenario(d)
    g = scenario.graph
    r = lovasz_theta(g, tol)
    X = symmetrize_solution(r.moment_matrix, gd_block_swaps(d), g)
    sym = ThetaResult(r.value, X, tuple(float(x) for x in X[0, 1:]), r.solution)
    psi, units = orthonormal_representation(sym)
    probs = (units @ psi) ** 2
    behavior = BehaviorSampler(scenario, probs, "honest")
    score = behavior_score(behavior)
    if abs(score - r.value) > 1e-3:
        raise RecoveryError(f"Comportamento recuperado tem ω = {score:.6f}, esperado θ = {r.value:.6f}")
    logger.info(
        "[honest_device_behavior] d=%d ω=%.6f marginais c* = %s",
        d, score, np.round(probs[list(scenario.star_context)], 6).tolist(),
    )
    return behavior


def classical_device_behavior(d: int = 3) -> BehaviorSampler:
    """Estratégia determinística: dispara exatamente o conjunto independente máximo (ω = α)."""
    scenario = gd_scenario(d)
    witness = weighted_independence_number(scenario.graph).witness
    probs = np.zeros(scenario.graph.n_vertices)
    probs[list(witness)] = 1.0
    return BehaviorSampler(scenario, probs, "classical")


# ---------------------------------------------------------------------------
# Protocolo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProtocolConfig:
    n_rounds: int
    gamma: float
    omega_exp: float
    delta: float
    seed: int
    f_min: TradeoffFunction | None = None
    eps_s: float = 1e-6
    eps_ext: float = 1e-6
    eps_eat: float = 1e-6
    l_ext: int = 0

    def __post_init__(self):
        if int(self.n_rounds) != self.n_rounds or self.n_rounds < 1:
            raise InvalidParameterError(f"n_rounds deve ser inteiro >= 1 (recebido {self.n_rounds})")
        if not (0.0 < self.gamma <= 1.0):
            raise InvalidParameterError(f"γ deve estar em (0, 1] (recebido {self.gamma})")
        if self.delta <= 0:
            raise InvalidParameterError(f"δ deve ser > 0 (recebido {self.delta})")
        if self.l_ext < 0:
            raise InvalidParameterError(f"l_ext deve ser >= 0 (recebido {self.l_ext})")
        for name in ("eps_s", "eps_ext", "eps_eat"):
            if not (0.0 < getattr(self, name) < 1.0):
                raise InvalidParameterError(f"{name} deve estar em (0, 1)")


@dataclass(frozen=True)
class ProtocolTranscript:
    rounds: pd.DataFrame = field(repr=False)
    omega_obs: float
    aborted: bool
    certified_length: int
    n_test: int
    d: int

    def dump(self) -> str:
        return self.rounds[["round", "T", "input", "outputs", "score"]].to_csv(index=False)


def simulate_protocol(cfg: ProtocolConfig, device: BehaviorSampler) -> ProtocolTranscript:
    """
    Rodada de teste com probabilidade γ (contexto uniforme, termo de score);
    as demais medem c* e registram g(A_i): a ∈ 1..d se P_{a,1} disparou, 0 = rejeição.
    """
    scenario = device.scenario
    n = int(cfg.n_rounds)
    rng = np.random.default_rng(cfg.seed)
    test = rng.random(n) < cfg.gamma
    drawn = rng.integers(0, scenario.n_contexts, n)
    ctx = np.where(test, drawn, scenario.star_index)
    u = rng.random(n)

    cum, verts = device.outcome_tables
    pick = (u[:, None] >= cum[ctx]).sum(axis=1)
    pick = np.minimum(pick, cum.shape[1] - 1)
    fired = verts[ctx, pick]

    coef = np.asarray(scenario.coefficients)
    prod = np.where(fired >= 0, -1.0, 1.0)
    score = np.where(test, (scenario.score_constant - scenario.n_contexts * coef[ctx] * prod) / 4.0, 0.0)

    star = np.asarray(scenario.star_context)
    position = np.full(scenario.graph.n_vertices + 1, 0, dtype=int)
    position[star] = np.arange(1, len(star) + 1)
    symbol = np.where(test, -1, position[fired])  # fired = −1 cai na última posição, que vale 0

    omega_obs = float(score.sum() / (cfg.gamma * n))
    aborted = not (cfg.omega_exp - cfg.delta < omega_obs < cfg.omega_exp + cfg.delta)
    certified = 0
    if not aborted:
        if cfg.f_min is None:
            logger.info("[simulate_protocol] sem f_min: comprimento certificado fica 0")
        else:
            rate = float(cfg.f_min.entropy(cfg.omega_exp - cfg.delta))
            certified = max(0, int(math.floor(n * rate - cfg.l_ext)))

    rounds = pd.DataFrame(
        {
            "round": np.arange(1, n + 1),
            "T": test.astype(int),
            "input": ctx,
            "outputs": fired,
            "score": score,
            "symbol": symbol,
        }
    )
    logger.info(
        "[simulate_protocol] %s N=%d γ=%.3g: ω_obs=%.5f %s, certificado=%d",
        device.name, n, cfg.gamma, omega_obs, "ABORTA" if aborted else "aceita", certified,
    )
    return ProtocolTranscript(rounds, omega_obs, aborted, certified, int(test.sum()), len(star))


# ---------------------------------------------------------------------------
# Extração
# ---------------------------------------------------------------------------

def raw_bits(transcript: ProtocolTranscript) -> np.ndarray:
    """Símbolos de geração 1..d em ⌈log₂ d⌉ bits (big-endian); rejeições e testes ficam de fora."""
    width = max(1, math.ceil(math.log2(transcript.d)))
    symbols = transcript.rounds["symbol"].to_numpy()
    values = symbols[symbols >= 1] - 1
    shifts = np.arange(width - 1, -1, -1)
    return ((values[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def _as_bits(x, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.int64).ravel()
    if np.any((arr != 0) & (arr != 1)):
        raise InvalidParameterError(f"{what} deve conter só bits 0/1")
    return arr


def toeplitz_matrix(seed, n_raw: int, out_len: int) -> np.ndarray:
    """T[i, j] = seed[i + n − 1 − j]."""
    seed = _as_bits(seed, "seed")
    return toeplitz(seed[n_raw - 1 : n_raw - 1 + out_len], seed[:n_raw][::-1])


def toeplitz_extract(raw, seed, out_len: int, certified: int | None = None) -> np.ndarray:
    raw = _as_bits(raw, "raw")
    seed = _as_bits(seed, "seed")
    n = raw.shape[0]
    if out_len < 0:
        raise InvalidParameterError(f"out_len deve ser >= 0 (recebido {out_len})")
    if certified is not None and out_len > certified:
        raise InvalidParameterError(f"out_len {out_len} excede o comprimento certificado {certified}")
    if n == 0 or out_len == 0:
        return np.zeros(out_len, dtype=np.uint8)
    if seed.shape[0] != n + out_len - 1:
        raise InvalidParameterError(
            f"seed deve ter {n + out_len - 1} bits (raw {n} + out {out_len} − 1), recebidos {seed.shape[0]}"
        )
    conv = np.rint(fftconvolve(seed.astype(float), raw.astype(float))).astype(np.int64)
    return (conv[n - 1 : n - 1 + out_len] % 2).astype(np.uint8)
