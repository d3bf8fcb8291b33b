# theta.py
# Números de Lovász: θ via SDP, simetrização, forma analítica θ(C5,t) / θ(𝒢_d), θ'_ε e recuperação de vetores

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import minimize_scalar

from config import SOLVER_TOL
from combinat import fractional_packing_number
from errors import DomainError, InvalidParameterError, NumericError, RecoveryError
from graphs import EpsilonGraph, WeightedGraph, verify_automorphism
from optim import SdpConstraint, SdpProblem, SdpSolution, psd_factor, solve_sdp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThetaResult:
    value: float
    moment_matrix: np.ndarray = field(repr=False)
    per_vertex_contribution: tuple[float, ...] = field(repr=False)
    solution: SdpSolution | None = field(default=None, repr=False)


@dataclass
class EpsThetaResult:
    value: float
    X: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    recovered: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)
    solution: SdpSolution | None = field(default=None, repr=False)


def _require_optimal(sol: SdpSolution, what: str) -> None:
    if not sol.ok:
        raise NumericError(
            f"{what}: solver terminou com '{sol.status}' "
            f"(gap={sol.gap:.2e}, pinf={sol.primal_infeasibility:.2e}, dinf={sol.dual_infeasibility:.2e})"
        )


# ---------------------------------------------------------------------------
# θ(G, w) pelo programa com borda (|V|+1)
# ---------------------------------------------------------------------------

def theta_program(g: WeightedGraph) -> SdpProblem:
    """max Σ w_u X_{0u}  s.t.  X_uv = 0 nas arestas, X_00 = 1, X_uu = X_0u, X ⪰ 0."""
    n = g.n_vertices
    G = np.zeros((n + 1, n + 1))
    w = g.float_weights()
    G[0, 1:] = G[1:, 0] = w / 2
    constraints = [SdpConstraint(((0, 0, 0, 1.0),), 1.0)]
    for u in range(n):
        constraints.append(SdpConstraint(((0, 0, u + 1, -0.5), (0, u + 1, u + 1, 1.0)), 0.0))
    for u, v in g.sorted_edges():
        constraints.append(SdpConstraint(((0, u + 1, v + 1, 0.5),), 0.0))
    return SdpProblem((n + 1,), (G,), tuple(constraints))


def lovasz_theta(g: WeightedGraph, tol: float = SOLVER_TOL) -> ThetaResult:
    sol = solve_sdp(theta_program(g), tol)
    _require_optimal(sol, "lovasz_theta")
    X = sol.primal[0]
    contrib = tuple(float(x) for x in X[0, 1:])
    value = float(np.dot(g.float_weights(), X[0, 1:]))
    logger.info("[lovasz_theta] n=%d θ=%.10g", g.n_vertices, value)
    return ThetaResult(value, X, contrib, sol)


def _bordered(perm) -> np.ndarray:
    return np.concatenate(([0], np.asarray(perm, dtype=int) + 1))


def symmetrize_solution(
    X: np.ndarray,
    perms,
    g: WeightedGraph,
    max_rounds: int = 10_000,
    atol: float = 1e-15,
) -> np.ndarray:
    """
    Média de X sobre o grupo gerado pelas permutações (índice 0 fixo).
    A projeção de Reynolds é obtida iterando a média com os geradores até
    estabilizar; para a identidade sozinha X volta inalterada.
    """
    X = np.asarray(X, dtype=float)
    if X.shape != (g.n_vertices + 1, g.n_vertices + 1):
        raise InvalidParameterError(f"X com forma {X.shape} para grafo de {g.n_vertices} vértices")
    inverses = []
    for perm in perms:
        if not verify_automorphism(g, perm):
            raise InvalidParameterError(f"Permutação não é automorfismo: {tuple(perm)[:8]}...")
        inverses.append(np.argsort(_bordered(perm)))
    if not inverses:
        return X.copy()

    cur = X.copy()
    for _ in range(max_rounds):
        nxt = cur.copy()
        for inv in inverses:
            nxt += cur[np.ix_(inv, inv)]
        nxt /= len(inverses) + 1
        delta = float(np.max(np.abs(nxt - cur)))
        cur = nxt
        if delta <= atol * (1.0 + float(np.max(np.abs(cur)))):
            break
    else:
        logger.warning("[symmetrize_solution] média não estabilizou em %d rodadas", max_rounds)
    return cur


def orthonormal_representation(r: ThetaResult, rank_tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """(ψ, vetores unitários por vértice) a partir da matriz de momentos com borda."""
    vecs = psd_factor(r.moment_matrix, rank_tol)
    psi = vecs[0] / np.linalg.norm(vecs[0])
    units, _ = _normalize_rows(vecs[1:], rank_tol)
    dim = units.shape[1]
    if psi.shape[0] < dim:
        psi = np.concatenate((psi, np.zeros(dim - psi.shape[0])))
    return psi, units


def _normalize_rows(vecs: np.ndarray, rank_tol: float) -> tuple[np.ndarray, list[int]]:
    """
    Normaliza as linhas. Linhas de norma ~0 ganham eixos novos, ortogonais a tudo,
    o que mantém todas as restrições de ortogonalidade.
    """
    norms = np.linalg.norm(vecs, axis=1)
    tiny = [v for v, nv in enumerate(norms) if nv * nv <= rank_tol]
    out = np.zeros((vecs.shape[0], vecs.shape[1] + len(tiny)))
    for v, nv in enumerate(norms):
        if nv * nv > rank_tol:
            out[v, : vecs.shape[1]] = vecs[v] / nv
    for extra, v in enumerate(tiny):
        out[v, vecs.shape[1] + extra] = 1.0
    return out, tiny


# ---------------------------------------------------------------------------
# θ(C5, t) analítico e θ(𝒢_d)
# ---------------------------------------------------------------------------

def theta_c5_objective(x, t: float):
    x = np.asarray(x, dtype=float)
    q = np.maximum(-2.0 * x * x + 3.0 * x - 1.0, 0.0)
    return (
        5.0 / t
        - 1.0
        + (2.0 * (t - 1.0) / t) * x
        + ((t - 2.0) / t) / x
        + (2.0 * math.sqrt(t - 1.0) / t) * np.sqrt(q) / x
    )


def theta_c5_stationary_points(t: float) -> list[float]:
    """
    Pontos estacionários interiores em (1/2, 1). A derivada se anula quando
    √(t−1)(2−3x)/√q = (t−2) − 2(t−1)x², com q = −2x²+3x−1; elevando ao quadrado
    vira um polinômio de grau 6, e o sinal elimina as raízes espúrias.
    Para t >= 9 ficam 3/4 ± (1/4)√((t−9)/(t−1)).
    """
    if t < 3:
        raise DomainError(f"θ(C5,t) exige t >= 3 (recebido {t})")
    lhs = (t - 1.0) * Polynomial([2.0, -3.0]) ** 2
    q = Polynomial([-1.0, 3.0, -2.0])
    rhs_base = Polynomial([t - 2.0, 0.0, -2.0 * (t - 1.0)])
    roots = (lhs - q * rhs_base**2).roots()
    out = []
    for root in roots:
        if abs(root.imag) > 1e-7:
            continue
        x = float(root.real)
        if not (0.5 < x < 1.0):
            continue
        qx = q(x)
        if qx <= 0:
            continue
        left = math.sqrt(t - 1.0) * (2.0 - 3.0 * x) / math.sqrt(qx)
        right = rhs_base(x)
        if abs(left - right) <= 1e-6 * (1.0 + abs(right)):
            out.append(x)
    out = sorted(out)
    # raiz dupla (t = 9) aparece repetida
    dedup = [x for i, x in enumerate(out) if i == 0 or x - out[i - 1] > 1e-9]
    return dedup


def theta_c5_conditional(t: float) -> tuple[float, float]:
    """Máximo global da forma reduzida em x ∈ [1/2, 1]: (valor, argmax)."""
    if t < 3:
        raise DomainError(f"θ(C5,t) exige t >= 3 (recebido {t})")
    t = float(t)
    res = minimize_scalar(
        lambda x: -float(theta_c5_objective(x, t)),
        bounds=(0.5, 1.0),
        method="bounded",
        options={"xatol": 1e-12},
    )
    candidates = [0.5, 1.0, float(res.x)]
    # raízes do polinômio sem o filtro de sinal: candidatos extras só podem ajudar
    lhs = (t - 1.0) * Polynomial([2.0, -3.0]) ** 2
    q = Polynomial([-1.0, 3.0, -2.0])
    rhs_base = Polynomial([t - 2.0, 0.0, -2.0 * (t - 1.0)])
    for root in (lhs - q * rhs_base**2).roots():
        if abs(root.imag) <= 1e-7 and 0.5 <= root.real <= 1.0:
            candidates.append(float(root.real))
    values = [float(theta_c5_objective(x, t)) for x in candidates]
    k = int(np.argmax(values))
    return values[k], candidates[k]


def theta_gd_analytic(d: int) -> float:
    if d < 3:
        raise DomainError(f"θ(𝒢_d) analítico exige d >= 3 (recebido {d})")
    return d * theta_c5_conditional(d)[0]


def theta_odd_cycle_closed(n: int) -> float:
    if n < 3 or n % 2 == 0:
        raise DomainError(f"Fórmula fechada exige n ímpar >= 3 (recebido {n})")
    c = math.cos(math.pi / n)
    return n * c / (1.0 + c)


def amplification_precondition(g: WeightedGraph, tol: float = 1e-4) -> tuple[float, float, bool]:
    """α* = θ, condição para amplificação de aleatoriedade (só a checagem)."""
    alpha_star = fractional_packing_number(g).value
    theta = lovasz_theta(g).value
    return alpha_star, theta, abs(alpha_star - theta) <= tol


# ---------------------------------------------------------------------------
# θ'_ε (relaxação em dois blocos) e recuperação de vetores
# ---------------------------------------------------------------------------

def epsilon_theta_program(ge: EpsilonGraph) -> SdpProblem:
    """
    Bloco 0 = X (zero nas arestas estritas), bloco 1 = Y (zero nas estritas e ε),
    diag X = diag Y e Tr X = 1. Tr Y = 1 segue das duas últimas e não é repetida,
    senão o sistema fica linearmente dependente.
    """
    n = ge.n_vertices
    s = np.sqrt(np.array([float(w) for w in ge.weights]))
    root = ge.sqrt_epsilon
    G0 = root * np.outer(s, s)
    G1 = (1.0 - root) * np.outer(s, s)
    constraints = [SdpConstraint(tuple((0, v, v, 1.0) for v in range(n)), 1.0)]
    for v in range(n):
        constraints.append(SdpConstraint(((0, v, v, 1.0), (1, v, v, -1.0)), 0.0))
    for u, v in sorted(ge.strict_edges):
        constraints.append(SdpConstraint(((0, u, v, 0.5),), 0.0))
    for u, v in sorted(ge.strict_edges | ge.eps_edges):
        constraints.append(SdpConstraint(((1, u, v, 0.5),), 0.0))
    return SdpProblem((n, n), (G0, G1), tuple(constraints))


def epsilon_theta_relaxation(ge: EpsilonGraph, tol: float = SOLVER_TOL) -> EpsThetaResult:
    sol = solve_sdp(epsilon_theta_program(ge), tol)
    _require_optimal(sol, "epsilon_theta_relaxation")
    X, Y = sol.primal
    logger.info("[epsilon_theta_relaxation] n=%d ε=%.6g θ'_ε=%.10g", ge.n_vertices, float(ge.epsilon), sol.primal_value)
    return EpsThetaResult(sol.primal_value, X, Y, None, sol)


def recover_orthonormal_rep(
    r: EpsThetaResult, ge: EpsilonGraph, rank_tol: float = 1e-9
) -> tuple[np.ndarray, np.ndarray]:
    """
    Z = √ε·X + (1−√ε)·Y fatorada em vetores |v*⟩; |v⟩ = v*/‖v*‖ e
    ψ ∝ Σ √w(v)|v*⟩. Guarda o par em r.recovered.
    """
    root = ge.sqrt_epsilon
    Z = root * r.X + (1.0 - root) * r.Y
    vecs = psd_factor(Z, rank_tol)
    s = np.sqrt(np.array([float(w) for w in ge.weights]))
    psi = s @ vecs
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise RecoveryError("ψ nulo: soma ponderada dos vetores recuperados é zero")
    psi = psi / norm
    units, _ = _normalize_rows(vecs, rank_tol)
    psi = np.concatenate((psi, np.zeros(units.shape[1] - psi.shape[0])))
    r.recovered = (psi, units)
    return psi, units


def representation_certificate(ge: EpsilonGraph, psi: np.ndarray, units: np.ndarray) -> dict:
    """Maiores sobreposições nas arestas estritas / ε e o valor Σ w |⟨ψ|v⟩|²."""
    gram = units @ units.T
    strict = max((abs(gram[u, v]) for u, v in ge.strict_edges), default=0.0)
    eps_max = max((abs(gram[u, v]) for u, v in ge.eps_edges), default=0.0)
    w = np.array([float(x) for x in ge.weights])
    value = float(np.sum(w * (units @ psi) ** 2))
    return {"max_strict_overlap": float(strict), "max_eps_overlap": float(eps_max), "value": value}
