# epsmodels.py
# Modelos ε-ONC: limiar de ciclos ímpares, leque de qubits e modelos de variáveis ocultas (KS, Bell-Mermin)

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from combinat import epsilon_independence_bound
from errors import DomainError, InvalidParameterError, RecoveryError
from graphs import EpsilonGraph
from theta import (
    epsilon_theta_relaxation,
    lovasz_theta,
    recover_orthonormal_rep,
    representation_certificate,
    theta_odd_cycle_closed,
)

logger = logging.getLogger(__name__)

HV_MODELS = ("ks", "bell-mermin")
MIN_SAMPLES = 10_000
# tamanho fixo de shard: o resultado não depende de quantos workers rodam
SHARD_SIZE = 1 << 16


# ---------------------------------------------------------------------------
# Leque de qubits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QubitFan:
    """Vetores |v_k^b⟩ na ordem v_1^0, v_1^1, v_2^0, ... (índice 2(k−1)+b)."""
    n: int
    vectors: np.ndarray = field(repr=False)
    epsilon: float

    def index(self, k: int, b: int) -> int:
        return 2 * (k - 1) + b

    def projector_sum(self) -> np.ndarray:
        return np.einsum("ia,ib->ab", self.vectors, self.vectors)


def qubit_fan(n: int) -> QubitFan:
    if n < 2:
        raise DomainError(f"O leque de qubits exige n >= 2 (recebido {n})")
    vecs = np.zeros((2 * n, 2))
    for k in range(1, n + 1):
        a = k * math.pi / (2 * n)
        vecs[2 * (k - 1)] = (math.cos(a), math.sin(a))
        vecs[2 * (k - 1) + 1] = (-math.sin(a), math.cos(a))
    return QubitFan(n, vecs, math.sin(math.pi / (2 * n)) ** 2)


def qubit_fan_edges(n: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """(estritas, ε): v_k^0 ⟂ v_k^1; ε entre v_k^b e v_{k+1}^{1−b} e nos pares de volta."""
    idx = lambda k, b: 2 * (k - 1) + b  # noqa: E731
    strict = [(idx(k, 0), idx(k, 1)) for k in range(1, n + 1)]
    eps = []
    for k in range(1, n):
        eps.append((idx(k, 0), idx(k + 1, 1)))
        eps.append((idx(k, 1), idx(k + 1, 0)))
    eps.append((idx(n, 0), idx(1, 0)))
    eps.append((idx(n, 1), idx(1, 1)))
    return strict, eps


def qubit_fan_graph(fan: QubitFan) -> EpsilonGraph:
    strict, eps = qubit_fan_edges(fan.n)
    labels = tuple(f"v_{k}^{b}" for k in range(1, fan.n + 1) for b in (0, 1))
    return EpsilonGraph(
        2 * fan.n, frozenset(strict), frozenset(eps), tuple(Fraction(1) for _ in range(2 * fan.n)),
        Fraction(fan.epsilon), labels,
    )


def qubit_contextuality_gap(n: int) -> tuple[float, float]:
    """(valor quântico n, cota ε-ONC n−1+ε); o valor quântico é checado pela completude Σ P = n·I."""
    fan = qubit_fan(n)
    if n == 2:
        logger.warning("[qubit_contextuality_gap] n=2 dá ε=1/2, fora do intervalo (0, 1/2) do teorema")
    total = fan.projector_sum()
    if not np.allclose(total, n * np.eye(2), atol=1e-12, rtol=0.0):
        raise RecoveryError(f"Σ projetores != n·I para n={n}: {total.tolist()}")
    bound = float(epsilon_independence_bound(qubit_fan_graph(fan)))
    return float(n), bound


def qubit_fan_relaxation(n: int, tol: float | None = None) -> dict:
    """
    θ'_ε do leque contra θ(G'') <= θ'_ε <= √ε·θ(G') + (1−√ε)·θ(G''),
    mais o certificado dos vetores recuperados.
    """
    ge = qubit_fan_graph(qubit_fan(n))
    kwargs = {} if tol is None else {"tol": tol}
    theta_strict = lovasz_theta(ge.strict_view(), **kwargs).value
    theta_full = lovasz_theta(ge.full_view(), **kwargs).value
    r = epsilon_theta_relaxation(ge, **kwargs)
    root = ge.sqrt_epsilon
    upper = root * theta_strict + (1.0 - root) * theta_full
    psi, units = recover_orthonormal_rep(r, ge)
    cert = representation_certificate(ge, psi, units)
    return {
        "n": n,
        "epsilon": float(ge.epsilon),
        "theta_strict": theta_strict,
        "theta_full": theta_full,
        "theta_eps": r.value,
        "upper": upper,
        "sandwich_ok": theta_full - 1e-5 <= r.value <= upper + 1e-5,
        "max_strict_overlap": cert["max_strict_overlap"],
        "max_eps_overlap": cert["max_eps_overlap"],
    }


# ---------------------------------------------------------------------------
# Ciclos ímpares
# ---------------------------------------------------------------------------

def odd_cycle_threshold(n: int) -> float:
    """Maior ε com θ(C_n) > α_ε(C_{n,ε}): 1 − n·tan²(π/2n). Em n = 3 dá 0."""
    if n < 3 or n % 2 == 0:
        raise DomainError(f"Limiar exige n ímpar >= 3 (recebido {n})")
    return 1.0 - n * math.tan(math.pi / (2 * n)) ** 2


def cycle_eps_bound(n: int, epsilon: float) -> float:
    """α_ε(C_{n,ε}) = (n−1+ε)/2."""
    return (n - 1 + epsilon) / 2.0


def min_cycle_length(epsilon: float) -> int:
    """Menor n ímpar >= ⌈π²/(4(1−ε))⌉, suficiente para θ(C_n) > α_ε."""
    if not (0 <= epsilon < 1):
        raise DomainError(f"ε deve estar em [0, 1) (recebido {epsilon})")
    n = max(3, math.ceil(math.pi**2 / (4.0 * (1.0 - epsilon))))
    return n if n % 2 else n + 1


def threshold_table(n_max: int) -> list[dict]:
    rows = []
    for n in range(3, n_max + 1, 2):
        eps = odd_cycle_threshold(n)
        rows.append(
            {
                "n": n,
                "theta": theta_odd_cycle_closed(n),
                "alpha_eps_at_threshold": cycle_eps_bound(n, eps),
                "threshold": eps,
            }
        )
    return rows


def qubit_gap_table(n_max: int) -> list[dict]:
    rows = []
    for n in range(2, n_max + 1):
        quantum, bound = qubit_contextuality_gap(n)
        rows.append({"n": n, "epsilon": qubit_fan(n).epsilon, "quantum": quantum, "classical_bound": bound})
    return rows


# ---------------------------------------------------------------------------
# Modelos de variáveis ocultas
# ---------------------------------------------------------------------------

def _check_angle(theta_c: float) -> None:
    if not (0.0 < theta_c <= math.pi / 2):
        raise DomainError(f"θ_c deve estar em (0, π/2] (recebido {theta_c})")


def ks_model_agreement(theta_c: float) -> tuple[float, float]:
    """(probabilidade do modelo, sobreposição) = (1/2 − cos²θ_c/2, 1/2 − cosθ_c/2)."""
    _check_angle(theta_c)
    c = math.cos(theta_c)
    return 0.5 - 0.5 * c * c, 0.5 - 0.5 * c


def bell_mermin_agreement(theta_c: float) -> tuple[float, float]:
    """(sinθ_c, sin²θ_c)."""
    _check_angle(theta_c)
    s = math.sin(theta_c)
    return s, s * s


def _ks_shard(theta_c: float, size: int, seed: np.random.SeedSequence) -> int:
    """
    λ com densidade (1/π)(ψ·λ)⁺, ψ = ẑ: cosseno polar = √U (CDF inversa) e
    azimute uniforme. Conta λ além do ângulo polar π/2 − θ_c, do lado de φ (λ_x > 0).
    """
    rng = np.random.default_rng(seed)
    cos_polar = np.sqrt(rng.random(size))
    azimuth = rng.uniform(0.0, 2.0 * np.pi, size)
    hit = (cos_polar < math.sin(theta_c)) & (np.cos(azimuth) > 0.0)
    return int(np.count_nonzero(hit))


def _bell_mermin_shard(theta_c: float, size: int, seed: np.random.SeedSequence) -> int:
    """λ uniforme na esfera; valor 1 para φ sse φ·(ψ+λ) > 0. Conta os λ em que φ e φ' concordam."""
    rng = np.random.default_rng(seed)
    lam = rng.standard_normal((size, 3))
    lam /= np.linalg.norm(lam, axis=1, keepdims=True)
    psi = np.array([0.0, 0.0, 1.0])
    phi = np.array([math.cos(theta_c), 0.0, math.sin(theta_c)])
    phi_p = np.array([-math.cos(theta_c), 0.0, math.sin(theta_c)])
    shifted = lam + psi
    same = (shifted @ phi > 0.0) == (shifted @ phi_p > 0.0)
    return int(np.count_nonzero(same))


def monte_carlo_hv_check(
    model: str,
    theta_c: float,
    samples: int,
    seed: int,
    jobs: int = 1,
) -> tuple[float, float]:
    """Estimativa (média, erro padrão) da probabilidade de concordância do modelo."""
    if model not in HV_MODELS:
        raise InvalidParameterError(f"Modelo desconhecido: {model!r} (use {', '.join(HV_MODELS)})")
    if samples < MIN_SAMPLES:
        raise InvalidParameterError(f"samples deve ser >= {MIN_SAMPLES} (recebido {samples})")
    _check_angle(theta_c)

    sizes = [SHARD_SIZE] * (samples // SHARD_SIZE)
    if samples % SHARD_SIZE:
        sizes.append(samples % SHARD_SIZE)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    shard = _ks_shard if model == "ks" else _bell_mermin_shard

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            counts = list(pool.map(lambda args: shard(theta_c, *args), zip(sizes, seeds)))
    else:
        counts = [shard(theta_c, size, s) for size, s in zip(sizes, seeds)]

    p = sum(counts) / samples
    std_error = math.sqrt(max(p * (1.0 - p), 0.0) / samples)
    logger.info("[monte_carlo_hv_check] %s θ_c=%.6g: %.6f ± %.6f (%d amostras)", model, theta_c, p, std_error, samples)
    return p, std_error


def hv_table(theta_grid, samples: int | None = None, seed: int | None = None, jobs: int = 1) -> list[dict]:
    rows = []
    for theta_c in theta_grid:
        ks_model, ks_overlap = ks_model_agreement(theta_c)
        bm_model, bm_overlap = bell_mermin_agreement(theta_c)
        row = {
            "theta_c": theta_c,
            "ks_model": ks_model,
            "ks_overlap": ks_overlap,
            "bm_model": bm_model,
            "bm_overlap": bm_overlap,
        }
        if samples:
            row["ks_mc"], row["ks_mc_se"] = monte_carlo_hv_check("ks", theta_c, samples, seed, jobs)
            row["bm_mc"], row["bm_mc_se"] = monte_carlo_hv_check("bell-mermin", theta_c, samples, seed, jobs)
        rows.append(row)
    return rows
