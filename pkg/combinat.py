# combinat.py
# Cotas clássicas exatas: α (branch-and-bound), α* (LP de empacotamento) e cota ε-ONC

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from errors import NumericError
from graphs import EpsilonGraph, WeightedGraph, enumerate_maximal_cliques, strict_and_full_views
from optim import LpProblem, solve_lp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IndependenceResult:
    value: Fraction
    witness: tuple[int, ...]


@dataclass(frozen=True)
class PackingResult:
    value: float
    assignment: tuple[float, ...]


def is_independent(g: WeightedGraph, vertices) -> bool:
    vs = sorted(set(vertices))
    return all(not g.has_edge(vs[a], vs[b]) for a in range(len(vs)) for b in range(a + 1, len(vs)))


# ---------------------------------------------------------------------------
# α(G, w): branch-and-bound sobre bitmasks
# ---------------------------------------------------------------------------

def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def weighted_independence_number(g: WeightedGraph) -> IndependenceResult:
    """
    Conjunto independente de peso máximo, exato. Pesos racionais são escalados
    para inteiros; a cota é uma cobertura gulosa por cliques (soma do maior
    peso de cada clique) e o ramo é o vértice de maior grau, empate no menor índice.
    """
    n = g.n_vertices
    if n == 0:
        return IndependenceResult(Fraction(0), ())

    scale = math.lcm(*(w.denominator for w in g.weights))
    iw = [int(w * scale) for w in g.weights]
    adj = [0] * n
    for u, v in g.edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    # sementes da cobertura: peso decrescente, índice crescente
    order = sorted(range(n), key=lambda v: (-iw[v], v))

    def cover_bound(cand: int) -> int:
        bound = 0
        rest = cand
        for v in order:
            if not (rest >> v) & 1:
                continue
            bound += iw[v]
            rest &= ~(1 << v)
            common = adj[v] & rest
            for u in order:
                if not common:
                    break
                if (common >> u) & 1:
                    rest &= ~(1 << u)
                    common &= adj[u]
        return bound

    best_w = -1
    best_set = 0
    nodes = 0

    def search(cand: int, cur_w: int, cur_set: int) -> None:
        nonlocal best_w, best_set, nodes
        nodes += 1
        if cand == 0:
            if cur_w > best_w:
                best_w, best_set = cur_w, cur_set
            return
        if cur_w + cover_bound(cand) <= best_w:
            return
        branch, branch_deg = -1, -1
        for v in _bits(cand):
            deg = (adj[v] & cand).bit_count()
            if deg > branch_deg:
                branch, branch_deg = v, deg
        if branch_deg == 0:
            total = cur_w + sum(iw[v] for v in _bits(cand))
            if total > best_w:
                best_w, best_set = total, cur_set | cand
            return
        bit = 1 << branch
        search(cand & ~adj[branch] & ~bit, cur_w + iw[branch], cur_set | bit)
        search(cand & ~bit, cur_w, cur_set)

    search((1 << n) - 1, 0, 0)
    logger.debug("[weighted_independence_number] n=%d, %d nós explorados", n, nodes)
    return IndependenceResult(Fraction(best_w, scale), tuple(_bits(best_set)))


# ---------------------------------------------------------------------------
# α*(G, w): LP de empacotamento fracionário
# ---------------------------------------------------------------------------

def fractional_packing_number(g: WeightedGraph, tol: float = 1e-9) -> PackingResult:
    """max Σ w_v p_v  s.t.  Σ_{v∈C} p_v <= 1 para todo clique maximal C, 0 <= p <= 1."""
    n = g.n_vertices
    if n == 0:
        return PackingResult(0.0, ())
    cliques = enumerate_maximal_cliques(g)
    incidence = np.zeros((len(cliques), n))
    for row, c in enumerate(cliques):
        incidence[row, list(c)] = 1.0
    res = solve_lp(LpProblem(g.float_weights(), incidence, np.ones(len(cliques)), np.ones(n)), tol)
    if res.status != "optimal":
        raise NumericError(f"LP de empacotamento não convergiu ({res.status})")
    p = np.clip(res.x, 0.0, 1.0)
    return PackingResult(res.value, tuple(float(x) for x in p))


# ---------------------------------------------------------------------------
# Cota ε-ONC
# ---------------------------------------------------------------------------

def epsilon_independence_bound(ge: EpsilonGraph) -> Fraction:
    """ε·α(G') + (1−ε)·α(G''), exato em ε racional. É uma cota superior de α_ε."""
    strict, full = strict_and_full_views(ge)
    a_strict = weighted_independence_number(strict).value
    a_full = weighted_independence_number(full).value
    eps = ge.epsilon
    return eps * a_strict + (1 - eps) * a_full
