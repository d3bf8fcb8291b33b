# graphs.py
# Grafos de ortogonalidade ponderados: 𝒢_d, ciclos ímpares, expansão ε e formato texto

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational, Real

import networkx as nx
import numpy as np

from errors import InvalidDimensionError, InvalidParameterError

logger = logging.getLogger(__name__)

Edge = tuple[int, int]


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def as_fraction(x) -> Fraction:
    """Converte peso/ε para Fraction sem perder nada (floats viram a fração binária exata)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (Rational, int)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, Real):
        return Fraction(float(x))
    raise InvalidParameterError(f"Valor numérico inválido: {x!r}")


def _normalize_edges(edges, n_vertices: int, what: str = "aresta") -> frozenset[Edge]:
    out = set()
    for e in edges:
        u, v = (int(x) for x in e)
        if u == v:
            raise InvalidParameterError(f"{what} com laço em {u}")
        if not (0 <= u < n_vertices and 0 <= v < n_vertices):
            raise InvalidParameterError(f"{what} ({u}, {v}) fora de 0..{n_vertices - 1}")
        out.add((min(u, v), max(u, v)))
    return frozenset(out)


def _normalize_weights(weights, n_vertices: int) -> tuple[Fraction, ...]:
    ws = tuple(as_fraction(w) for w in weights)
    if len(ws) != n_vertices:
        raise InvalidParameterError(f"Esperados {n_vertices} pesos, recebidos {len(ws)}")
    for v, w in enumerate(ws):
        if w <= 0:
            raise InvalidParameterError(f"Peso do vértice {v} deve ser > 0 (recebido {w})")
    return ws


def _adjacency(n_vertices: int, edges) -> tuple[frozenset[int], ...]:
    adj: list[set[int]] = [set() for _ in range(n_vertices)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return tuple(frozenset(a) for a in adj)


# ---------------------------------------------------------------------------
# Tipos
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedGraph:
    n_vertices: int
    edges: frozenset[Edge]
    weights: tuple[Fraction, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n_vertices < 0:
            raise InvalidParameterError(f"n_vertices negativo: {self.n_vertices}")
        object.__setattr__(self, "edges", _normalize_edges(self.edges, self.n_vertices))
        object.__setattr__(self, "weights", _normalize_weights(self.weights, self.n_vertices))
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.n_vertices:
                raise InvalidParameterError("labels deve ter um rótulo por vértice")
            object.__setattr__(self, "labels", labels)

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        return _adjacency(self.n_vertices, self.edges)

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    def total_weight(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def float_weights(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_vertices))
        g.add_edges_from(self.edges)
        return g


@dataclass(frozen=True)
class EpsilonGraph:
    n_vertices: int
    strict_edges: frozenset[Edge]
    eps_edges: frozenset[Edge]
    weights: tuple[Fraction, ...]
    epsilon: Fraction
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "strict_edges", _normalize_edges(self.strict_edges, self.n_vertices))
        object.__setattr__(self, "eps_edges", _normalize_edges(self.eps_edges, self.n_vertices, "ε-aresta"))
        object.__setattr__(self, "weights", _normalize_weights(self.weights, self.n_vertices))
        eps = as_fraction(self.epsilon)
        if not (0 <= eps < 1):
            raise InvalidParameterError(f"ε deve estar em [0, 1) (recebido {float(eps)})")
        object.__setattr__(self, "epsilon", eps)
        both = self.strict_edges & self.eps_edges
        if both:
            raise InvalidParameterError(f"Arestas estritas e ε se sobrepõem: {sorted(both)[:3]}")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    @property
    def sqrt_epsilon(self) -> float:
        return float(np.sqrt(float(self.epsilon)))

    def strict_view(self) -> WeightedGraph:
        return WeightedGraph(self.n_vertices, self.strict_edges, self.weights, self.labels)

    def full_view(self) -> WeightedGraph:
        return WeightedGraph(self.n_vertices, self.strict_edges | self.eps_edges, self.weights, self.labels)


@dataclass(frozen=True, order=True)
class Clique:
    members: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(int(v) for v in self.members)))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v) -> bool:
        return v in self.members

    def is_clique_of(self, g: WeightedGraph) -> bool:
        ms = self.members
        return all(g.has_edge(ms[a], ms[b]) for a in range(len(ms)) for b in range(a + 1, len(ms)))


# ---------------------------------------------------------------------------
# Construções
# ---------------------------------------------------------------------------

def gd_vertex(i: int, j: int) -> int:
    """Índice de v_{i,j} (i, j começando em 1)."""
    return 5 * (i - 1) + (j - 1)


def build_gd(d: int) -> WeightedGraph:
    """𝒢_d: clique central {v_{i,1}} mais d cinco-ciclos; peso 2 em v_{i,1}, 1 no resto."""
    if int(d) != d or d < 3:
        raise InvalidDimensionError(f"build_gd exige d >= 3 (recebido {d})")
    d = int(d)
    edges = set()
    for i in range(1, d + 1):
        for k in range(i + 1, d + 1):
            edges.add((gd_vertex(i, 1), gd_vertex(k, 1)))
        for j in range(1, 6):
            edges.add((gd_vertex(i, j), gd_vertex(i, j % 5 + 1)))
    weights = [Fraction(2) if j == 1 else Fraction(1) for i in range(1, d + 1) for j in range(1, 6)]
    labels = [f"v_{{{i},{j}}}" for i in range(1, d + 1) for j in range(1, 6)]
    return WeightedGraph(5 * d, frozenset(edges), tuple(weights), tuple(labels))


def build_odd_cycle(n: int) -> WeightedGraph:
    if int(n) != n or n < 3 or n % 2 == 0:
        raise InvalidParameterError(f"Ciclo ímpar exige n ímpar >= 3 (recebido {n})")
    n = int(n)
    edges = frozenset((i, (i + 1) % n) for i in range(n))
    return WeightedGraph(n, edges, tuple(Fraction(1) for _ in range(n)))


def gd_block_swap(d: int, i: int, k: int) -> tuple[int, ...]:
    """Permutação que troca os blocos i e k de 𝒢_d (todas as posições j)."""
    perm = list(range(5 * d))
    for j in range(1, 6):
        a, b = gd_vertex(i, j), gd_vertex(k, j)
        perm[a], perm[b] = b, a
    return tuple(perm)


def gd_block_swaps(d: int) -> list[tuple[int, ...]]:
    return [gd_block_swap(d, i, k) for i in range(1, d + 1) for k in range(i + 1, d + 1)]


def cycle_rotation(n: int, shift: int = 1) -> tuple[int, ...]:
    return tuple((v + shift) % n for v in range(n))


# ---------------------------------------------------------------------------
# Cliques / expansão ε
# ---------------------------------------------------------------------------

def enumerate_maximal_cliques(g: WeightedGraph) -> list[Clique]:
    """Cliques maximais (Bron–Kerbosch com pivô do networkx), em ordem lexicográfica."""
    cliques = [Clique(tuple(c)) for c in nx.find_cliques(g.to_networkx())]
    return sorted(cliques)


def epsilon_expand(g: WeightedGraph, epsilon) -> EpsilonGraph:
    """
    Uma cópia v^(C) por par (vértice, clique maximal que o contém), peso w(v)/n_v.
    Cópias de vértices adjacentes ficam ligadas por aresta estrita quando estão
    no mesmo clique e por ε-aresta quando estão em cliques diferentes.
    """
    eps = as_fraction(epsilon)
    if not (0 <= eps < 1):
        raise InvalidParameterError(f"ε deve estar em [0, 1) (recebido {float(eps)})")

    cliques = enumerate_maximal_cliques(g)
    containing: list[list[int]] = [[] for _ in range(g.n_vertices)]
    for ci, c in enumerate(cliques):
        for v in c:
            containing[v].append(ci)

    copy_id: dict[tuple[int, int], int] = {}
    weights: list[Fraction] = []
    labels: list[str] = []
    for v in range(g.n_vertices):
        n_v = len(containing[v])
        for ci in containing[v]:
            copy_id[(v, ci)] = len(weights)
            weights.append(g.weights[v] / n_v)
            labels.append(f"{g.label(v)}^({ci})")

    strict, eps_edges = set(), set()
    for u, v in g.edges:
        for cu in containing[u]:
            for cv in containing[v]:
                pair = (copy_id[(u, cu)], copy_id[(v, cv)])
                (strict if cu == cv else eps_edges).add(pair)

    logger.debug(
        "[epsilon_expand] %d vértices -> %d cópias, %d estritas, %d ε-arestas",
        g.n_vertices, len(weights), len(strict), len(eps_edges),
    )
    return EpsilonGraph(len(weights), frozenset(strict), frozenset(eps_edges), tuple(weights), eps, tuple(labels))


def strict_and_full_views(ge: EpsilonGraph) -> tuple[WeightedGraph, WeightedGraph]:
    """(G', G''): só arestas estritas / estritas ∪ ε."""
    return ge.strict_view(), ge.full_view()


def verify_automorphism(g: WeightedGraph, perm) -> bool:
    perm = tuple(int(p) for p in perm)
    if len(perm) != g.n_vertices:
        raise InvalidParameterError(
            f"Permutação com {len(perm)} entradas para grafo de {g.n_vertices} vértices"
        )
    if sorted(perm) != list(range(g.n_vertices)):
        raise InvalidParameterError("perm não é uma bijeção dos vértices")
    if any(g.weights[v] != g.weights[perm[v]] for v in range(g.n_vertices)):
        return False
    mapped = {(min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in g.edges}
    return mapped == set(g.edges)


# ---------------------------------------------------------------------------
# Formato texto (graph / w / e / xe)
# ---------------------------------------------------------------------------

def _fmt_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def dump_graph(g: WeightedGraph | EpsilonGraph) -> str:
    if isinstance(g, EpsilonGraph):
        strict, eps_edges = sorted(g.strict_edges), sorted(g.eps_edges)
    else:
        strict, eps_edges = g.sorted_edges(), []
    lines = [f"graph {g.n_vertices} {len(strict)} {len(eps_edges)}"]
    if isinstance(g, EpsilonGraph):
        lines.append(f"eps {_fmt_fraction(g.epsilon)}")
    for v, w in enumerate(g.weights):
        lines.append(f"w {v} {_fmt_fraction(w)}")
    if g.labels is not None:
        lines.extend(f"l {v} {lab}" for v, lab in enumerate(g.labels))
    lines.extend(f"e {u} {v}" for u, v in strict)
    lines.extend(f"xe {u} {v}" for u, v in eps_edges)
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> WeightedGraph | EpsilonGraph:
    header = None
    weights: dict[int, Fraction] = {}
    labels: dict[int, str] = {}
    strict, eps_edges = [], []
    epsilon = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tag, *rest = line.split()
        try:
            if tag == "graph":
                header = tuple(int(x) for x in rest)
            elif tag == "eps":
                epsilon = Fraction(rest[0])
            elif tag == "w":
                weights[int(rest[0])] = Fraction(rest[1])
            elif tag == "l":
                # o rótulo vai até o fim da linha, espaços inclusos
                v, _, lab = raw.lstrip().partition(" ")[2].partition(" ")
                labels[int(v)] = lab
            elif tag == "e":
                strict.append((int(rest[0]), int(rest[1])))
            elif tag == "xe":
                eps_edges.append((int(rest[0]), int(rest[1])))
            else:
                raise InvalidParameterError(f"Linha {lineno}: tag desconhecida {tag!r}")
        except (IndexError, ValueError, ZeroDivisionError) as e:
            raise InvalidParameterError(f"Linha {lineno} mal formada: {raw!r} ({e})") from e

    if header is None or len(header) != 3:
        raise InvalidParameterError("Cabeçalho 'graph <n> <m_strict> <m_eps>' ausente")
    n, m_strict, m_eps = header
    if len(strict) != m_strict or len(eps_edges) != m_eps:
        raise InvalidParameterError(
            f"Contagem de arestas não bate com o cabeçalho ({len(strict)}/{m_strict}, {len(eps_edges)}/{m_eps})"
        )
    if sorted(weights) != list(range(n)):
        raise InvalidParameterError("Faltam linhas 'w' para alguns vértices")
    ws = tuple(weights[v] for v in range(n))
    labs = tuple(labels[v] for v in range(n)) if labels else None

    if epsilon is None and not eps_edges:
        return WeightedGraph(n, frozenset(strict), ws, labs)
    return EpsilonGraph(n, frozenset(strict), frozenset(eps_edges), ws, epsilon or Fraction(0), labs)
