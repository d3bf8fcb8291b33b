# attacks.py
# Arranjos com sinal: paridade mágica, realizações não perturbativas, transporte de sinais,
# levantamento por menor topológico e o ataque de contexto determinístico

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import networkx as nx
import numpy as np

from errors import InvalidArrangementError, InvalidParameterError
from graphs import WeightedGraph

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
TARGETS = ("magic-square", "pentagram")

Table = dict[tuple[int, ...], Fraction]


# ---------------------------------------------------------------------------
# Tipos
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignedArrangement:
    """Hipergrafo conexo, cada vértice em exatamente duas hiperarestas, rótulos ±1."""
    n_vertices: int
    hyperedges: tuple[tuple[int, ...], ...]
    labels: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        hyperedges = tuple(tuple(int(v) for v in e) for e in self.hyperedges)
        labels = tuple(int(x) for x in self.labels)
        object.__setattr__(self, "hyperedges", hyperedges)
        object.__setattr__(self, "labels", labels)
        if len(labels) != len(hyperedges):
            raise InvalidArrangementError(f"{len(hyperedges)} hiperarestas e {len(labels)} rótulos")
        if any(x not in (1, -1) for x in labels):
            raise InvalidArrangementError(f"Rótulos devem ser ±1: {labels}")
        count = [0] * self.n_vertices
        for k, e in enumerate(hyperedges):
            if not e or len(set(e)) != len(e):
                raise InvalidArrangementError(f"Hiperaresta {k} vazia ou com vértice repetido: {e}")
            for v in e:
                if not (0 <= v < self.n_vertices):
                    raise InvalidArrangementError(f"Vértice {v} fora de 0..{self.n_vertices - 1}")
                count[v] += 1
        bad = [v for v, c in enumerate(count) if c != 2]
        if bad:
            raise InvalidArrangementError(f"Vértices fora de exatamente duas hiperarestas: {bad[:5]}")
        if hyperedges and not nx.is_connected(_hyperedge_graph(self)):
            raise InvalidArrangementError("Arranjo não é conexo")

    @property
    def n_hyperedges(self) -> int:
        return len(self.hyperedges)

    def containing(self, v: int) -> tuple[int, int]:
        a, b = (k for k, e in enumerate(self.hyperedges) if v in e)
        return a, b

    def shared_vertex(self, i: int, j: int) -> int:
        common = sorted(set(self.hyperedges[i]) & set(self.hyperedges[j]))
        if not common:
            raise InvalidArrangementError(f"Hiperarestas {i} e {j} não se intersectam")
        return common[0]

    def parity(self) -> int:
        return int(np.prod(self.labels))

    def with_labels(self, labels) -> "SignedArrangement":
        return SignedArrangement(self.n_vertices, self.hyperedges, tuple(labels), self.name)


@dataclass(frozen=True)
class NdRealization:
    """Uma tabela p(o_e | e) por hiperaresta; chaves na ordem dos vértices da hiperaresta."""
    tables: tuple[Table, ...] = field(repr=False)

    def marginal(self, a: SignedArrangement, e: int, v: int) -> Fraction:
        """p(o_e(v) = +1 | e)."""
        pos = a.hyperedges[e].index(v)
        return sum((p for key, p in self.tables[e].items() if key[pos] == 1), Fraction(0))


@dataclass(frozen=True)
class MinorEmbedding:
    """φ: hiperarestas de H -> hiperarestas do alvo; cada aresta (i, j) de H, i < j, vira um caminho φ(i) ... φ(j)."""
    vertex_map: tuple[int, ...]
    paths: dict[tuple[int, int], tuple[int, ...]] = field(repr=False)


@dataclass(frozen=True)
class AttackResult:
    target: SignedArrangement
    context: int
    embedding: MinorEmbedding
    realization: NdRealization = field(repr=False)
    predictions: dict[int, int]


# ---------------------------------------------------------------------------
# Construções
# ---------------------------------------------------------------------------

def k22_arrangement() -> SignedArrangement:
    # e1={v1,v2}, e2={v3,v4}, e3={v1,v3}, e4={v2,v4}; e4 com −1
    return SignedArrangement(4, ((0, 1), (2, 3), (0, 2), (1, 3)), (1, 1, 1, -1), "K22")


def k3_arrangement() -> SignedArrangement:
    # f1={u1,u2}, f2={u1,u3}, f3={u2,u3}; f3 com −1
    return SignedArrangement(3, ((0, 1), (0, 2), (1, 2)), (1, 1, -1), "K3")


def magic_square() -> SignedArrangement:
    """Células 3r+c; hiperarestas 0..2 = linhas, 3..5 = colunas; a última coluna vale −1."""
    rows = tuple(tuple(3 * r + c for c in range(3)) for r in range(3))
    cols = tuple(tuple(3 * r + c for r in range(3)) for c in range(3))
    return SignedArrangement(9, rows + cols, (1, 1, 1, 1, 1, -1), "magic-square")


def magic_pentagram() -> SignedArrangement:
    """Pontos = pares {i, j} de retas (ordem lexicográfica); reta k = pontos que contêm k; a última vale −1."""
    points = list(combinations(range(5), 2))
    lines = tuple(tuple(p for p, pair in enumerate(points) if k in pair) for k in range(5))
    return SignedArrangement(10, lines, (1, 1, 1, 1, -1), "pentagram")


def target_arrangement(name: str) -> SignedArrangement:
    if name == "magic-square":
        return magic_square()
    if name == "pentagram":
        return magic_pentagram()
    raise InvalidParameterError(f"Alvo desconhecido: {name!r} (use {', '.join(TARGETS)})")


def _hyperedge_graph(a: SignedArrangement) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(len(a.hyperedges)))
    sets = [set(e) for e in a.hyperedges]
    for i, j in combinations(range(len(sets)), 2):
        if sets[i] & sets[j]:
            g.add_edge(i, j)
    return g


def intersection_graph(a: SignedArrangement) -> WeightedGraph:
    """Vértices = hiperarestas, arestas = vértices compartilhados, rótulo = rótulo da hiperaresta."""
    g = _hyperedge_graph(a)
    return WeightedGraph(
        a.n_hyperedges,
        frozenset(g.edges()),
        tuple(Fraction(1) for _ in range(a.n_hyperedges)),
        tuple(f"{x:+d}" for x in a.labels),
    )


def is_magic(a: SignedArrangement) -> bool:
    return a.parity() == -1


# ---------------------------------------------------------------------------
# Realizações
# ---------------------------------------------------------------------------

def _pair_table(same: bool) -> Table:
    if same:
        return {(1, 1): HALF, (-1, -1): HALF}
    return {(1, -1): HALF, (-1, 1): HALF}


def base_realizations() -> tuple[tuple[SignedArrangement, NdRealization], tuple[SignedArrangement, NdRealization]]:
    """Tabelas 1/2 de K22 e K3: pares iguais nas hiperarestas +1, opostos na −1."""
    k22 = k22_arrangement()
    k3 = k3_arrangement()
    r22 = NdRealization(tuple(_pair_table(label == 1) for label in k22.labels))
    r3 = NdRealization(tuple(_pair_table(label == 1) for label in k3.labels))
    return (k22, r22), (k3, r3)


def verify_nd_realization(a: SignedArrangement, r: NdRealization, tol: float = 0.0) -> tuple[bool, str | None]:
    """Normalização, suporte na paridade do rótulo e marginais iguais nas duas hiperarestas de cada vértice."""
    if len(r.tables) != a.n_hyperedges:
        raise InvalidArrangementError(f"{len(r.tables)} tabelas para {a.n_hyperedges} hiperarestas")
    for e, (table, verts) in enumerate(zip(r.tables, a.hyperedges)):
        for key in table:
            if len(key) != len(verts) or any(o not in (1, -1) for o in key):
                raise InvalidArrangementError(f"Chave {key} incompatível com a hiperaresta {e} {verts}")

    for e, table in enumerate(r.tables):
        total = sum(table.values())
        if abs(total - 1) > tol:
            return False, f"hiperaresta {e}: soma {total} != 1"
        for key, p in table.items():
            if p < -tol:
                return False, f"hiperaresta {e}: probabilidade negativa {p} em {key}"
            if abs(p) > tol and int(np.prod(key)) != a.labels[e]:
                return False, f"hiperaresta {e}: suporte {key} viola o rótulo {a.labels[e]:+d}"
    for v in range(a.n_vertices):
        e1, e2 = a.containing(v)
        m1, m2 = r.marginal(a, e1, v), r.marginal(a, e2, v)
        if abs(m1 - m2) > tol:
            return False, f"vértice {v}: marginal {m1} em {e1} != {m2} em {e2}"
    return True, None


def _flip_path(a: SignedArrangement, pair: tuple[int, int]) -> list[tuple[int, int, int]]:
    """Pivôs (e_i, e_{i+1}, v_i) de um caminho de hiperarestas entre as duas do par."""
    i, j = pair
    if i == j or not (0 <= i < a.n_hyperedges and 0 <= j < a.n_hyperedges):
        raise InvalidArrangementError(f"Par de hiperarestas inválido: {pair}")
    try:
        path = nx.shortest_path(_hyperedge_graph(a), i, j)
    except nx.NetworkXNoPath as exc:
        raise InvalidArrangementError(f"Sem caminho entre {i} e {j}") from exc
    return [(x, y, a.shared_vertex(x, y)) for x, y in zip(path, path[1:])]


def _negate(table: Table, pos: int) -> Table:
    out: Table = {}
    for key, p in table.items():
        k = list(key)
        k[pos] = -k[pos]
        out[tuple(k)] = p
    return out


def flip_labels_along_path(
    a: SignedArrangement, r: NdRealization, pair: tuple[int, int]
) -> tuple[SignedArrangement, NdRealization]:
    """
    Troca o sinal das duas hiperarestas do par. Em cada pivô v_i entre e_i e
    e_{i+1} nega a coordenada de v_i nas duas tabelas e os dois rótulos; os
    intermediários trocam duas vezes e ficam como estavam.
    """
    labels = list(a.labels)
    tables = [dict(t) for t in r.tables]
    for x, y, v in _flip_path(a, pair):
        for e in (x, y):
            labels[e] = -labels[e]
            tables[e] = _negate(tables[e], a.hyperedges[e].index(v))
    return a.with_labels(labels), NdRealization(tuple(tables))


def restrict_realization(r: NdRealization, hyperedges) -> NdRealization:
    return NdRealization(tuple(r.tables[e] for e in hyperedges))


# ---------------------------------------------------------------------------
# Menores topológicos
# ---------------------------------------------------------------------------

def check_embedding(base: SignedArrangement, target: SignedArrangement, emb: MinorEmbedding) -> None:
    h = _hyperedge_graph(base)
    g = _hyperedge_graph(target)
    phi = emb.vertex_map
    if len(phi) != base.n_hyperedges or len(set(phi)) != len(phi):
        raise InvalidArrangementError(f"φ não é injetiva ou tem tamanho errado: {phi}")
    if any(not (0 <= x < target.n_hyperedges) for x in phi):
        raise InvalidArrangementError(f"φ fora do alvo: {phi}")
    expected = {(min(i, j), max(i, j)) for i, j in h.edges()}
    if set(emb.paths) != expected:
        raise InvalidArrangementError(f"Caminhos para {sorted(emb.paths)}, esperado {sorted(expected)}")
    used = set(phi)
    for (i, j), path in emb.paths.items():
        if len(path) < 2 or path[0] != phi[i] or path[-1] != phi[j]:
            raise InvalidArrangementError(f"Caminho {path} não liga φ({i}) = {phi[i]} a φ({j}) = {phi[j]}")
        if len(set(path)) != len(path):
            raise InvalidArrangementError(f"Caminho {path} não é simples")
        for x, y in zip(path, path[1:]):
            if not g.has_edge(x, y):
                raise InvalidArrangementError(f"Caminho {path} usa a não-aresta ({x}, {y})")
        interior = set(path[1:-1])
        if interior & used:
            raise InvalidArrangementError(f"Caminho {path} cruza outro vértice ou caminho")
        used |= interior


def normal_form_flips(
    target: SignedArrangement, base: SignedArrangement, emb: MinorEmbedding
) -> list[tuple[int, int]]:
    """Pares a trocar para que φ(h) tenha o rótulo de h e o resto +1."""
    desired = [1] * target.n_hyperedges
    for h, x in enumerate(emb.vertex_map):
        desired[x] = base.labels[h]
    differ = [e for e in range(target.n_hyperedges) if target.labels[e] != desired[e]]
    if len(differ) % 2:
        raise InvalidArrangementError(
            f"Paridades diferentes: alvo {target.parity():+d}, base {base.parity():+d}"
        )
    return [(differ[k], differ[k + 1]) for k in range(0, len(differ), 2)]


def _oriented_path(emb: MinorEmbedding, i: int, j: int) -> tuple[int, ...]:
    return emb.paths[(i, j)] if i < j else emb.paths[(j, i)][::-1]


def lift_realization(
    base: tuple[SignedArrangement, NdRealization], target: SignedArrangement, emb: MinorEmbedding
) -> NdRealization:
    """
    Imagem φ(h): tabela de h com +1 nas coordenadas extras. Interior de um
    caminho: as duas coordenadas do caminho repetem o valor do vértice de base
    correspondente com a marginal dele. Resto: tudo +1. O alvo precisa estar na
    forma normal de rótulos.
    """
    h_arr, h_real = base
    check_embedding(h_arr, target, emb)
    for h, x in enumerate(emb.vertex_map):
        if target.labels[x] != h_arr.labels[h]:
            raise InvalidArrangementError(f"Rótulo de φ({h}) = {x} difere da base; aplique normal_form_flips antes")
    images = set(emb.vertex_map)
    interior_of: dict[int, tuple[int, tuple[int, ...], int]] = {}
    for (i, j), path in emb.paths.items():
        u = h_arr.shared_vertex(i, j)
        for pos in range(1, len(path) - 1):
            interior_of[path[pos]] = (u, path, pos)
    for x in range(target.n_hyperedges):
        if x not in images and x not in interior_of and target.labels[x] != 1:
            raise InvalidArrangementError(f"Hiperaresta {x} fora da imersão deveria ter rótulo +1")

    tables: list[Table] = []
    for x, verts in enumerate(target.hyperedges):
        ones = [1] * len(verts)
        if x in images:
            h = emb.vertex_map.index(x)
            # coordenada no alvo de cada vértice de base u ∈ h: primeiro passo do caminho h -> outro
            slots = []
            for u in h_arr.hyperedges[h]:
                e1, e2 = h_arr.containing(u)
                other = e2 if e1 == h else e1
                path = _oriented_path(emb, h, other)
                slots.append(verts.index(target.shared_vertex(path[0], path[1])))
            table: Table = {}
            for key, p in h_real.tables[h].items():
                out = list(ones)
                for slot, o in zip(slots, key):
                    out[slot] = o
                table[tuple(out)] = table.get(tuple(out), Fraction(0)) + p
            tables.append(table)
        elif x in interior_of:
            u, path, pos = interior_of[x]
            e1, _ = h_arr.containing(u)
            plus = h_real.marginal(h_arr, e1, u)
            s1 = verts.index(target.shared_vertex(path[pos - 1], x))
            s2 = verts.index(target.shared_vertex(x, path[pos + 1]))
            table = {}
            for o, p in ((1, plus), (-1, 1 - plus)):
                if p:
                    out = list(ones)
                    out[s1] = out[s2] = o
                    table[tuple(out)] = p
            tables.append(table)
        else:
            tables.append({tuple(ones): Fraction(1)})
    return NdRealization(tuple(tables))


def hard_coded_embedding(target: SignedArrangement, context_id: int) -> tuple[SignedArrangement, NdRealization, MinorEmbedding]:
    """
    Uma imersão por contexto, sem usar o contexto: K22 -> K33 com as outras duas
    linhas (ou colunas) e duas do outro lado; K3 -> K5 com as outras três retas.
    """
    (k22, r22), (k3, r3) = base_realizations()
    if not (0 <= context_id < target.n_hyperedges):
        raise InvalidParameterError(f"Contexto {context_id} fora de 0..{target.n_hyperedges - 1}")
    if target.name == "magic-square":
        rows, cols = [0, 1, 2], [3, 4, 5]
        if context_id in rows:
            same = [r for r in rows if r != context_id]
            other = cols[:2]
        else:
            same = [c for c in cols if c != context_id]
            other = rows[:2]
        phi = (same[0], same[1], other[0], other[1])
        paths = {(i, j): (phi[i], phi[j]) for i, j in ((0, 2), (0, 3), (1, 2), (1, 3))}
        return k22, r22, MinorEmbedding(phi, paths)
    if target.name == "pentagram":
        phi = tuple(k for k in range(5) if k != context_id)[:3]
        paths = {(i, j): (phi[i], phi[j]) for i, j in ((0, 1), (0, 2), (1, 2))}
        return k3, r3, MinorEmbedding(phi, paths)
    raise InvalidParameterError(f"Sem imersão conhecida para {target.name!r}")


def lift_with_normal_form(
    base: tuple[SignedArrangement, NdRealization], target: SignedArrangement, emb: MinorEmbedding
) -> NdRealization:
    """Leva os rótulos do alvo à forma normal, levanta e desfaz as trocas na realização."""
    flips = normal_form_flips(target, base[0], emb)
    labels = list(target.labels)
    for i, j in flips:
        labels[i], labels[j] = -labels[i], -labels[j]
    normal = target.with_labels(labels)
    arr, real = normal, lift_realization(base, normal, emb)
    for pair in reversed(flips):
        arr, real = flip_labels_along_path(arr, real, pair)
    if arr.labels != target.labels:
        raise InvalidArrangementError("Trocas não restauraram os rótulos do alvo")
    return real


def deterministic_context_attack(target, context_id: int) -> AttackResult:
    """Realização não perturbativa com resultados determinísticos em todos os vértices do contexto."""
    arr = target_arrangement(target) if isinstance(target, str) else target
    base_arr, base_real, emb = hard_coded_embedding(arr, context_id)
    real = lift_with_normal_form((base_arr, base_real), arr, emb)
    ok, report = verify_nd_realization(arr, real)
    if not ok:
        raise InvalidArrangementError(f"Realização levantada inválida: {report}")
    predictions = {}
    for v in arr.hyperedges[context_id]:
        plus = real.marginal(arr, context_id, v)
        if plus not in (0, 1):
            raise InvalidArrangementError(f"Vértice {v} do contexto {context_id} não é determinístico ({plus})")
        predictions[v] = 1 if plus == 1 else -1
    logger.info("[deterministic_context_attack] %s contexto %d: previsões %s", arr.name, context_id, predictions)
    return AttackResult(arr, context_id, emb, real, predictions)


# ---------------------------------------------------------------------------
# SI-C com adversário emaranhado
# ---------------------------------------------------------------------------

def maximally_entangled_state(d: int) -> np.ndarray:
    psi = np.zeros(d * d)
    psi[[i * d + i for i in range(d)]] = 1.0 / np.sqrt(d)
    return psi


def observable_correlation(A: np.ndarray, B: np.ndarray, state: np.ndarray) -> float:
    """⟨state| A ⊗ B |state⟩ (parte real)."""
    state = np.asarray(state)
    return float(np.real(np.vdot(state, np.kron(A, B) @ state)))


def si_c_entangled_check(d: int, index: int = 0, projector: np.ndarray | None = None) -> float:
    """
    ⟨A ⊗ A⟩ em (1/√d)Σ|ii⟩ com A = 𝟙 − 2P. A identidade usa Pᵀ do lado de Eve,
    por isso só vale como está para P real (P = Pᵀ).
    """
    if d < 2:
        raise InvalidParameterError(f"d deve ser >= 2 (recebido {d})")
    if projector is None:
        if not (0 <= index < d):
            raise InvalidParameterError(f"index {index} fora de 0..{d - 1}")
        P = np.zeros((d, d))
        P[index, index] = 1.0
    else:
        P = np.asarray(projector)
        if P.shape != (d, d):
            raise InvalidParameterError(f"Projetor com forma {P.shape}, esperado {(d, d)}")
        if not np.allclose(P @ P, P, atol=1e-12) or not np.allclose(P, P.conj().T, atol=1e-12):
            raise InvalidParameterError("Matriz fornecida não é um projetor")
        if not np.allclose(P, P.T, atol=1e-12):
            raise InvalidParameterError("Projetor complexo com P != Pᵀ: a correlação perfeita exige P real")
    A = np.eye(d) - 2.0 * P
    return observable_correlation(A, A, maximally_entangled_state(d))


# ---------------------------------------------------------------------------
# Formato texto (arrangement / he)
# ---------------------------------------------------------------------------

def dump_arrangement(a: SignedArrangement) -> str:
    lines = [f"arrangement {a.n_vertices} {a.n_hyperedges}"]
    lines.extend(f"he {label:+d} " + " ".join(str(v) for v in e) for e, label in zip(a.hyperedges, a.labels))
    return "\n".join(lines) + "\n"


def load_arrangement(text: str, name: str = "") -> SignedArrangement:
    header = None
    hyperedges, labels = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tag, *rest = line.split()
        try:
            if tag == "arrangement":
                header = (int(rest[0]), int(rest[1]))
            elif tag == "he":
                labels.append(int(rest[0]))
                hyperedges.append(tuple(int(v) for v in rest[1:]))
            else:
                raise InvalidArrangementError(f"Linha {lineno}: tag desconhecida {tag!r}")
        except (IndexError, ValueError) as exc:
            raise InvalidArrangementError(f"Linha {lineno} malformada: {raw!r}") from exc
    if header is None:
        raise InvalidArrangementError("Cabeçalho 'arrangement <n_vertices> <n_hyperedges>' ausente")
    if len(hyperedges) != header[1]:
        raise InvalidArrangementError(f"Cabeçalho anuncia {header[1]} hiperarestas, lidas {len(hyperedges)}")
    return SignedArrangement(header[0], tuple(hyperedges), tuple(labels), name)
