# tests/test_attacks.py

from fractions import Fraction
from math import prod

import numpy as np
import pytest

from attacks import (
    MinorEmbedding,
    NdRealization,
    SignedArrangement,
    base_realizations,
    check_embedding,
    deterministic_context_attack,
    dump_arrangement,
    flip_labels_along_path,
    hard_coded_embedding,
    intersection_graph,
    is_magic,
    k22_arrangement,
    k3_arrangement,
    lift_realization,
    lift_with_normal_form,
    load_arrangement,
    magic_pentagram,
    magic_square,
    maximally_entangled_state,
    normal_form_flips,
    observable_correlation,
    restrict_realization,
    si_c_entangled_check,
    target_arrangement,
    verify_nd_realization,
)
from errors import InvalidArrangementError, InvalidParameterError


# ---------------------------------------------------------------------------
# Arranjos
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("factory", [k22_arrangement, k3_arrangement, magic_square, magic_pentagram])
def test_arrangements_are_magic(factory):
    assert is_magic(factory())


def test_magic_square_intersection_graph_is_k33():
    g = intersection_graph(magic_square())
    assert g.n_vertices == 6
    assert len(g.edges) == 9
    assert not g.has_edge(0, 1)
    assert g.has_edge(0, 3)
    assert g.labels[5] == "-1"


def test_pentagram_intersection_graph_is_k5():
    a = magic_pentagram()
    assert a.n_vertices == 10
    assert all(len(e) == 4 for e in a.hyperedges)
    assert len(intersection_graph(a).edges) == 10


@pytest.mark.parametrize(
    "args",
    [
        (3, ((0, 1), (1, 2), (0, 1, 2)), (1, 1, 1)),  # vértice 1 em três hiperarestas
        (2, ((0, 1), (0, 1)), (1, 2)),
        (4, ((0, 1), (0, 1), (2, 3), (2, 3)), (1, 1, 1, 1)),  # desconexo
        (2, ((0, 1), (0, 1)), (1,)),
        (2, ((0, 0), (1, 1)), (1, 1)),
    ],
)
def test_arrangement_validation(args):
    with pytest.raises(InvalidArrangementError):
        SignedArrangement(*args)


def test_shared_vertex_and_containing():
    a = magic_square()
    assert a.shared_vertex(1, 4) == 4  # linha 1, coluna 1
    assert a.containing(4) == (1, 4)
    with pytest.raises(InvalidArrangementError):
        a.shared_vertex(0, 1)


def test_target_arrangement_unknown():
    with pytest.raises(InvalidParameterError):
        target_arrangement("triangle")


# ---------------------------------------------------------------------------
# Realizações
# ---------------------------------------------------------------------------

def test_base_realizations_are_valid():
    for arr, real in base_realizations():
        ok, report = verify_nd_realization(arr, real)
        assert ok, report
        for e in range(arr.n_hyperedges):
            for v in arr.hyperedges[e]:
                assert real.marginal(arr, e, v) == Fraction(1, 2)


def test_verify_rejects_wrong_parity():
    arr, real = base_realizations()[1]
    flipped = arr.with_labels((1, 1, 1))
    ok, report = verify_nd_realization(flipped, real)
    assert not ok
    assert "hiperaresta 2" in report


def test_verify_rejects_unequal_marginals():
    arr = k3_arrangement()
    tables = (
        {(1, 1): Fraction(1)},
        {(1, 1): Fraction(1, 2), (-1, -1): Fraction(1, 2)},
        {(1, -1): Fraction(1, 2), (-1, 1): Fraction(1, 2)},
    )
    ok, report = verify_nd_realization(arr, NdRealization(tables))
    assert not ok
    assert "marginal" in report


def test_verify_rejects_bad_keys():
    arr, _ = base_realizations()[1]
    with pytest.raises(InvalidArrangementError):
        verify_nd_realization(arr, NdRealization(({(1, 1, 1): Fraction(1)},) * 3))


def test_flip_labels_along_path_keeps_realization_valid():
    arr, real = base_realizations()[0]
    new_arr, new_real = flip_labels_along_path(arr, real, (0, 3))
    assert new_arr.labels == (-1, 1, 1, 1)
    assert verify_nd_realization(new_arr, new_real)[0]
    back_arr, back_real = flip_labels_along_path(new_arr, new_real, (0, 3))
    assert back_arr.labels == arr.labels
    assert back_real.tables == real.tables


def test_flip_path_rejects_same_hyperedge():
    arr, real = base_realizations()[0]
    with pytest.raises(InvalidArrangementError):
        flip_labels_along_path(arr, real, (1, 1))


def test_restrict_realization():
    _, real = base_realizations()[0]
    assert restrict_realization(real, [3, 0]).tables == (real.tables[3], real.tables[0])


# ---------------------------------------------------------------------------
# Imersões e ataque
# ---------------------------------------------------------------------------

def test_hard_coded_embedding_is_valid():
    target = magic_square()
    for c in range(6):
        base, _, emb = hard_coded_embedding(target, c)
        check_embedding(base, target, emb)
        assert c not in emb.vertex_map


def test_check_embedding_rejects_non_injective():
    target = magic_square()
    base = k22_arrangement()
    emb = MinorEmbedding((0, 0, 3, 4), {(0, 2): (0, 3), (0, 3): (0, 4), (1, 2): (0, 3), (1, 3): (0, 4)})
    with pytest.raises(InvalidArrangementError):
        check_embedding(base, target, emb)


def test_check_embedding_rejects_non_edge_path():
    target = magic_square()
    base = k22_arrangement()
    emb = MinorEmbedding((1, 2, 3, 4), {(0, 2): (1, 3), (0, 3): (1, 4), (1, 2): (2, 3), (1, 3): (2, 0, 4)})
    with pytest.raises(InvalidArrangementError):
        check_embedding(base, target, emb)


def test_normal_form_flips_parity_mismatch():
    base, _, emb = hard_coded_embedding(magic_square(), 0)
    plain = magic_square().with_labels((1,) * 6)
    with pytest.raises(InvalidArrangementError):
        normal_form_flips(plain, base, emb)


def test_hard_coded_embedding_context_range():
    with pytest.raises(InvalidParameterError):
        hard_coded_embedding(magic_pentagram(), 5)


@pytest.mark.parametrize("target, n_contexts", [("magic-square", 6), ("pentagram", 5)])
def test_deterministic_context_attack_all_contexts(target, n_contexts):
    arr = target_arrangement(target)
    for c in range(n_contexts):
        res = deterministic_context_attack(target, c)
        ok, report = verify_nd_realization(arr, res.realization)
        assert ok, report
        assert set(res.predictions) == set(arr.hyperedges[c])
        assert prod(res.predictions.values()) == arr.labels[c]


def test_lift_with_normal_form_matches_attack():
    arr = magic_pentagram()
    base_arr, base_real, emb = hard_coded_embedding(arr, 2)
    real = lift_with_normal_form((base_arr, base_real), arr, emb)
    assert real == deterministic_context_attack(arr, 2).realization


PENTAGRAM_DETOUR = MinorEmbedding((0, 1, 2), {(0, 1): (0, 3, 1), (0, 2): (0, 2), (1, 2): (1, 2)})


def test_lift_through_interior_path_is_valid():
    target = magic_pentagram()
    k3, r3 = base_realizations()[1]
    check_embedding(k3, target, PENTAGRAM_DETOUR)
    real = lift_with_normal_form((k3, r3), target, PENTAGRAM_DETOUR)
    ok, report = verify_nd_realization(target, real)
    assert ok, report


def test_interior_hyperedge_carries_equal_pair():
    k3, r3 = base_realizations()[1]
    normal = magic_pentagram().with_labels((1, 1, -1, 1, 1))
    real = lift_realization((k3, r3), normal, PENTAGRAM_DETOUR)
    assert verify_nd_realization(normal, real)[0]
    verts = normal.hyperedges[3]
    s1 = verts.index(normal.shared_vertex(0, 3))
    s2 = verts.index(normal.shared_vertex(3, 1))
    table = real.tables[3]
    assert all(key[s1] == key[s2] for key in table)
    assert all(o == 1 for key in table for pos, o in enumerate(key) if pos not in (s1, s2))
    assert sum(p for key, p in table.items() if key[s1] == 1) == Fraction(1, 2)
    assert real.tables[4] == {(1, 1, 1, 1): Fraction(1)}


def test_identity_lift_reproduces_base_tables():
    k22, r22 = base_realizations()[0]
    emb = MinorEmbedding((0, 1, 2, 3), {(0, 2): (0, 2), (0, 3): (0, 3), (1, 2): (1, 2), (1, 3): (1, 3)})
    real = lift_realization((k22, r22), k22, emb)
    assert restrict_realization(real, emb.vertex_map).tables == r22.tables


# ---------------------------------------------------------------------------
# SI-C com estado emaranhado
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("d", [2, 3, 4])
def test_si_c_perfect_correlation(d):
    assert si_c_entangled_check(d) == pytest.approx(1.0, abs=1e-12)
    assert si_c_entangled_check(d, index=d - 1) == pytest.approx(1.0, abs=1e-12)


def test_si_c_real_rank_two_projector():
    v = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).T
    v[:, 0] /= np.sqrt(2)
    P = v @ v.T
    assert si_c_entangled_check(3, projector=P) == pytest.approx(1.0, abs=1e-12)


def test_product_state_is_not_perfect():
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    A = np.diag([-1.0, 1.0])
    assert observable_correlation(A, A, np.kron(plus, plus)) < 1.0
    assert np.linalg.norm(maximally_entangled_state(3)) == pytest.approx(1.0)


def test_si_c_rejects_complex_and_non_projectors():
    P = 0.5 * np.array([[1.0, -1j], [1j, 1.0]])
    with pytest.raises(InvalidParameterError):
        si_c_entangled_check(2, projector=P)
    with pytest.raises(InvalidParameterError):
        si_c_entangled_check(2, projector=np.diag([0.5, 0.0]))
    with pytest.raises(InvalidParameterError):
        si_c_entangled_check(1)


# ---------------------------------------------------------------------------
# Formato texto
# ---------------------------------------------------------------------------

def test_dump_and_load_arrangement():
    text = dump_arrangement(magic_pentagram())
    assert text.splitlines()[0] == "arrangement 10 5"
    back = load_arrangement(text, "pentagram")
    assert back == magic_pentagram()


@pytest.mark.parametrize("text", ["he +1 0 1\n", "arrangement 2 2\nhe +1 0 1\n", "arrangement 2 1\nfoo 1\n"])
def test_load_arrangement_errors(text):
    with pytest.raises(InvalidArrangementError):
        load_arrangement(text)
