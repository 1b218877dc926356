"""Tests for the decorated graph complexes.

Three oracle layers pin the sign conventions: hand-expanded values for
the smallest graphs (the diagonal replacement of a single edge, the
one-internal-vertex graph whose differential must cancel under the
projection, the tadpole reproducing the Euler number), the projection
onto the small model (whose own differential and coaction were pinned
independently), and randomized structural properties (d^2 = 0,
canonical-form isomorphism invariance, coaction counit,
coassociativity and compatibility)."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from surfconf.bv import BV, AlgElement, cocompose, gen
from surfconf.graphs import (
    Graph,
    GraphSum,
    GraphTensor,
    canonicalize,
    components_all_anchored,
    edge_graph,
    empty_graph,
    format_graph,
    g_coaction,
    g_differential,
    g_multiply,
    make_z,
    parse_graph,
    project_to_mog,
    z_trivial,
)
from surfconf.mog import (
    H_NU,
    MogTensor2,
    h_a,
    h_b,
    mog_differential,
    mog_coaction,
    mog_generator,
    mog_h,
    mog_multiply,
    mog_one,
)

F = Fraction


def gs(gr, c=1):
    return GraphSum.from_graph(gr, c)


def random_graph(rng, genus, ext, max_int=3, max_edges=4, max_deco=2):
    """A random canonical graph in which every component is anchored."""
    while True:
        nint = rng.randrange(0, max_int + 1)
        base = max(ext, default=0)
        internal = list(range(base + 1, base + 1 + nint))
        verts = list(ext) + internal
        edges = []
        for _ in range(rng.randrange(0, max_edges + 1)):
            u, v = rng.choice(verts), rng.choice(verts)
            if u == v and u in internal:
                continue
            edges.append((min(u, v), max(u, v)))
        odd, even = [], []
        classes = [h_a(k) for k in range(1, genus + 1)] + [
            h_b(k) for k in range(1, genus + 1)
        ]
        for _ in range(rng.randrange(0, max_deco + 1)):
            v = rng.choice(verts)
            if classes and rng.random() < 0.7:
                odd.append((v, rng.choice(classes)))
            else:
                even.append(v)
        gr = Graph(genus, ext, nint, edges, odd, even)
        if not components_all_anchored(gr):
            continue
        s, canon = canonicalize(gr)
        if s:
            return canon


# ---------------------------------------------------------------- graph type


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(-1, (1,), 0)
    with pytest.raises(ValueError):
        Graph(1, (1, 1), 0)
    with pytest.raises(ValueError):
        Graph(1, (1,), 1, [(2, 2)])  # tadpole at an internal vertex
    with pytest.raises(ValueError):
        Graph(1, (1,), 0, [(1, 5)])  # unknown vertex
    with pytest.raises(ValueError):
        Graph(1, (1,), 0, [], [(1, h_a(2))])  # class beyond the genus
    with pytest.raises(ValueError):
        Graph(1, (1,), 0, [], [(1, H_NU)])  # top class is not odd data


def test_graph_degree():
    assert empty_graph(1, (1, 2)).degree() == 0
    assert edge_graph(1, (1, 2), 1, 2).degree() == 1
    gj = Graph(1, (1,), 1, [(1, 2)], [(2, h_a(1)), (2, h_b(1))])
    assert gj.degree() == 1
    assert Graph(1, (1,), 0, [], [], [1]).degree() == 2


def test_anchoring_predicate():
    assert components_all_anchored(empty_graph(1, (1,)))
    assert not components_all_anchored(Graph(1, (1,), 1))
    assert components_all_anchored(Graph(1, (1,), 1, [(1, 2)]))
    with pytest.raises(ValueError):
        GraphSum.from_graph(Graph(1, (1,), 1))


# ---------------------------------------------------------------- canonical form


def test_parallel_edges_vanish():
    s, _ = canonicalize(Graph(1, (1, 2), 0, [(1, 2), (1, 2)]))
    assert s == 0


def test_internal_relabeling_is_invisible():
    a = Graph(1, (1,), 2, [(1, 2), (2, 3)])
    b = Graph(1, (1,), 2, [(1, 3), (3, 2)])
    assert canonicalize(a) == canonicalize(b)


def test_edge_order_reversal_flips_sign():
    a = Graph(1, (1, 2, 3), 0, [(1, 2), (2, 3)])
    b = Graph(1, (1, 2, 3), 0, [(2, 3), (1, 2)])
    sa, ca = canonicalize(a)
    sb, cb = canonicalize(b)
    assert ca == cb and sa == -sb


def test_repeated_odd_decoration_vanishes():
    s, _ = canonicalize(Graph(1, (1,), 0, [], [(1, h_a(1)), (1, h_a(1))]))
    assert s == 0
    s, _ = canonicalize(Graph(1, (1, 2), 0, [], [(1, h_a(1)), (2, h_a(1))]))
    assert s != 0  # same class at distinct vertices is fine


def test_odd_automorphism_kills_symmetric_graph():
    # swapping the two internal vertices permutes two edges and fixes
    # the third: an orientation-reversing symmetry
    s, _ = canonicalize(Graph(1, (1,), 2, [(1, 2), (1, 3), (2, 3)]))
    assert s == 0


def test_canonicalize_idempotent_and_iso_invariant():
    rng = random.Random(31)
    for _ in range(80):
        genus = rng.choice((0, 1, 2))
        gr = random_graph(rng, genus, (1, 2))
        assert canonicalize(gr) == (1, gr)
        # shuffle the stored edge order with tracked parity
        idx = list(range(len(gr.edges)))
        rng.shuffle(idx)
        inv = sum(
            1
            for i in range(len(idx))
            for j in range(i + 1, len(idx))
            if idx[i] > idx[j]
        )
        shuffled = Graph(
            genus,
            gr.ext,
            gr.nint,
            tuple(gr.edges[i] for i in idx),
            gr.odd,
            gr.even,
        )
        s, canon = canonicalize(shuffled)
        assert canon == gr and s == (-1) ** inv


def test_canonicalize_internal_limit():
    with pytest.raises(ValueError):
        canonicalize(Graph(1, (1,), 9, [(1, 1 + k) for k in range(1, 10)]))


# ---------------------------------------------------------------- products


def test_superposition_of_disjoint_edges():
    ext = (1, 2, 3, 4)
    p = g_multiply(gs(edge_graph(1, ext, 1, 2)), gs(edge_graph(1, ext, 3, 4)))
    assert p.terms == {Graph(1, ext, 0, [(1, 2), (3, 4)]): F(1)}


def test_unit_graph():
    a = gs(edge_graph(1, (1, 2), 1, 2))
    assert g_multiply(a, GraphSum.unit(1, (1, 2))) == a
    assert g_multiply(GraphSum.unit(1, (1, 2)), a) == a


def test_square_of_an_edge_vanishes():
    a = gs(edge_graph(1, (1, 2), 1, 2))
    assert g_multiply(a, a).is_zero()


def test_multiply_graded_commutative_and_associative():
    rng = random.Random(7)
    for _ in range(40):
        genus = rng.choice((1, 2))
        a = gs(random_graph(rng, genus, (1, 2), max_int=2, max_edges=3))
        b = gs(random_graph(rng, genus, (1, 2), max_int=2, max_edges=3))
        c = gs(random_graph(rng, genus, (1, 2), max_int=1, max_edges=2))
        da = next(iter(a.terms)).degree()
        db = next(iter(b.terms)).degree()
        assert g_multiply(a, b) == g_multiply(b, a).scale((-1) ** (da * db))
        assert g_multiply(g_multiply(a, b), c) == g_multiply(a, g_multiply(b, c))


def test_projection_is_multiplicative():
    rng = random.Random(13)
    for _ in range(40):
        genus = rng.choice((0, 1, 2))
        a = gs(random_graph(rng, genus, (1, 2), max_int=0, max_edges=3))
        b = gs(random_graph(rng, genus, (1, 2), max_int=0, max_edges=3))
        assert project_to_mog(g_multiply(a, b)) == mog_multiply(
            project_to_mog(a), project_to_mog(b)
        )


# ---------------------------------------------------------------- differential


def test_differential_replaces_an_edge_by_the_diagonal():
    d = g_differential(gs(edge_graph(1, (1, 2), 1, 2)))
    ext = (1, 2)
    expected = GraphSum(
        1,
        ext,
        [
            (1, Graph(1, ext, 0, [], [], [1])),
            (1, Graph(1, ext, 0, [], [], [2])),
            (-1, Graph(1, ext, 0, [], [(1, h_a(1)), (2, h_b(1))])),
            (1, Graph(1, ext, 0, [], [(1, h_b(1)), (2, h_a(1))])),
        ],
    )
    assert d == expected


@pytest.mark.parametrize("genus,j", [(1, 1), (2, 1), (2, 2)])
def test_differential_of_decorated_internal_vertex(genus, j):
    # one external vertex joined to an internal vertex decorated a^j b^j:
    # the splitting part integrates out the internal vertex, the
    # contraction part moves the decorations onto the external vertex
    gj = Graph(genus, (1,), 1, [(1, 2)], [(2, h_a(j)), (2, h_b(j))])
    d = g_differential(gs(gj))
    expected = GraphSum(
        genus,
        (1,),
        [
            (1, Graph(genus, (1,), 0, [], [], [1])),
            (-1, Graph(genus, (1,), 0, [], [(1, h_a(j)), (1, h_b(j))])),
        ],
    )
    assert d == expected
    # ...and the projection cancels the two terms against each other
    assert project_to_mog(d).is_zero()
    assert not d.is_zero()


@pytest.mark.parametrize("genus", [0, 1, 2, 3])
def test_differential_of_tadpole_is_the_euler_class(genus):
    d = g_differential(gs(edge_graph(genus, (1,), 1, 1)))
    assert project_to_mog(d) == mog_h(genus, (1,), 1, H_NU).scale(2 - 2 * genus)


def test_differential_squares_to_zero():
    rng = random.Random(20260819)
    for genus in (0, 1, 2):
        for ext in [(1,), (1, 2), (1, 2, 3)]:
            for _ in range(25):
                a = gs(random_graph(rng, genus, ext))
                assert g_differential(g_differential(a)).is_zero()


def test_projection_is_a_chain_map():
    rng = random.Random(4)
    for genus in (0, 1, 2):
        for ext in [(1,), (1, 2)]:
            for _ in range(30):
                a = gs(random_graph(rng, genus, ext))
                assert project_to_mog(g_differential(a)) == mog_differential(
                    project_to_mog(a)
                )


def test_differential_is_a_derivation():
    rng = random.Random(17)
    for _ in range(40):
        genus = rng.choice((1, 2))
        a = gs(random_graph(rng, genus, (1, 2), max_int=2, max_edges=3))
        b = gs(random_graph(rng, genus, (1, 2), max_int=2, max_edges=3))
        da = next(iter(a.terms)).degree()
        lhs = g_differential(g_multiply(a, b))
        rhs = g_multiply(g_differential(a), b) + g_multiply(
            a, g_differential(b)
        ).scale((-1) ** da)
        assert lhs == rhs


# ---------------------------------------------------------------- partition functions


def test_single_vertex_integrals():
    assert z_trivial(Graph(2, (), 1, [], [(1, h_a(2)), (1, h_b(2))])) == 1
    assert z_trivial(Graph(2, (), 1, [], [(1, h_b(2)), (1, h_a(2))])) == -1
    assert z_trivial(Graph(2, (), 1, [], [], [1])) == 1
    assert z_trivial(Graph(2, (), 1, [], [(1, h_a(1)), (1, h_b(2))])) == 0
    assert z_trivial(Graph(1, (), 1)) == 0
    assert z_trivial(Graph(1, (), 2, [(1, 2)])) == 0  # more than one vertex
    with pytest.raises(ValueError):
        z_trivial(empty_graph(1, (1,)))


def test_table_partition_function():
    comp = Graph(1, (), 1, [], [(1, h_a(1)), (1, h_b(1))])
    z = make_z({comp: 3})
    gj = Graph(1, (1,), 1, [(1, 2)], [(2, h_a(1)), (2, h_b(1))])
    d = g_differential(gs(gj), z)
    expected = GraphSum(
        1,
        (1,),
        [
            (3, Graph(1, (1,), 0, [], [], [1])),
            (-1, Graph(1, (1,), 0, [], [(1, h_a(1)), (1, h_b(1))])),
        ],
    )
    assert d == expected


def test_table_evaluation_respects_orientation():
    comp = Graph(1, (), 3, [(1, 2), (1, 3)], [(2, h_a(1))])
    s, canon = canonicalize(comp)
    z = make_z({canon: 5})
    assert z(canon) == 5
    reversed_edges = Graph(1, (), 3, [(1, 3), (1, 2)], [(2, h_a(1))])
    assert z(reversed_edges) == -5


def test_multi_vertex_stranding_reaches_the_table():
    # cutting the bridge strands a two-vertex component that only a
    # table (not the single-vertex integral) can see
    chain = Graph(1, (1,), 2, [(1, 2), (2, 3)], [], [3])
    comp = Graph(1, (), 2, [(1, 2)], [], [2])
    assert z_trivial(comp) == 0
    d_triv = g_differential(gs(chain))
    assert d_triv == GraphSum(
        1, (1,), [(-1, Graph(1, (1,), 1, [(1, 2)], [], [2]))]
    )
    d_tab = g_differential(gs(chain), make_z({comp: 7}))
    assert d_tab == GraphSum(1, (1,), [(7, Graph(1, (1,), 0, [], [], [1]))])


# ---------------------------------------------------------------- coaction


def test_coaction_of_one_edge():
    t = g_coaction(gs(edge_graph(1, (1, 2), 1, 2)), (1, 2))
    tadpole = Graph(1, (1,), 0, [(1, 1)])
    bare = empty_graph(1, (1,))
    assert t.terms == {
        (tadpole, ()): F(1),
        (bare, (gen(1, 2),)): F(1),
    }


def test_coaction_of_the_empty_graph():
    t = g_coaction(GraphSum.unit(1, (1, 2)), (1, 2))
    assert t.terms == {(empty_graph(1, (1,)), ()): F(1)}


def test_coaction_redirects_outside_edges():
    t = g_coaction(gs(edge_graph(1, (1, 2, 3), 1, 3)), (1, 2))
    assert t.terms == {(edge_graph(1, (1, 3), 1, 3), ()): F(1)}


def test_coaction_migrates_decorations():
    a = gs(Graph(1, (1, 2), 0, [], [(2, h_a(1))]))
    t = g_coaction(a, (1, 2))
    assert t.terms == {(Graph(1, (1,), 0, [], [(1, h_a(1))]), ()): F(1)}


def test_coaction_extracts_tadpoles_as_frame_classes():
    t = g_coaction(gs(edge_graph(1, (1, 2), 2, 2)), (1, 2))
    tadpole = Graph(1, (1,), 0, [(1, 1)])
    bare = empty_graph(1, (1,))
    assert t.terms == {
        (tadpole, ()): F(1),
        (bare, (gen(2, 2),)): F(1),
    }


def test_coaction_guards():
    a = gs(edge_graph(1, (1, 2), 1, 2))
    with pytest.raises(ValueError):
        g_coaction(a, ())
    with pytest.raises(ValueError):
        g_coaction(a, (1, 3))


def test_coaction_counit():
    rng = random.Random(3)
    for _ in range(50):
        genus = rng.choice((1, 2))
        ext = rng.choice(((1, 2), (1, 2, 3)))
        a = gs(random_graph(rng, genus, ext))
        i = rng.choice(ext)
        t = g_coaction(a, (i,), i)
        back = {}
        for (g2, mon), c in t.terms.items():
            if mon == ():
                back[g2] = back.get(g2, F(0)) + c
        assert {k: v for k, v in back.items() if v} == a.terms


def test_coaction_coassociative_on_nested_clusters():
    rng = random.Random(99)
    for _ in range(40):
        genus = rng.choice((0, 1, 2))
        a = gs(random_graph(rng, genus, (1, 2, 3), max_int=2))
        acc_a = {}
        t1 = g_coaction(a, (2, 3), 2)
        for (g1, mR), c in t1.terms.items():
            t2 = g_coaction(
                GraphSum(genus, (1, 2), {g1: F(1)}, _normalized=True), (1, 2), 1
            )
            for (g2, m2), c2 in t2.terms.items():
                key = (g2, m2, mR)
                acc_a[key] = acc_a.get(key, F(0)) + c * c2
        acc_b = {}
        s1 = g_coaction(a, (1, 2, 3), 1)
        for (g1, mR), c in s1.terms.items():
            t2 = cocompose(
                AlgElement(BV((1, 2, 3)), {mR: F(1)}, _normalized=True), (2, 3), 2
            )
            for (m1, m2), c2 in t2.terms.items():
                key = (g1, m1, m2)
                acc_b[key] = acc_b.get(key, F(0)) + c * c2
        assert {k: v for k, v in acc_a.items() if v} == {
            k: v for k, v in acc_b.items() if v
        }


def _tensor_to_mog(t: GraphTensor) -> MogTensor2:
    out = {}
    for (gr, mon), c in t.terms.items():
        img = project_to_mog(
            GraphSum(t.genus, t.ext, {gr: F(1)}, _normalized=True)
        )
        for key, cm in img.terms.items():
            k = (key, mon)
            v = out.get(k, F(0)) + c * cm
            if v:
                out[k] = v
            elif k in out:
                del out[k]
    return MogTensor2(t.genus, t.ext, t.right, out, _normalized=True)


def test_coaction_compatible_with_projection():
    rng = random.Random(41)
    for genus in (0, 1, 2):
        for ext, T in [((1, 2), (1, 2)), ((1, 2, 3), (2, 3)),
                       ((1, 2, 3), (1, 3))]:
            for _ in range(20):
                a = gs(random_graph(rng, genus, ext, max_int=2))
                lhs = _tensor_to_mog(g_coaction(a, T))
                rhs = mog_coaction(project_to_mog(a), T)
                assert lhs == rhs


# ---------------------------------------------------------------- projection


def test_projection_kills_internal_vertices():
    gj = Graph(1, (1,), 1, [(1, 2)], [(2, h_a(1)), (2, h_b(1))])
    assert project_to_mog(gs(gj)).is_zero()


def test_projection_of_generators():
    assert project_to_mog(gs(edge_graph(1, (1, 2), 1, 2))) == mog_generator(
        1, (1, 2), 1, 2
    )
    assert project_to_mog(gs(edge_graph(1, (1,), 1, 1))) == mog_generator(
        1, (1,), 1, 1
    )
    deco = Graph(2, (1,), 0, [], [(1, h_b(2))])
    assert project_to_mog(gs(deco)) == mog_h(2, (1,), 1, h_b(2))


def test_projection_reads_the_orientation_order():
    a = Graph(1, (1, 2, 3), 0, [(1, 2), (2, 3)])
    b = Graph(1, (1, 2, 3), 0, [(2, 3), (1, 2)])
    pa = project_to_mog(gs(a))
    pb = project_to_mog(gs(b))  # opposite stored orientation
    w12 = mog_generator(1, (1, 2, 3), 1, 2)
    w23 = mog_generator(1, (1, 2, 3), 2, 3)
    assert pa == mog_multiply(w12, w23)
    assert pb == mog_multiply(w23, w12)
    assert pb == pa.scale(-1)


# ---------------------------------------------------------------- text format


def test_format_example():
    gj = Graph(1, (1,), 1, [(1, 2)], [(2, h_a(1)), (2, h_b(1))])
    assert (
        format_graph(gj)
        == "genus=1; ext=[1]; int=1; edges=[(1,2)]; deco={2:[a1,b1]}"
    )


def test_roundtrip_on_random_canonical_graphs():
    rng = random.Random(8)
    for _ in range(60):
        genus = rng.choice((0, 1, 2))
        ext = rng.choice(((1,), (1, 2), (1, 3)))
        gr = random_graph(rng, genus, ext)
        assert parse_graph(format_graph(gr)) == gr


def test_parse_errors():
    with pytest.raises(ValueError):
        parse_graph("genus=1; ext=[1]")
    with pytest.raises(ValueError):
        parse_graph("genus=1; ext=[1]; int=0; edges=[]; deco={1:[q7]}")
