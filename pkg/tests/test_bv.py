"""Tests for the presented pair-class algebras and their cooperadic maps.

Independent oracles used here:

* the classical factorization of the Poincare polynomial of each
  presentation --  prod_{k=1}^{r-1}(1+kt) * (1+t)^r  for the plain
  algebra on r labels, with the first index shifted to 1..r for the
  cylinder and to 2g-1..r+2g-2 for the genus-g fiber -- checked against
  the enumerated normal-form bases;

* a brute-force rank computation of the relation ideal inside the free
  graded-commutative algebra (local reimplementation, sharing no code
  with the module) -- the quotient dimensions must agree with the bases
  in every degree;

* hand-computed values of the cocompositions, projections and boundary
  operators on small monomials.

The end-versus-collision compatibility of the boundary operators (the
co-Leibniz identities) is exact on one moving point and on every
monomial not coupling the moving point's frame class to a pair class;
on the coupled monomials the two sides provably differ by a symmetric
frame trace, and the census of those defects is pinned below so any
change in the conventions shows up here first.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from surfconf.bv import (
    BV,
    BVC,
    BVGG,
    STAR,
    AlgElement,
    Tensor2,
    anchor,
    basis,
    boundary,
    cobracket_projection,
    cocompose,
    cocompose_at_marked,
    gen,
    gen_key,
    graded_dims,
    involution,
    is_theta,
    label_key,
    multiply,
    normal_form,
    split_packet,
    under,
    over,
)


def F(n, d=1):
    return Fraction(n, d)


def elem(pres, *gens, c=1):
    """The element c * product(gens) in normal form."""
    return normal_form(pres, [(c, [tuple(g) for g in gens])])


def mono(pres, m):
    return AlgElement(pres, {m: F(1)}, _normalized=True)


P2 = BV((1, 2))
P3 = BV((1, 2, 3))
P4 = BV((1, 2, 3, 4))
C1 = BVC((1,))
C2 = BVC((1, 2))
C3 = BVC((1, 2, 3))
G11 = BVGG(1, (1,))
G12 = BVGG(1, (1, 2))
G21 = BVGG(2, (1,))
G22 = BVGG(2, (1, 2))


def all_monomials(pres):
    out = []
    d = 0
    while True:
        layer = basis(pres, d)
        if not layer and d > 0:
            return out
        out.extend(layer)
        d += 1


# ---------------------------------------------------------------- labels


def test_label_order():
    labs = [2, 1, STAR, under(1), over(2), under(2), "x"]
    labs.sort(key=label_key)
    assert labs == [1, 2, "x", under(1), under(2), over(2), STAR]


def test_generator_normalizes_pair_order():
    assert gen(2, 1) == (1, 2)
    assert gen(under(1), 1) == (1, under(1))
    assert gen(STAR, 1) == (1, STAR)
    assert gen(over(2), under(1)) == (under(1), over(2))


def test_anchor_rule():
    assert anchor((1, 2)) == 2
    assert anchor((1, under(1))) == 1
    assert anchor((1, STAR)) == STAR
    assert anchor((1, 1)) is None
    assert is_theta((1, 1)) and not is_theta((1, 2))


# ---------------------------------------------------------------- normal form


def test_self_pair_squares_to_zero():
    t1 = elem(P2, (1, 1))
    assert multiply(t1, t1).is_zero()


def test_generators_anticommute():
    t1 = elem(C1, (1, 1))
    w = elem(C1, (1, STAR))
    assert multiply(t1, w) == -multiply(w, t1)
    assert multiply(t1, w).coefficient([(1, 1), (1, STAR)]) == 1


def test_shared_anchor_pair_rewrites():
    # w(1,3) w(2,3)  ->  w(1,2) w(2,3) - w(1,2) w(1,3)
    a = multiply(elem(P3, (1, 3)), elem(P3, (2, 3)))
    assert a == elem(P3, (1, 2), (2, 3)) - elem(P3, (1, 2), (1, 3))


def test_marked_partner_pair_rewrites():
    # w(1,2) w(2,m)  ->  w(1,m) w(2,m) - w(1,m) w(1,2)
    m = under(1)
    a = multiply(elem(G12, (1, 2)), elem(G12, (2, m)))
    assert a == elem(G12, (1, m), (2, m)) - elem(G12, (1, m), (1, 2))


def test_two_marked_partners_vanish():
    a = multiply(elem(G21, (1, under(1))), elem(G21, (1, under(2))))
    assert a.is_zero()


def test_dead_generators_are_zero():
    assert elem(G22, (under(1), under(2))).is_zero()
    assert elem(G22, (under(1), under(1))).is_zero()
    assert normal_form(C2, [(1, [(STAR, STAR)])]).is_zero()


def arnold_sum(pres, x, y, z):
    return (
        elem(pres, (x, y), (y, z))
        + elem(pres, (y, z), (z, x))
        + elem(pres, (z, x), (x, y))
    )


@pytest.mark.parametrize(
    "pres",
    [P4, C3, G22, BVGG(1, (1, 2, 3)), BVGG(3, (1, 2))],
    ids=str,
)
def test_arnold_relations_normalize_to_zero(pres):
    labs = pres.all_labels
    for x, y, z in itertools.combinations(labs, 3):
        assert arnold_sum(pres, x, y, z).is_zero()


def test_normal_form_is_idempotent_on_bases():
    for pres in (P3, C2, G22):
        for m in all_monomials(pres):
            a = mono(pres, m)
            assert AlgElement(pres, a.terms) == a


def test_basis_monomials_are_admissible():
    for pres in (P3, C2, G22):
        for m in all_monomials(pres):
            anchors = [anchor(g) for g in m if anchor(g) is not None]
            assert len(anchors) == len(set(anchors))
            assert all(pres.alive(g) for g in m)


# ---------------------------------------------------------------- products


@st.composite
def alg_elements(draw, presentations=(P3, C2, G22), max_terms=4):
    pres = draw(st.sampled_from(list(presentations)))
    mons = all_monomials(pres)
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        m = draw(st.sampled_from(mons))
        c = F(draw(st.integers(-3, 3)), draw(st.integers(1, 3)))
        terms[m] = terms.get(m, F(0)) + c
    return AlgElement(pres, {m: c for m, c in terms.items() if c}, _normalized=True)


@settings(max_examples=120, deadline=None)
@given(st.data())
def test_multiplication_associative(data):
    a = data.draw(alg_elements())
    b = data.draw(alg_elements(presentations=(a.pres,)))
    c = data.draw(alg_elements(presentations=(a.pres,)))
    assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))


def test_multiplication_graded_commutative():
    rng = random.Random(3)
    for pres in (P3, C2, G22):
        mons = all_monomials(pres)
        for _ in range(60):
            m1, m2 = rng.choice(mons), rng.choice(mons)
            a, b = mono(pres, m1), mono(pres, m2)
            sign = (-1) ** (len(m1) * len(m2))
            assert multiply(a, b) == multiply(b, a).scale(sign)


def test_random_order_products_agree():
    # well-definedness of the rewriting: multiplying the same generators
    # in shuffled orders differs only by the sign of the permutation
    rng = random.Random(14)
    for pres in (P4, C3, G22):
        labs = pres.all_labels
        pairs = [
            gen(x, y)
            for i, x in enumerate(labs)
            for y in labs[i:]
            if pres.alive(gen(x, y))
        ]
        for _ in range(40):
            k = rng.randrange(2, 5)
            gens = rng.sample(pairs, k)
            ref = normal_form(pres, [(1, list(gens))])
            order = list(range(k))
            rng.shuffle(order)
            inv = sum(
                1
                for p in range(k)
                for q in range(p + 1, k)
                if order[p] > order[q]
            )
            shuffled = normal_form(pres, [(1, [gens[i] for i in order])])
            assert shuffled == ref.scale((-1) ** inv)


def test_degree_bookkeeping():
    a = elem(P2, (1, 2), (1, 1))
    assert a.degree() == 2 and a.degrees() == {2}
    with pytest.raises(ValueError):
        (a + AlgElement.one(P2)).degree()


# ---------------------------------------------------------------- dimensions


def poly_mult(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def product_formula(first, last, n_frames):
    """Coefficients of prod_{k=first}^{last}(1+kt) * (1+t)^n_frames."""
    p = [1]
    for k in range(first, last + 1):
        p = poly_mult(p, [1, k])
    for _ in range(n_frames):
        p = poly_mult(p, [1, 1])
    return p


def trimmed_dims(pres):
    dims = graded_dims(pres, 2 * len(pres.all_labels) + 2)
    while dims and dims[-1] == 0:
        dims.pop()
    return dims


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_dimensions_plain(r):
    pres = BV(tuple(range(1, r + 1)))
    assert trimmed_dims(pres) == product_formula(1, r - 1, r)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_dimensions_cylinder(r):
    pres = BVC(tuple(range(1, r + 1)))
    assert trimmed_dims(pres) == product_formula(1, r, r)


@pytest.mark.parametrize(
    "g,r",
    [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1), (3, 2)],
)
def test_dimensions_genus_fiber(g, r):
    pres = BVGG(g, tuple(range(1, r + 1)))
    assert trimmed_dims(pres) == product_formula(2 * g - 1, r + 2 * g - 2, r)


# -- brute-force oracle: rank of the relation ideal in the free algebra,
#    implemented locally so it shares nothing with the module internals.


def _free_sort(gens):
    gens = tuple(gens)
    if len(set(gens)) != len(gens):
        return 0, ()
    inv = sum(
        1
        for i in range(len(gens))
        for j in range(i + 1, len(gens))
        if gen_key(gens[i]) > gen_key(gens[j])
    )
    return (-1) ** inv, tuple(sorted(gens, key=gen_key))


def _elimination_dims(pres):
    labs = pres.all_labels
    gens = sorted(
        {
            gen(x, y)
            for i, x in enumerate(labs)
            for y in labs[i:]
            if pres.alive(gen(x, y))
        },
        key=gen_key,
    )
    rels = []
    for x, y, z in itertools.combinations(labs, 3):
        terms = {}
        for g1, g2 in [
            (gen(x, y), gen(y, z)),
            (gen(y, z), gen(z, x)),
            (gen(z, x), gen(x, y)),
        ]:
            if not (pres.alive(g1) and pres.alive(g2)):
                continue
            s, mon = _free_sort((g1, g2))
            if s:
                terms[mon] = terms.get(mon, F(0)) + s
        terms = {m: c for m, c in terms.items() if c}
        if terms:
            rels.append(terms)
    dims = []
    for d in range(len(gens) + 1):
        free = list(itertools.combinations(gens, d))
        if d < 2:
            dims.append(len(free))
            continue
        index = {m: i for i, m in enumerate(free)}
        pivots = {}
        rank = 0
        for rel in rels:
            for m in itertools.combinations(gens, d - 2):
                row = {}
                for mon2, c in rel.items():
                    s, mm = _free_sort(mon2 + m)
                    if s:
                        row[index[mm]] = row.get(index[mm], F(0)) + s * c
                row = {k: v for k, v in row.items() if v}
                while row:
                    j = min(row)
                    if j in pivots:
                        f = row[j] / pivots[j][j]
                        for k, v in pivots[j].items():
                            nv = row.get(k, F(0)) - f * v
                            if nv:
                                row[k] = nv
                            elif k in row:
                                del row[k]
                    else:
                        pivots[j] = row
                        rank += 1
                        break
        dims.append(len(free) - rank)
    while dims and dims[-1] == 0:
        dims.pop()
    return dims


@pytest.mark.parametrize("pres", [P3, C2, G12, G22, BVGG(3, (1,))], ids=str)
def test_dimensions_match_relation_ideal_rank(pres):
    assert trimmed_dims(pres) == _elimination_dims(pres)


# ---------------------------------------------------------------- cocompose


def test_cocompose_merges_internal_pairs():
    t = cocompose(elem(P3, (1, 2)), (1, 2), 1)
    left, right = BV((1, 3)), BV((1, 2))
    expected = Tensor2(left, right, {(((1, 1),), ()): F(1), ((), ((1, 2),)): F(1)})
    assert t == expected


def test_cocompose_redirects_cross_pairs():
    t = cocompose(elem(P3, (2, 3)), (1, 2), 1)
    assert t == Tensor2(BV((1, 3)), BV((1, 2)), {(((1, 3),), ()): F(1)})


def test_cocompose_splits_self_pairs():
    t = cocompose(elem(P3, (2, 2)), (1, 2), 1)
    expected = Tensor2(
        BV((1, 3)), BV((1, 2)), {(((1, 1),), ()): F(1), ((), ((2, 2),)): F(1)}
    )
    assert t == expected


def test_cocompose_kills_cross_pairs_to_marked():
    # a pair between a cluster point and a handle end dies when the
    # cluster collapses (the merged point cannot pair with a dead label)
    t = cocompose(elem(G22, (2, under(1))), (1, 2), 1)
    assert t == Tensor2(BVGG(2, (1,)), BV((1, 2)), {(((1, under(1)),), ()): F(1)})


def test_cocompose_counit():
    for pres in (P3, C2, G22):
        for m in all_monomials(pres):
            a = mono(pres, m)
            for i in pres.labels:
                t = cocompose(a, (i,), i)
                back = {}
                for (mL, mR), c in t.terms.items():
                    if mR == ():
                        back[mL] = back.get(mL, F(0)) + c
                assert {k: v for k, v in back.items() if v} == a.terms


def test_cocompose_coassociative_on_nested_clusters():
    rng = random.Random(5)
    mons = all_monomials(P4)

    def rand_elem():
        terms = {}
        for _ in range(rng.randrange(1, 5)):
            m = rng.choice(mons)
            terms[m] = terms.get(m, F(0)) + F(rng.randrange(-3, 4))
        return AlgElement(P4, {m: c for m, c in terms.items() if c}, _normalized=True)

    for _ in range(25):
        a = rand_elem()
        acc_a = {}
        t1 = cocompose(a, (3, 4), 3)
        for (mL, mR), c in t1.terms.items():
            t2 = cocompose(mono(t1.left, mL), (2, 3), 2)
            for (m1, m2), c2 in t2.terms.items():
                k = (m1, m2, mR)
                acc_a[k] = acc_a.get(k, F(0)) + c * c2
        acc_b = {}
        s1 = cocompose(a, (2, 3, 4), 2)
        for (mL, mR), c in s1.terms.items():
            s2 = cocompose(mono(s1.right, mR), (3, 4), 3)
            for (m1, m2), c2 in s2.terms.items():
                k = (mL, m1, m2)
                acc_b[k] = acc_b.get(k, F(0)) + c * c2
        assert {k: v for k, v in acc_a.items() if v} == {
            k: v for k, v in acc_b.items() if v
        }


def test_cocompose_rejects_bad_clusters():
    a = elem(P3, (1, 2))
    with pytest.raises(ValueError):
        cocompose(a, ())
    with pytest.raises(ValueError):
        cocompose(a, (1, 7))
    with pytest.raises(ValueError):
        cocompose(a, (1, 2), 3)  # merged label collides with a survivor


# ---------------------------------------------------------------- extractions


def test_extraction_at_under_end():
    # the pair with the end becomes the angular class of the extracted point
    t = cocompose_at_marked(elem(G11, (1, under(1))), 1, under(1))
    assert t == Tensor2(C1, BVGG(1, ()), {(((1, STAR),), ()): F(1)})


def test_extraction_at_over_end_applies_involution():
    t = cocompose_at_marked(elem(G21, (1, over(2))), 1, over(2))
    assert t == Tensor2(C1, BVGG(2, ()), {(((1, STAR),), ()): F(-1)})


def test_extraction_redirects_pairs_with_other_points():
    # w(1,2), extracting 1 toward the end m: the remainder keeps w(2,m)
    m = under(1)
    t = cocompose_at_marked(elem(G12, (1, 2)), 1, m)
    assert t == Tensor2(C1, BVGG(1, (2,)), {((), ((2, m),)): F(1)})


def test_extraction_at_far_end_makes_all_pairs_angular():
    t = cocompose_at_marked(elem(P2, (1, 2)), 2, "inf")
    assert t == Tensor2(BVC((2,)), BV((1,)), {(((2, STAR),), ()): F(1)})


def test_extraction_carries_frame_trace():
    # the frame class of an extracted point leaves the sum of the
    # remaining frame classes behind
    t = cocompose_at_marked(elem(P3, (3, 3)), 3, "inf")
    ext, rem = BVC((3,)), BV((1, 2))
    expected = Tensor2(
        ext,
        rem,
        {
            (((3, 3),), ()): F(1),
            ((), ((1, 1),)): F(1),
            ((), ((2, 2),)): F(1),
        },
    )
    assert t == expected


def test_extraction_at_cylinder_marked_point():
    t = cocompose_at_marked(elem(C2, (2, STAR)), 2, STAR)
    assert t == Tensor2(BVC((2,)), C1, {(((2, STAR),), ()): F(1)})
    # a pair with a surviving point turns into that point's angular class
    t = cocompose_at_marked(elem(C2, (1, 2)), 2, STAR)
    assert t == Tensor2(BVC((2,)), C1, {((), ((1, STAR),)): F(1)})


def test_split_packet():
    a = elem(C2, (1, 2))
    t = split_packet(a, (1,))
    assert t == Tensor2(BVC((1,)), BVC((2,)), {(((1, STAR),), ()): F(1)})
    b = elem(C2, (2, STAR))
    t = split_packet(b, (1,))
    assert t == Tensor2(BVC((1,)), BVC((2,)), {((), ((2, STAR),)): F(1)})
    c = elem(C2, (1, 1))
    t = split_packet(c, (1,))
    assert t == Tensor2(BVC((1,)), BVC((2,)), {(((1, 1),), ()): F(1)})


def test_extraction_is_multiplicative():
    rng = random.Random(8)
    mons = all_monomials(G22)
    for _ in range(30):
        m1, m2 = rng.choice(mons), rng.choice(mons)
        prod = multiply(mono(G22, m1), mono(G22, m2))
        lhs = cocompose_at_marked(prod, 1, under(2))
        rhs = cocompose_at_marked(mono(G22, m1), 1, under(2)).multiply(
            cocompose_at_marked(mono(G22, m2), 1, under(2))
        )
        assert lhs == rhs


# ---------------------------------------------------------------- involution


def test_involution_images():
    assert involution(elem(C2, (1, STAR))) == elem(C2, (1, STAR), c=-1)
    assert involution(elem(C2, (1, 1))) == elem(C2, (1, 1)) - 2 * elem(C2, (1, STAR))
    assert involution(elem(C2, (1, 2))) == (
        elem(C2, (1, 2)) - elem(C2, (1, STAR)) - elem(C2, (2, STAR))
    )


def test_involution_is_an_involution():
    for m in all_monomials(C2):
        a = mono(C2, m)
        assert involution(involution(a)) == a


def test_involution_is_multiplicative():
    rng = random.Random(21)
    mons = all_monomials(C2)
    for _ in range(40):
        a, b = mono(C2, rng.choice(mons)), mono(C2, rng.choice(mons))
        assert involution(multiply(a, b)) == multiply(involution(a), involution(b))


def test_involution_needs_cylinder():
    with pytest.raises(ValueError):
        involution(elem(P2, (1, 2)))


# ---------------------------------------------------------------- projections


def test_cobracket_projection_values():
    assert cobracket_projection(elem(C1, (1, STAR))) == 1
    assert cobracket_projection(AlgElement.one(C1)) == 0
    assert cobracket_projection(elem(C1, (1, 1))) == 0
    assert cobracket_projection(elem(C1, (1, STAR), (1, 1))) == 0
    with pytest.raises(ValueError):
        cobracket_projection(elem(C2, (1, STAR)))


def test_boundary_collision_values():
    assert boundary(elem(P2, (1, 2)), 1, 2) == AlgElement.one(BV((1,)))
    assert boundary(elem(P2, (1, 2)), 2, 1) == AlgElement.one(BV((1,)))
    assert boundary(elem(P2, (1, 1)), 1, 2).is_zero()
    assert boundary(elem(P2, (1, 2), (2, 2)), 1, 2) == elem(BV((1,)), (1, 1))
    assert boundary(elem(P2, (1, 1), (1, 2), (2, 2)), 1, 2).is_zero()
    assert boundary(elem(P3, (1, 2), (1, 3)), 1, 2) == elem(BV((1, 3)), (1, 3))
    assert boundary(elem(P3, (1, 3), (2, 3)), 1, 2).is_zero()


def test_boundary_end_values():
    assert boundary(elem(P2, (1, 2)), 0, 2) == AlgElement.one(BV((1,)))
    assert boundary(elem(C2, (2, STAR)), 2, STAR) == AlgElement.one(C1)
    assert boundary(elem(G11, (1, under(1))), 1, under(1)) == AlgElement.one(
        BVGG(1, ())
    )
    assert boundary(elem(G21, (1, over(2))), 1, over(2)) == -AlgElement.one(
        BVGG(2, ())
    )
    assert boundary(elem(G21, (1, under(2))), 1, under(2)) == AlgElement.one(
        BVGG(2, ())
    )


# ---------------------------------------------------------------- co-Leibniz


def lemma_end_vs_collisions(a, mover, _trace=None):
    """Escape at the far end minus all collision channels."""
    out = boundary(a, 0, mover, _trace=_trace)
    for i in a.pres.labels:
        if i != mover:
            out = out - boundary(a, i, mover)
    return out


def lemma_cylinder(a, mover, _trace=None):
    """Far end minus the marked point channel minus collisions."""
    out = boundary(a, 0, mover, _trace=_trace) - boundary(a, mover, STAR, _trace=_trace)
    for i in a.pres.labels:
        if i != mover:
            out = out - boundary(a, i, mover)
    return out


def test_co_leibniz_exact_on_one_moving_point():
    for m in all_monomials(P2):
        assert lemma_end_vs_collisions(mono(P2, m), 2).is_zero()
    for m in all_monomials(C2):
        assert lemma_cylinder(mono(C2, m), 2).is_zero()


def test_co_leibniz_exact_without_moving_frame_class():
    t3 = gen(3, 3)
    for m in all_monomials(P3):
        if t3 not in m:
            assert lemma_end_vs_collisions(mono(P3, m), 3).is_zero()
    for m in all_monomials(C3):
        if t3 not in m:
            assert lemma_cylinder(mono(C3, m), 3).is_zero()


def test_co_leibniz_defect_census_two_moving_points():
    # On monomials coupling the moving point's frame class to one of its
    # pair classes the two sides differ by a symmetric frame trace; the
    # defect census is pinned so any change of convention surfaces here.
    defects = {}
    for m in all_monomials(P3):
        d = lemma_end_vs_collisions(mono(P3, m), 3)
        if not d.is_zero():
            defects[m] = d
    t3 = gen(3, 3)
    assert len(defects) == 8
    assert all(t3 in m for m in defects)
    assert all(any(anchor(g) == 3 for g in m) for m in defects)
    assert defects[(gen(1, 3), t3)] == elem(P2, (2, 2))
    assert defects[(gen(2, 3), t3)] == elem(P2, (1, 1))
    count = 0
    for m in all_monomials(C3):
        if not lemma_cylinder(mono(C3, m), 3).is_zero():
            count += 1
            assert t3 in m
    assert count == 32


def test_frame_trace_coefficient_is_pinned():
    # dropping the trace breaks the one-moving-point identity ...
    a = elem(P2, (1, 2), (2, 2))
    assert lemma_end_vs_collisions(a, 2).is_zero()
    assert lemma_end_vs_collisions(a, 2, _trace={}) == -elem(BV((1,)), (1, 1))
    # ... and the far end and the marked point must carry the same trace
    b = elem(C2, (2, STAR), (2, 2))
    assert lemma_cylinder(b, 2).is_zero()
    assert lemma_cylinder(b, 2, _trace={"inf": 1}) == elem(C1, (1, 1))


# ---------------------------------------------------------------- guards


def test_presentation_guards():
    with pytest.raises(ValueError):
        BV((1, 1))
    with pytest.raises(ValueError):
        BV((1, under(1)))
    with pytest.raises(ValueError):
        BVGG(0, (1,))
    with pytest.raises(ValueError):
        cocompose_at_marked(elem(P2, (1, 2)), 1, STAR)
    with pytest.raises(ValueError):
        cocompose_at_marked(elem(G11, (1, 1)), 1, under(2))
    with pytest.raises(ValueError):
        split_packet(elem(P2, (1, 2)), (1,))
    with pytest.raises(ValueError):
        elem(P2, (1, 3))
