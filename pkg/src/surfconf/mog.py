"""The small model of framed configuration spaces of a closed surface.

For a genus-g surface the model on a label set S is the graded algebra

    ( H^*(surface)^{tensor S}  (x)  BV(S) ) / ( x_i w(i,j) - x_j w(i,j) )

with one copy of the surface cohomology per point and the pair-class
algebra of :mod:`surfconf.bv` on top.  The surface cohomology has the
basis {1, a^1..a^g, b^1..b^g, nu} with a^k b^k = nu, all other products
of positive-degree classes zero.  The mixed relation lets cohomology
classes slide along pair classes, so the normal form pushes every class
to the smallest label of its w-connected cluster.

The differential is zero on the surface classes and sends

    d w(i,j) = nu_i + nu_j - sum_k ( a^k_i b^k_j + b^k_i a^k_j )
    d t(i)   = (2 - 2g) nu_i

(the diagonal class of the surface, and the Euler class of its tangent
bundle).  The module provides the normal form, products, differential,
cluster coaction, point extensions, and exact cohomology ranks.

A basis monomial is stored as (htuple, mon): one surface class per
label (in label order) and a normal-form pair-class monomial.  The
orientation putting all surface classes before the pair classes fixes
every Koszul sign.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, Iterable, Tuple

from .bv import (
    BV,
    AlgElement,
    Presentation,
    gen,
    gen_str,
    label_key,
    mon_key,
    _merge_monomials,
    _normalize_terms,
)

__all__ = [
    "H_ONE",
    "H_NU",
    "h_a",
    "h_b",
    "hdeg",
    "h_mul",
    "h_basis",
    "h_str",
    "MogElement",
    "MogTensor2",
    "mog_normal_form",
    "mog_zero",
    "mog_one",
    "mog_generator",
    "mog_h",
    "mog_multiply",
    "mog_differential",
    "mog_coaction",
    "extend_points",
    "mog_basis",
    "mog_graded_dims",
    "cohomology_ranks",
]


# ---------------------------------------------------------------- surface classes

H_ONE: Tuple = ()
H_NU: Tuple = ("nu",)


def h_a(k: int) -> Tuple:
    return ("a", k)


def h_b(k: int) -> Tuple:
    return ("b", k)


def hdeg(h: Tuple) -> int:
    if h == H_ONE:
        return 0
    if h == H_NU:
        return 2
    return 1


def h_mul(h1: Tuple, h2: Tuple):
    """Product in the surface cohomology: (coeff, class) or None if zero."""
    if h1 == H_ONE:
        return (1, h2)
    if h2 == H_ONE:
        return (1, h1)
    if hdeg(h1) + hdeg(h2) > 2:
        return None
    s1, k1 = h1
    s2, k2 = h2
    if k1 != k2 or s1 == s2:
        return None
    return (1, H_NU) if (s1, s2) == ("a", "b") else (-1, H_NU)


def h_basis(genus: int):
    out = [H_ONE]
    out += [h_a(k) for k in range(1, genus + 1)]
    out += [h_b(k) for k in range(1, genus + 1)]
    out.append(H_NU)
    return out


def h_str(h: Tuple, point) -> str:
    if h == H_NU:
        return f"nu({point})"
    s, k = h
    return f"{s}{k}({point})"


# ---------------------------------------------------------------- normal form


def _clusters(labels, mon):
    """Union-find representative per label, joining endpoints of pair classes."""
    parent = {x: x for x in labels}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in mon:
        x, y = g
        if x != y:
            rx, ry = find(x), find(y)
            if rx != ry:
                hi, lo = (rx, ry) if label_key(rx) > label_key(ry) else (ry, rx)
                parent[hi] = lo
    return {x: find(x) for x in labels}


def _push(labels, htuple, mon):
    """Slide surface classes to the smallest label of their cluster.

    Returns (coeff, htuple) or None if the term dies.
    """
    rep = _clusters(labels, mon)
    pos = {x: i for i, x in enumerate(labels)}
    h = list(htuple)
    sign = 1
    for i, x in enumerate(labels):
        if h[i] == H_ONE:
            continue
        r = rep[x]
        if r == x:
            continue
        j = pos[r]
        between = sum(hdeg(h[s]) for s in range(j + 1, i))
        sign *= (-1) ** (hdeg(h[i]) * between)
        prod = h_mul(h[j], h[i])
        if prod is None:
            return None
        c, merged = prod
        sign *= c
        h[j] = merged
        h[i] = H_ONE
    return sign, tuple(h)


class MogElement:
    """A normal-form element of the small model on (genus, labels)."""

    __slots__ = ("genus", "labels", "terms")

    def __init__(self, genus: int, labels, terms=None, _normalized=False):
        labels = tuple(sorted(labels, key=label_key))
        object.__setattr__(self, "genus", genus)
        object.__setattr__(self, "labels", labels)
        if genus < 0:
            raise ValueError("genus must be >= 0")
        if terms is None:
            clean: Dict = {}
        elif _normalized:
            clean = dict(terms)
        else:
            clean = _mog_normalize(genus, labels, terms)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):  # pragma: no cover
        raise AttributeError("MogElement is immutable")

    @property
    def pres(self) -> Presentation:
        return BV(self.labels)

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            val = terms.get(k, Fraction(0)) + c
            if val:
                terms[k] = val
            elif k in terms:
                del terms[k]
        return MogElement(self.genus, self.labels, terms, _normalized=True)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        return MogElement(
            self.genus, self.labels,
            {k: c * v for k, v in self.terms.items()} if c else {},
            _normalized=True,
        )

    def __mul__(self, other):
        if isinstance(other, MogElement):
            return mog_multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def _check(self, other):
        if not isinstance(other, MogElement):
            raise TypeError("expected a MogElement")
        if (self.genus, self.labels) != (other.genus, other.labels):
            raise ValueError("model mismatch")

    def __eq__(self, other):
        return (
            isinstance(other, MogElement)
            and (self.genus, self.labels) == (other.genus, other.labels)
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.genus, self.labels, frozenset(self.terms.items())))

    def is_zero(self):
        return not self.terms

    def degrees(self):
        return {sum(hdeg(h) for h in ht) + len(m) for ht, m in self.terms}

    def degree(self):
        degs = self.degrees()
        if not degs:
            return 0
        if len(degs) > 1:
            raise ValueError(f"inhomogeneous element of degrees {sorted(degs)}")
        return degs.pop()

    def coefficient(self, htuple, mon) -> Fraction:
        return self.terms.get((tuple(htuple), tuple(mon)), Fraction(0))

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for (ht, mon), c in sorted(
            self.terms.items(), key=lambda kv: (mon_key(kv[0][1]), kv[0][0])
        ):
            parts = [
                h_str(h, x) for h, x in zip(ht, self.labels) if h != H_ONE
            ] + [gen_str(g) for g in mon]
            body = ".".join(parts)
            if not body:
                bits.append(str(c))
            elif c == 1:
                bits.append(body)
            elif c == -1:
                bits.append(f"-{body}")
            else:
                bits.append(f"{c} {body}")
        return " + ".join(bits).replace("+ -", "- ")

    __repr__ = __str__


def _mog_normalize(genus, labels, raw) -> Dict:
    """Reduce raw (coeff, htuple, pair-gens) data to the normal-form dict."""
    pres = BV(labels)
    hset = set(h_basis(genus))
    acc: Dict = {}
    if isinstance(raw, dict):
        raw = [(c, ht, mon) for (ht, mon), c in raw.items()]
    for c, htuple, gens in raw:
        c = Fraction(c)
        if not c:
            continue
        htuple = tuple(tuple(h) for h in htuple)
        if len(htuple) != len(labels):
            raise ValueError("one surface class per label expected")
        for h in htuple:
            if h not in hset:
                raise ValueError(f"unknown surface class {h!r} at genus {genus}")
        for mon, cb in _normalize_terms(pres, [(1, gens)]).items():
            pushed = _push(labels, htuple, mon)
            if pushed is None:
                continue
            s, ht2 = pushed
            key = (ht2, mon)
            val = acc.get(key, Fraction(0)) + c * cb * s
            if val:
                acc[key] = val
            elif key in acc:
                del acc[key]
    return acc


def mog_normal_form(genus, labels, raw) -> MogElement:
    """Normal form of raw data: a MogElement, a {key: coeff} dict, or an
    iterable of (coeff, htuple, pair-generator list) triples."""
    if isinstance(raw, MogElement):
        if (raw.genus, tuple(sorted(labels, key=label_key))) != (genus, raw.labels):
            raise ValueError("model mismatch")
        return raw
    return MogElement(genus, labels, raw)


def mog_zero(genus, labels) -> MogElement:
    return MogElement(genus, labels)


def mog_one(genus, labels) -> MogElement:
    labels = tuple(sorted(labels, key=label_key))
    key = (tuple(H_ONE for _ in labels), ())
    return MogElement(genus, labels, {key: Fraction(1)}, _normalized=True)


def mog_generator(genus, labels, x, y) -> MogElement:
    """The pair class w(x,y) (or the frame class t(x) when x == y)."""
    labels = tuple(sorted(labels, key=label_key))
    ht = tuple(H_ONE for _ in labels)
    return MogElement(genus, labels, [(1, ht, [(x, y)])])


def mog_h(genus, labels, point, h) -> MogElement:
    """The surface class h placed at the given point."""
    labels = tuple(sorted(labels, key=label_key))
    if point not in labels:
        raise ValueError(f"{point!r} is not a label")
    ht = tuple(tuple(h) if x == point else H_ONE for x in labels)
    return MogElement(genus, labels, [(1, ht, [])])


# ---------------------------------------------------------------- product


def mog_multiply(a: MogElement, b: MogElement) -> MogElement:
    a._check(b)
    labels = a.labels
    raw = []
    for (h1, m1), c1 in a.terms.items():
        suffix = []
        run = len(m1)
        for i in range(len(labels) - 1, -1, -1):
            suffix.append(run)
            run += hdeg(h1[i])
        suffix.reverse()  # suffix[i] = deg of everything right of slot i in a
        for (h2, m2), c2 in b.terms.items():
            sign = 1
            ht = []
            dead = False
            for i in range(len(labels)):
                if h2[i] == H_ONE:
                    ht.append(h1[i])
                    continue
                sign *= (-1) ** (hdeg(h2[i]) * suffix[i])
                prod = h_mul(h1[i], h2[i])
                if prod is None:
                    dead = True
                    break
                c, merged = prod
                sign *= c
                ht.append(merged)
            if dead:
                continue
            s, mm = _merge_monomials(m1, m2)
            if not s:
                continue
            raw.append((c1 * c2 * sign * s, tuple(ht), mm))
    return MogElement(a.genus, labels, raw)


# ---------------------------------------------------------------- differential


def _pair_class_differential(genus, labels, x, y):
    """Raw terms for d of a single pair class, as (coeff, {point: class}).

    The diagonal class carries the alternating sign sum_k (-1)^{|e_k|}
    e_k (x) e_k^*: in the slot-ordered storage the cross terms are
    - a^k_i b^k_j + b^k_i a^k_j.  Three independent checks pin this:
    the differential descends to the quotient by the class-sliding
    relations, it restricts on the thin diagonal to the Euler number
    (2-2g) nu matching d of the frame class, and the cluster coaction
    becomes a chain map.
    """
    if x == y:
        return [(2 - 2 * genus, {x: H_NU})]
    out = [(1, {x: H_NU}), (1, {y: H_NU})]
    for k in range(1, genus + 1):
        out.append((-1, {x: h_a(k), y: h_b(k)}))
        out.append((1, {x: h_b(k), y: h_a(k)}))
    return out


def mog_differential(a: MogElement) -> MogElement:
    """The degree +1 differential: zero on surface classes, the diagonal
    class on pair classes, the Euler number on frame classes."""
    genus, labels = a.genus, a.labels
    out = mog_zero(genus, labels)
    for (ht, mon), c in a.terms.items():
        hdeg_total = sum(hdeg(h) for h in ht)
        for p, g in enumerate(mon):
            rest = mon[:p] + mon[p + 1 :]
            base = MogElement(
                genus, labels, {(ht, rest): Fraction(1)}, _normalized=True
            )
            sign = (-1) ** (hdeg_total + p)
            image = mog_zero(genus, labels)
            for ci, placement in _pair_class_differential(genus, labels, *g):
                piece = mog_one(genus, labels).scale(ci)
                for point, h in placement.items():
                    piece = mog_multiply(piece, mog_h(genus, labels, point, h))
                image = image + piece
            # the image has even degree, so tacking it on the right costs
            # no extra sign
            out = out + mog_multiply(base, image).scale(c * sign)
    return out


# ---------------------------------------------------------------- coaction


class MogTensor2:
    """An element of (small model) (x) (plain pair-class algebra)."""

    __slots__ = ("genus", "labels", "right", "terms")

    def __init__(self, genus, labels, right: Presentation, terms=None,
                 _normalized=False):
        labels = tuple(sorted(labels, key=label_key))
        object.__setattr__(self, "genus", genus)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "right", right)
        clean: Dict = {}
        if terms:
            if _normalized:
                clean = dict(terms)
            else:
                for ((ht, mL), mR), c in (
                    terms.items() if isinstance(terms, dict) else terms
                ):
                    c = Fraction(c)
                    if not c:
                        continue
                    for (ht2, m2), cl in _mog_normalize(
                        genus, labels, [(1, ht, mL)]
                    ).items():
                        for m3, cr in _normalize_terms(right, [(1, mR)]).items():
                            key = ((ht2, m2), m3)
                            val = clean.get(key, Fraction(0)) + c * cl * cr
                            if val:
                                clean[key] = val
                            elif key in clean:
                                del clean[key]
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):  # pragma: no cover
        raise AttributeError("MogTensor2 is immutable")

    def __add__(self, other):
        if (self.genus, self.labels, self.right) != (
            other.genus, other.labels, other.right,
        ):
            raise ValueError("tensor factor mismatch")
        terms = dict(self.terms)
        for k, c in other.terms.items():
            val = terms.get(k, Fraction(0)) + c
            if val:
                terms[k] = val
            elif k in terms:
                del terms[k]
        return MogTensor2(self.genus, self.labels, self.right, terms,
                          _normalized=True)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        return MogTensor2(
            self.genus, self.labels, self.right,
            {k: c * v for k, v in self.terms.items()} if c else {},
            _normalized=True,
        )

    def __eq__(self, other):
        return (
            isinstance(other, MogTensor2)
            and (self.genus, self.labels, self.right)
            == (other.genus, other.labels, other.right)
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.genus, self.labels, self.right,
                     frozenset(self.terms.items())))

    def is_zero(self):
        return not self.terms

    def map_left(self, f) -> "MogTensor2":
        """Apply a linear map (on MogElements) to the left factor."""
        out = None
        for ((ht, mL), mR), c in self.terms.items():
            img = f(MogElement(self.genus, self.labels,
                               {(ht, mL): Fraction(1)}, _normalized=True))
            piece = MogTensor2(
                img.genus, img.labels, self.right,
                {(k, mR): c * c2 for k, c2 in img.terms.items()},
                _normalized=True,
            )
            out = piece if out is None else out + piece
        if out is None:
            return MogTensor2(self.genus, self.labels, self.right)
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for ((ht, mL), mR), c in sorted(
            self.terms.items(),
            key=lambda kv: (mon_key(kv[0][1]), mon_key(kv[0][0][1]), kv[0][0][0]),
        ):
            left = MogElement(self.genus, self.labels,
                              {(ht, mL): Fraction(1)}, _normalized=True)
            sR = ".".join(gen_str(g) for g in mR) or "1"
            body = f"{left} (x) {sR}"
            if c == 1:
                bits.append(body)
            elif c == -1:
                bits.append(f"-{body}")
            else:
                bits.append(f"{c} {body}")
        return " + ".join(bits).replace("+ -", "- ")

    __repr__ = __str__


def mog_coaction(a: MogElement, T, new_label=None) -> MogTensor2:
    """Collapse the cluster T: remainder (x) plain pair-class factor.

    Surface classes of collapsed points migrate to the merged point; pair
    classes follow the cluster cocomposition of the pair-class algebra.
    """
    genus = a.genus
    T = tuple(sorted(set(T), key=label_key))
    if not T:
        raise ValueError("empty cluster")
    for x in T:
        if x not in a.labels:
            raise ValueError(f"{x!r} is not a label")
    if new_label is None:
        new_label = T[0]
    rest = tuple(x for x in a.labels if x not in T)
    if new_label in rest:
        raise ValueError(f"merged label {new_label!r} collides with a survivor")
    left_labels = tuple(sorted(rest + (new_label,), key=label_key))
    right = BV(T)
    Tset = set(T)
    tnew = gen(new_label, new_label)
    out_terms: Dict = {}
    empty_ht = tuple(H_ONE for _ in left_labels)
    slot = {x: i for i, x in enumerate(left_labels)}

    for (ht, mon), c in a.terms.items():
        # factor word: surface classes in slot order, then pair classes;
        # images never move surface classes across the right factor except
        # with the Koszul crossing handled below.
        acc = {((empty_ht, ()), ()): Fraction(c)}
        word = []
        for x, h in zip(a.labels, ht):
            if h != H_ONE:
                target = new_label if x in Tset else x
                word.append(("h", target, h))
        for g in mon:
            x, y = g
            in_x, in_y = x in Tset, y in Tset
            if in_x and in_y:
                word.append(("split", g))
            elif in_x or in_y:
                outside = x if in_y else y
                word.append(("left", gen(new_label, outside)))
            else:
                word.append(("left", g))
        for item in word:
            new_acc: Dict = {}
            if item[0] == "h":
                _, target, h = item
                images = [(1, (target, h), None, None)]
            elif item[0] == "split":
                g = item[1]
                images = [(1, None, (tnew,), None), (1, None, None, (g,))]
            else:
                images = [(1, None, (item[1],), None)]
            for ((htL, mL), mR), c0 in acc.items():
                for ci, hplace, lgens, rgens in images:
                    sign = 1
                    htL2, mL2, mR2 = htL, mL, mR
                    if hplace is not None:
                        target, h = hplace
                        i = slot[target]
                        # cross the right factor, the left pair classes and
                        # the later surface slots
                        later = sum(hdeg(htL[s]) for s in range(i + 1, len(htL)))
                        sign *= (-1) ** (hdeg(h) * (len(mR) + len(mL) + later))
                        prod = h_mul(htL[i], h)
                        if prod is None:
                            continue
                        ch, merged = prod
                        sign *= ch
                        htL2 = htL[:i] + (merged,) + htL[i + 1 :]
                    if lgens is not None:
                        sign *= (-1) ** len(mR)
                        s, mL2 = _merge_monomials(mL, lgens)
                        if not s:
                            continue
                        sign *= s
                    if rgens is not None:
                        s, mR2 = _merge_monomials(mR, rgens)
                        if not s:
                            continue
                        sign *= s
                    key = ((htL2, mL2), mR2)
                    val = new_acc.get(key, Fraction(0)) + c0 * ci * sign
                    if val:
                        new_acc[key] = val
                    elif key in new_acc:
                        del new_acc[key]
            acc = new_acc
            if not acc:
                break
        for key, val in acc.items():
            tot = out_terms.get(key, Fraction(0)) + val
            if tot:
                out_terms[key] = tot
            elif key in out_terms:
                del out_terms[key]
    return MogTensor2(genus, left_labels, right, out_terms)


def extend_points(a: MogElement, new_labels) -> MogElement:
    """Include the model on S into the model on S + new points."""
    new_labels = tuple(new_labels)
    for x in new_labels:
        if x in a.labels:
            raise ValueError(f"label {x!r} already present")
    labels = tuple(sorted(a.labels + new_labels, key=label_key))
    old_pos = {x: i for i, x in enumerate(a.labels)}
    terms = {}
    for (ht, mon), c in a.terms.items():
        ht2 = tuple(
            ht[old_pos[x]] if x in old_pos else H_ONE for x in labels
        )
        terms[(ht2, mon)] = c
    return MogElement(a.genus, labels, terms, _normalized=True)


# ---------------------------------------------------------------- cohomology


def mog_basis(genus, labels, degree):
    """All normal-form basis monomials (htuple, mon) of the given degree."""
    labels = tuple(sorted(labels, key=label_key))
    from .bv import basis as bv_basis

    pres = BV(labels)
    out = []
    classes = h_basis(genus)
    for d_bv in range(0, degree + 1):
        for mon in bv_basis(pres, d_bv):
            rep = _clusters(labels, mon)
            reps = [x for x in labels if rep[x] == x]
            need = degree - d_bv
            for combo in itertools.product(classes, repeat=len(reps)):
                if sum(hdeg(h) for h in combo) != need:
                    continue
                ht = {x: h for x, h in zip(reps, combo)}
                out.append(
                    (tuple(ht.get(x, H_ONE) for x in labels), mon)
                )
    return sorted(set(out), key=lambda km: (mon_key(km[1]), km[0]))


def mog_graded_dims(genus, labels, max_degree):
    return [len(mog_basis(genus, labels, d)) for d in range(max_degree + 1)]


def _rank(rows) -> int:
    """Exact rank of sparse rows (dicts keyed by column index)."""
    pivots = {}
    rank = 0
    for row in rows:
        row = dict(row)
        while row:
            j = min(row)
            if j in pivots:
                f = row[j] / pivots[j][j]
                for k, v in pivots[j].items():
                    nv = row.get(k, Fraction(0)) - f * v
                    if nv:
                        row[k] = nv
                    elif k in row:
                        del row[k]
            else:
                pivots[j] = row
                rank += 1
                break
    return rank


def cohomology_ranks(genus, labels, max_degree=None):
    """Betti numbers of the model per degree, by exact elimination.

    The differential matrices are assembled degree by degree on the
    monomial basis and their ranks computed over the rationals; the
    Betti number in degree d is dim_d - rank_d - rank_{d-1}.  Use
    mog_graded_dims for the dimensions themselves.
    """
    labels = tuple(sorted(labels, key=label_key))
    top = 2 * len(labels) + max(2 * len(labels) - 1, 0)
    if max_degree is None:
        max_degree = top
    max_degree = min(max_degree, top)
    bases = [mog_basis(genus, labels, d) for d in range(max_degree + 2)]
    index = [
        {key: i for i, key in enumerate(layer)} for layer in bases
    ]
    ranks = []
    for d in range(max_degree + 1):
        rows = []
        idx = index[d + 1] if d + 1 < len(index) else {}
        for key in bases[d]:
            a = MogElement(genus, labels, {key: Fraction(1)}, _normalized=True)
            da = mog_differential(a)
            row = {idx[k]: c for k, c in da.terms.items()}
            if row:
                rows.append(row)
        ranks.append(_rank(rows))
    betti = []
    for d in range(max_degree + 1):
        dim = len(bases[d])
        below = ranks[d - 1] if d > 0 else 0
        betti.append(dim - ranks[d] - below)
    return betti
