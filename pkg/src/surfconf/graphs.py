"""Decorated graph complexes over a closed oriented surface.

A graph has externally labeled vertices (the configuration points), a
number of unlabeled internal vertices, an ordered list of edges
(unordered vertex pairs; tadpoles only at external vertices), and
per-vertex decorations by reduced cohomology classes of the surface.
Odd data --- the edges and the degree-one decorations --- carry an
orientation: permuting the stored edge order or the stored order of
degree-one decorations multiplies the graph by the sign of the
permutation, and a graph with an orientation-reversing automorphism is
zero.  The full orientation word is the edge list followed by the
degree-one decoration list.

The differential has two parts sharing the Leibniz sign (-1)^p of the
edge position:

* the splitting part removes an edge and decorates its endpoints by the
  diagonal class of the surface, sum of (-1)^{|e|} e (x) e^* over the
  basis {1, a^k, b^k, nu} with duals {nu, b^k, -a^k, 1}; connected
  components left without external vertices are moved to the right of
  the orientation word and evaluated by a partition function Z,
* the contraction part contracts each edge with at least one internal
  endpoint (never external-external, never a tadpole), merging
  decorations onto the surviving vertex, with one extra global minus
  sign relative to the splitting part.

Both the alternating dual signs and the relative minus are forced: the
former by requiring the decorated replacement to restrict to the Euler
class on the diagonal (matching the frame-class differential), the
latter by the chain-map property of the projection onto the small
model, checked here on the one-internal-vertex graph decorated a^k b^k.

The cluster coaction collapses a set T of external vertices: every edge
inside T independently either stays (becoming a tadpole at the merged
vertex) or is extracted to the right-hand pair-class factor, with the
Koszul sign of moving the extracted edges past the kept orientation
data.  The projection onto the small model kills graphs with internal
vertices and reads off external-only graphs as products of pair
classes, frame classes and surface classes in orientation order.
"""

from __future__ import annotations

import re
from ast import literal_eval
from fractions import Fraction
from itertools import combinations_with_replacement, permutations
from typing import Dict, List, Tuple

from .bv import BV, AlgElement, normal_form
from .mog import (
    H_NU,
    H_ONE,
    MogElement,
    h_mul,
    hdeg,
    mog_generator,
    mog_h,
    mog_multiply,
    mog_one,
    mog_zero,
)

MAX_CANON_INTERNAL = 8


def _class_ok(genus, cls):
    if cls == H_NU:
        return True
    return (
        isinstance(cls, tuple)
        and len(cls) == 2
        and cls[0] in ("a", "b")
        and isinstance(cls[1], int)
        and 1 <= cls[1] <= genus
    )


def _cls_str(cls):
    if cls == H_NU:
        return "nu"
    return f"{cls[0]}{cls[1]}"


class Graph:
    """One decorated graph with an explicit orientation.

    External vertices are the given labels; internal vertices are the
    next `nint` consecutive integers after the largest label.  `edges`
    is the ordered tuple of (u, v) pairs with u <= v, `odd` the ordered
    tuple of (vertex, class) pairs of degree-one decorations, `even`
    the sorted tuple of vertices carrying a top-class decoration (one
    entry per copy).  Only `edges` and `odd` carry sign data.
    """

    __slots__ = ("genus", "ext", "nint", "edges", "odd", "even", "_hash")

    def __init__(self, genus, ext, nint, edges=(), odd=(), even=()):
        if not isinstance(genus, int) or genus < 0:
            raise ValueError("genus must be a non-negative integer")
        ext = tuple(sorted(ext))
        if len(set(ext)) != len(ext) or any(
            not isinstance(x, int) or x < 1 for x in ext
        ):
            raise ValueError("external labels must be distinct positive integers")
        if not isinstance(nint, int) or nint < 0:
            raise ValueError("internal count must be a non-negative integer")
        base = max(ext, default=0)
        verts = set(ext) | set(range(base + 1, base + 1 + nint))
        edges = tuple(
            (u, v) if u <= v else (v, u) for (u, v) in (tuple(e) for e in edges)
        )
        for u, v in edges:
            if u not in verts or v not in verts:
                raise ValueError(f"edge ({u},{v}) touches an unknown vertex")
            if u == v and u > base:
                raise ValueError("tadpoles are allowed only at external vertices")
        odd = tuple((v, tuple(c)) for (v, c) in odd)
        for v, cls in odd:
            if v not in verts:
                raise ValueError(f"decoration at unknown vertex {v}")
            if not _class_ok(genus, cls) or cls == H_NU:
                raise ValueError(f"bad degree-one decoration {cls!r}")
        even = tuple(sorted(even))
        for v in even:
            if v not in verts:
                raise ValueError(f"decoration at unknown vertex {v}")
        object.__setattr__(self, "genus", genus)
        object.__setattr__(self, "ext", ext)
        object.__setattr__(self, "nint", nint)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "odd", odd)
        object.__setattr__(self, "even", even)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *a):
        raise AttributeError("graphs are immutable")

    @property
    def base(self):
        return max(self.ext, default=0)

    @property
    def internal(self):
        b = self.base
        return tuple(range(b + 1, b + 1 + self.nint))

    def degree(self):
        return (
            len(self.edges)
            + sum(hdeg(c) for _, c in self.odd)
            + 2 * len(self.even)
            - 2 * self.nint
        )

    def _key(self):
        return (self.genus, self.ext, self.nint, self.edges, self.odd, self.even)

    def __eq__(self, other):
        return isinstance(other, Graph) and self._key() == other._key()

    def __hash__(self):
        h = object.__getattribute__(self, "_hash")
        if h is None:
            h = hash(self._key())
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return format_graph(self)


def empty_graph(genus, ext):
    return Graph(genus, ext, 0)


def edge_graph(genus, ext, u, v):
    return Graph(genus, ext, 0, [(u, v)])


# --------------------------------------------------------------- canonical form


def _sort_sign(items, key):
    """(parity sign, sorted tuple); sign 0 when two items coincide."""
    n = len(items)
    inv = 0
    for i in range(n):
        for j in range(i + 1, n):
            ki, kj = key(items[i]), key(items[j])
            if ki == kj:
                return 0, ()
            if ki > kj:
                inv += 1
    return (-1) ** (inv & 1), tuple(sorted(items, key=key))


def canonicalize(gr: Graph) -> Tuple[int, Graph]:
    """Isomorphism-class representative with the relative orientation sign.

    Internal vertices are quotiented by permutations: the relabeling
    minimizing the sorted data is chosen.  The sign is the parity of
    reordering the stored orientation into the canonical one; it is 0
    when some relabeling preserves the data but reverses orientation
    (including parallel edges and repeated odd decorations at a vertex).
    """
    if gr.nint > MAX_CANON_INTERNAL:
        raise ValueError("too many internal vertices to canonicalize")
    b = gr.base
    ids = gr.internal
    best = None
    best_signs = set()
    for perm in permutations(range(gr.nint)):
        relab = {ids[i]: b + 1 + perm[i] for i in range(gr.nint)}

        def m(v, relab=relab):
            return relab.get(v, v)

        edges = [(min(m(u), m(v)), max(m(u), m(v))) for (u, v) in gr.edges]
        odd = [(m(v), c) for (v, c) in gr.odd]
        even = tuple(sorted(m(v) for v in gr.even))
        se, edges_c = _sort_sign(edges, key=lambda e: e)
        if se == 0:
            return 0, Graph(gr.genus, gr.ext, gr.nint, sorted(edges), gr.odd, even)
        so, odd_c = _sort_sign(odd, key=lambda d: (d[0], d[1]))
        if so == 0:
            return 0, Graph(gr.genus, gr.ext, gr.nint, edges_c, sorted(odd), even)
        enc = (edges_c, odd_c, even)
        if best is None or enc < best:
            best = enc
            best_signs = {se * so}
        elif enc == best:
            best_signs.add(se * so)
    edges_c, odd_c, even_c = best
    canon = Graph(gr.genus, gr.ext, gr.nint, edges_c, odd_c, even_c)
    if len(best_signs) > 1:
        return 0, canon
    return best_signs.pop(), canon


def _components(gr: Graph):
    """Partition of the vertex set by edge connectivity."""
    parent = {v: v for v in gr.ext}
    for v in gr.internal:
        parent[v] = v

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, v in gr.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    comps: Dict[int, set] = {}
    for v in parent:
        comps.setdefault(find(v), set()).add(v)
    return list(comps.values())


def components_all_anchored(gr: Graph) -> bool:
    """True when every connected component contains an external vertex."""
    ext = set(gr.ext)
    return all(comp & ext for comp in _components(gr))


# --------------------------------------------------------------- enumeration


def enumerate_graphs(
    genus,
    n_ext,
    n_int,
    max_edges,
    max_odd=2,
    max_even=1,
    connected=False,
):
    """All canonical nonzero decorated graphs within the given bounds.

    External vertices are 1..n_ext and internal vertices the next n_int
    integers.  Edge multisets run over all vertex pairs (tadpoles only
    at external vertices) up to `max_edges`; degree-one decorations over
    all (vertex, class) choices up to `max_odd` total; top-class
    decorations over vertex multisets up to `max_even` total.  Graphs
    whose canonical form is zero (orientation-reversing automorphism)
    are dropped, and each isomorphism class is yielded once, in a
    deterministic order.
    """
    ext = tuple(range(1, n_ext + 1))
    verts = ext + tuple(range(n_ext + 1, n_ext + 1 + n_int))
    pair_slots = [(u, u) for u in ext]
    pair_slots += [
        (verts[i], verts[j])
        for i in range(len(verts))
        for j in range(i + 1, len(verts))
    ]
    odd_slots = [
        (v, (xy, k)) for v in verts for xy in ("a", "b") for k in range(1, genus + 1)
    ]
    seen = set()
    for ne in range(max_edges + 1):
        for edges in combinations_with_replacement(pair_slots, ne):
            for no in range(max_odd + 1):
                for odd in combinations_with_replacement(odd_slots, no):
                    for nv in range(max_even + 1):
                        for even in combinations_with_replacement(verts, nv):
                            gr = Graph(genus, ext, n_int, edges, odd, even)
                            if connected and len(_components(gr)) != 1:
                                continue
                            sign, canon = canonicalize(gr)
                            if sign == 0 or canon in seen:
                                continue
                            seen.add(canon)
                            yield canon


# --------------------------------------------------------------- sums


class GraphSum:
    """Finite sum of canonical decorated graphs with exact coefficients."""

    __slots__ = ("genus", "ext", "terms")

    def __init__(self, genus, ext, terms=None, _normalized=False):
        ext = tuple(sorted(ext))
        object.__setattr__(self, "genus", genus)
        object.__setattr__(self, "ext", ext)
        clean: Dict[Graph, Fraction] = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for gr, c in items:
                if isinstance(c, Graph):
                    gr, c = c, gr
                c = Fraction(c)
                if not c:
                    continue
                if gr.genus != genus or gr.ext != ext:
                    raise ValueError("graph does not live in this complex")
                if not components_all_anchored(gr):
                    raise ValueError("component without an external vertex")
                if _normalized:
                    s, canon = 1, gr
                else:
                    s, canon = canonicalize(gr)
                if s == 0:
                    continue
                val = clean.get(canon, Fraction(0)) + s * c
                if val:
                    clean[canon] = val
                elif canon in clean:
                    del clean[canon]
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("graph sums are immutable")

    @classmethod
    def zero(cls, genus, ext):
        return cls(genus, ext)

    @classmethod
    def unit(cls, genus, ext):
        return cls(genus, ext, [(1, empty_graph(genus, ext))], _normalized=True)

    @classmethod
    def from_graph(cls, gr, coeff=1):
        return cls(gr.genus, gr.ext, [(coeff, gr)])

    def is_zero(self):
        return not self.terms

    def _check(self, other):
        if self.genus != other.genus or self.ext != other.ext:
            raise ValueError("graph sums live in different complexes")

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for gr, c in other.terms.items():
            val = terms.get(gr, Fraction(0)) + c
            if val:
                terms[gr] = val
            elif gr in terms:
                del terms[gr]
        return GraphSum(self.genus, self.ext, terms, _normalized=True)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return GraphSum(self.genus, self.ext)
        return GraphSum(
            self.genus,
            self.ext,
            {gr: v * c for gr, v in self.terms.items()},
            _normalized=True,
        )

    def __eq__(self, other):
        return (
            isinstance(other, GraphSum)
            and self.genus == other.genus
            and self.ext == other.ext
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.genus, self.ext, frozenset(self.terms.items())))

    def degrees(self):
        return sorted({gr.degree() for gr in self.terms})

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for gr in sorted(self.terms, key=lambda g: (g.degree(), g._key())):
            c = self.terms[gr]
            parts.append(f"({c}) {format_graph(gr)}")
        return "\n".join(parts)

    __repr__ = __str__


def g_multiply(a: GraphSum, b: GraphSum) -> GraphSum:
    """Superpose at the external vertices, disjoint union of internal parts.

    The factors' orientation words concatenate; merging the two edge
    blocks in front of the decoration blocks costs the Koszul sign of
    moving the second factor's edges past the first factor's degree-one
    decorations.
    """
    a._check(b)
    out: List = []
    for g1, c1 in a.terms.items():
        for g2, c2 in b.terms.items():
            shift = g1.nint
            relab = {v: v + shift for v in g2.internal}

            def m(v, relab=relab):
                return relab.get(v, v)

            edges = g1.edges + tuple(
                (min(m(u), m(v)), max(m(u), m(v))) for (u, v) in g2.edges
            )
            odd = g1.odd + tuple((m(v), c) for (v, c) in g2.odd)
            even = tuple(sorted(g1.even + tuple(m(v) for v in g2.even)))
            sign = (-1) ** (len(g2.edges) * len(g1.odd))
            out.append(
                (
                    c1 * c2 * sign,
                    Graph(a.genus, a.ext, g1.nint + g2.nint, edges, odd, even),
                )
            )
    return GraphSum(a.genus, a.ext, out)


# --------------------------------------------------------------- partition functions


def z_trivial(gr: Graph) -> Fraction:
    """Evaluate a stranded component: zero unless it is a single vertex
    whose decorations multiply to the top class of the surface."""
    if gr.ext:
        raise ValueError("partition functions take graphs without external vertices")
    if gr.nint != 1 or gr.edges:
        return Fraction(0)
    sign, acc = 1, H_ONE
    for _, cls in gr.odd:
        prod = h_mul(acc, cls)
        if prod is None:
            return Fraction(0)
        s, acc = prod
        sign *= s
    for _ in gr.even:
        prod = h_mul(acc, H_NU)
        if prod is None:
            return Fraction(0)
        s, acc = prod
        sign *= s
    return Fraction(sign) if acc == H_NU else Fraction(0)


def make_z(table):
    """Partition function from a finite table of (graph, value) pairs.

    Keys are canonicalized; evaluation canonicalizes its argument and
    applies the orientation sign.
    """
    canon_table: Dict[Graph, Fraction] = {}
    for gr, val in table.items() if isinstance(table, dict) else table:
        if gr.ext:
            raise ValueError("partition tables take graphs without external vertices")
        s, canon = canonicalize(gr)
        if s == 0:
            continue
        v = canon_table.get(canon, Fraction(0)) + s * Fraction(val)
        if v:
            canon_table[canon] = v
        elif canon in canon_table:
            del canon_table[canon]

    def z(gr: Graph) -> Fraction:
        if gr.ext:
            raise ValueError(
                "partition functions take graphs without external vertices"
            )
        s, canon = canonicalize(gr)
        if s == 0:
            return Fraction(0)
        return s * canon_table.get(canon, Fraction(0))

    return z


# --------------------------------------------------------------- differential


def _diagonal(genus):
    """Diagonal class as (coefficient, class at u, class at v) triples."""
    out = [(1, H_ONE, H_NU), (1, H_NU, H_ONE)]
    for k in range(1, genus + 1):
        out.append((-1, ("a", k), ("b", k)))
        out.append((1, ("b", k), ("a", k)))
    return out


def _renumber(genus, ext, int_ids, edges, odd, even):
    """Rebuild a graph with the given internal ids renumbered consecutively."""
    base = max(ext, default=0)
    relab = {v: base + 1 + i for i, v in enumerate(sorted(int_ids))}

    def m(v):
        return relab.get(v, v)

    return Graph(
        genus,
        ext,
        len(int_ids),
        tuple((min(m(u), m(v)), max(m(u), m(v))) for (u, v) in edges),
        tuple((m(v), c) for (v, c) in odd),
        tuple(sorted(m(v) for v in even)),
    )


def _strand(gr: Graph):
    """Split off the components without external vertices.

    Returns (sign, kept graph, list of stranded component graphs); the
    sign moves every stranded orientation item to the right of the
    kept orientation word (edges first, then degree-one decorations).
    """
    ext = set(gr.ext)
    stranded_sets = [c for c in _components(gr) if not (c & ext)]
    if not stranded_sets:
        return 1, gr, []
    loose = set().union(*stranded_sets)
    items = [("e", u in loose) for (u, v) in gr.edges]
    items += [("d", v in loose) for (v, _) in gr.odd]
    inv = 0
    seen_loose = 0
    for _, in_loose in items:
        if in_loose:
            seen_loose += 1
        else:
            inv += seen_loose
    sign = (-1) ** (inv & 1)
    kept_int = [v for v in gr.internal if v not in loose]
    kept = _renumber(
        gr.genus,
        gr.ext,
        kept_int,
        [e for e in gr.edges if e[0] not in loose],
        [d for d in gr.odd if d[0] not in loose],
        [v for v in gr.even if v not in loose],
    )
    comps = []
    for cset in stranded_sets:
        comps.append(
            _renumber(
                gr.genus,
                (),
                sorted(cset),
                [e for e in gr.edges if e[0] in cset],
                [d for d in gr.odd if d[0] in cset],
                [v for v in gr.even if v in cset],
            )
        )
    return sign, kept, comps


def g_differential(a: GraphSum, Z=None) -> GraphSum:
    """Sum of the edge-splitting and edge-contraction parts.

    Splitting replaces the edge at position p (Leibniz sign (-1)^p) by
    the diagonal decorations, appending degree-one decorations at the
    end of the orientation word (endpoint u's class first); components
    cut off from all external vertices are evaluated by Z (default:
    the single-vertex integral) and removed.  Contraction collapses the
    edge's endpoints (at least one internal; the survivor is external
    when possible), merging decorations, with an extra global minus.
    """
    if Z is None:
        Z = z_trivial
    out: List = []
    for gr, c in a.terms.items():
        ext = set(gr.ext)
        for p, (u, v) in enumerate(gr.edges):
            lead = c * (-1) ** (p & 1)
            rest = gr.edges[:p] + gr.edges[p + 1 :]
            # splitting part
            for coeff, cu, cv in _diagonal(gr.genus):
                odd = gr.odd
                even = gr.even
                for vert, cls in ((u, cu), (v, cv)):
                    if cls == H_ONE:
                        continue
                    if cls == H_NU:
                        even = even + (vert,)
                    else:
                        odd = odd + ((vert, cls),)
                cand = Graph(gr.genus, gr.ext, gr.nint, rest, odd,
                             tuple(sorted(even)))
                sign, kept, comps = _strand(cand)
                val = lead * coeff * sign
                for comp in comps:
                    s, canon = canonicalize(comp)
                    if s == 0:
                        val = 0
                        break
                    val *= s * Z(canon)
                    if not val:
                        break
                if val:
                    out.append((val, kept))
            # contraction part
            if u == v or (u in ext and v in ext):
                continue
            survivor, gone = (u, v) if u in ext else (min(u, v), max(u, v))

            def m(w, survivor=survivor, gone=gone):
                return survivor if w == gone else w

            edges2 = []
            ok = True
            for e in rest:
                w1, w2 = m(e[0]), m(e[1])
                if w1 == w2 and w1 not in ext:
                    ok = False  # contraction would create an internal tadpole
                    break
                edges2.append((min(w1, w2), max(w1, w2)))
            if not ok:
                continue
            contracted = _renumber(
                gr.genus,
                gr.ext,
                [w for w in gr.internal if w != gone],
                edges2,
                [(m(w), cls) for (w, cls) in gr.odd],
                [m(w) for w in gr.even],
            )
            out.append((-lead, contracted))
    return GraphSum(a.genus, a.ext, out)


# --------------------------------------------------------------- coaction


class GraphTensor:
    """Element of (graph complex) (x) (plain pair-class algebra)."""

    __slots__ = ("genus", "ext", "right", "terms")

    def __init__(self, genus, ext, right, terms=None, _normalized=False):
        object.__setattr__(self, "genus", genus)
        object.__setattr__(self, "ext", tuple(sorted(ext)))
        object.__setattr__(self, "right", right)
        clean: Dict = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for (gr, mon), c in items:
                c = Fraction(c)
                if not c:
                    continue
                if _normalized:
                    pairs = [(1, gr, mon)]
                else:
                    s, canon = canonicalize(gr)
                    if s == 0:
                        continue
                    pairs = [
                        (s * cr, canon, m2)
                        for m2, cr in normal_form(right, [(1, mon)]).terms.items()
                    ]
                for s, canon, m2 in pairs:
                    key = (canon, m2)
                    val = clean.get(key, Fraction(0)) + c * s
                    if val:
                        clean[key] = val
                    elif key in clean:
                        del clean[key]
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("tensors are immutable")

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if (
            self.genus != other.genus
            or self.ext != other.ext
            or self.right != other.right
        ):
            raise ValueError("tensors live in different spaces")
        terms = dict(self.terms)
        for key, c in other.terms.items():
            val = terms.get(key, Fraction(0)) + c
            if val:
                terms[key] = val
            elif key in terms:
                del terms[key]
        return GraphTensor(self.genus, self.ext, self.right, terms,
                           _normalized=True)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return GraphTensor(self.genus, self.ext, self.right)
        return GraphTensor(
            self.genus,
            self.ext,
            self.right,
            {k: v * c for k, v in self.terms.items()},
            _normalized=True,
        )

    def __eq__(self, other):
        return (
            isinstance(other, GraphTensor)
            and self.genus == other.genus
            and self.ext == other.ext
            and self.right == other.right
            and self.terms == other.terms
        )

    def map_left(self, f):
        """Apply a linear map (Graph -> GraphSum) to the left factors."""
        out = GraphTensor(self.genus, self.ext, self.right)
        for (gr, mon), c in self.terms.items():
            img = f(gr)
            part = GraphTensor(
                self.genus,
                self.ext,
                self.right,
                {(g2, mon): c * c2 for g2, c2 in img.terms.items()},
                _normalized=True,
            )
            out = out + part
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        from .bv import gen_str

        parts = []
        for (gr, mon), c in sorted(
            self.terms.items(), key=lambda kv: (kv[0][1], kv[0][0]._key())
        ):
            body = ".".join(gen_str(g) for g in mon) or "1"
            parts.append(f"({c}) {format_graph(gr)} (x) {body}")
        return "\n".join(parts)

    __repr__ = __str__


def g_coaction(a: GraphSum, T, new_label=None) -> GraphTensor:
    """Collapse the cluster T of external vertices.

    Each edge with both endpoints in T independently stays (a tadpole at
    the merged vertex) or moves to the right-hand factor as the pair
    class of its endpoints (a tadpole extracting as a frame class); the
    sign moves the extracted edges, in stored order, past the kept
    orientation items standing after them.  Decorations on T migrate to
    the merged vertex.
    """
    T = tuple(sorted(set(T)))
    if not T:
        raise ValueError("empty cluster")
    if any(t not in a.ext for t in T):
        raise ValueError("cluster is not a subset of the external labels")
    if new_label is None:
        new_label = T[0]
    rest = tuple(x for x in a.ext if x not in T)
    if new_label in rest:
        raise ValueError(f"merged label {new_label!r} collides with a survivor")
    left_ext = tuple(sorted(rest + (new_label,)))
    right = BV(T)
    Tset = set(T)
    out: Dict = {}
    for gr, c in a.terms.items():
        inT = [p for p, (u, v) in enumerate(gr.edges) if u in Tset and v in Tset]
        nO = len(gr.odd)
        for mask in range(1 << len(inT)):
            chosen = {inT[i] for i in range(len(inT)) if (mask >> i) & 1}
            inv = 0
            later_kept = sum(1 for q in range(len(gr.edges)) if q not in chosen)
            for p in range(len(gr.edges)):
                if p in chosen:
                    inv += later_kept + nO
                else:
                    later_kept -= 1
            sign = (-1) ** (inv & 1)
            rgens = [gr.edges[p] for p in sorted(chosen)]

            def m(w):
                return new_label if w in Tset else w

            edges = []
            for p, (u, v) in enumerate(gr.edges):
                if p in chosen:
                    continue
                w1, w2 = m(u), m(v)
                edges.append((min(w1, w2), max(w1, w2)))
            left = _renumber(
                gr.genus,
                left_ext,
                gr.internal,
                edges,
                [(m(w), cls) for (w, cls) in gr.odd],
                [m(w) for w in gr.even],
            )
            s, canon = canonicalize(left)
            if s == 0:
                continue
            relem = AlgElement(right, [(1, tuple(map(tuple, rgens)))])
            for mon, cr in relem.terms.items():
                key = (canon, mon)
                val = out.get(key, Fraction(0)) + c * sign * s * cr
                if val:
                    out[key] = val
                elif key in out:
                    del out[key]
    return GraphTensor(a.genus, left_ext, right, out, _normalized=True)


# --------------------------------------------------------------- projection


def project_to_mog(a: GraphSum) -> MogElement:
    """Kill graphs with internal vertices; read external-only graphs as
    products of pair, frame and surface classes in orientation order."""
    out = mog_zero(a.genus, a.ext)
    for gr, c in a.terms.items():
        if gr.nint:
            continue
        acc = mog_one(a.genus, a.ext)
        for u, v in gr.edges:
            acc = mog_multiply(acc, mog_generator(a.genus, a.ext, u, v))
        for v, cls in gr.odd:
            acc = mog_multiply(acc, mog_h(a.genus, a.ext, v, cls))
        for v in gr.even:
            acc = mog_multiply(acc, mog_h(a.genus, a.ext, v, H_NU))
        out = out + acc.scale(c)
    return out


# --------------------------------------------------------------- text format

_GRAPH_RE = re.compile(
    r"genus=(\d+);\s*ext=(\[[^\]]*\]);\s*int=(\d+);"
    r"\s*edges=(\[[^\]]*\]);\s*deco=\{(.*)\}\s*$"
)
_DECO_RE = re.compile(r"(\d+)\s*:\s*\[([^\]]*)\]")
_CLS_RE = re.compile(r"([ab])(\d+)$|^nu$")


def format_graph(gr: Graph) -> str:
    """Render one graph; degree-one decorations are listed per vertex in
    stored order, so the text is orientation-faithful whenever the
    stored order groups decorations by vertex (canonical forms do)."""
    deco: Dict[int, List[str]] = {}
    for v, cls in gr.odd:
        deco.setdefault(v, []).append(_cls_str(cls))
    for v in gr.even:
        deco.setdefault(v, []).append("nu")
    dstr = ",".join(
        f"{v}:[{','.join(deco[v])}]" for v in sorted(deco)
    )
    estr = ",".join(f"({u},{v})" for u, v in gr.edges)
    return (
        f"genus={gr.genus}; ext={list(gr.ext)}; int={gr.nint}; "
        f"edges=[{estr}]; deco={{{dstr}}}"
    )


def parse_graph(text: str) -> Graph:
    """Parse the graph text format back into a decorated graph."""
    m = _GRAPH_RE.match(text.strip())
    if not m:
        raise ValueError(f"cannot parse graph record: {text!r}")
    genus = int(m.group(1))
    ext = tuple(literal_eval(m.group(2)))
    nint = int(m.group(3))
    edges_raw = m.group(4).strip()
    edges = literal_eval(edges_raw) if edges_raw != "[]" else []
    if isinstance(edges, tuple) and edges and isinstance(edges[0], int):
        edges = [edges]  # a single pair parses as one tuple
    odd: List = []
    even: List = []
    for dm in _DECO_RE.finditer(m.group(5)):
        v = int(dm.group(1))
        for tok in dm.group(2).split(","):
            tok = tok.strip()
            if not tok:
                continue
            if tok == "nu":
                even.append(v)
            else:
                cm = re.fullmatch(r"([ab])(\d+)", tok)
                if not cm:
                    raise ValueError(f"bad decoration token {tok!r}")
                odd.append((v, (cm.group(1), int(cm.group(2)))))
    return Graph(genus, ext, nint, edges, odd, even)
