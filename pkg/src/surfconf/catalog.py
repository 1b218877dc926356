"""The model form catalog and the graph evaluation maps.

For a closed oriented surface presented as a bulk with handles, the
cohomology of the configuration spaces of framed points is represented
by a small catalog of stratified forms (see :mod:`.strata`):

* ``a^j`` — the handle-crossing 1-form: ``dt`` on the j-th handle;
* ``b^j`` — the dual 1-class: the angular class on the j-th handle,
  fed by the matching bulk pair classes;
* ``nu = a^1 b^1`` — the top class of the surface;
* ``eta`` — the frame (Euler) class of one framed point;
* ``omega`` — the two-point propagator, one value per stratum type,
  symmetric in the two points, restricting to the pair class when the
  points collide.

The genus-zero surface is modeled instead as two spheres joined by one
handle, with its own short catalog (``nu``, ``eta``, ``omega``).

A decorated graph is evaluated by the multiplicative rule ``map_A``:
every edge contributes the pulled-back propagator, every tadpole the
pulled-back frame class, every decoration the pulled-back surface
class, multiplied in orientation-word order (edges first, then the
degree-one decorations).  ``map_F`` integrates out the internal
vertices; ``partition_Z`` evaluates closed external-free graphs to a
number, which for this catalog must agree with the trivial partition
function ``z_trivial``.  ``genus0_f`` gives the closed-form value of
the iterated handle integrals of the genus-zero propagator products.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Tuple

from . import polyform
from .bv import STAR, gen, under, over
from .graphs import Graph
from .polyform import PolyForm
from .strata import (
    Geometry,
    StratifiedElement,
    Stratum,
    StratumValue,
    all_strata,
    handles_geometry,
    pullback,
    spheres_geometry,
    total_fiber_integrate,
    total_wedge,
    total_wedge_all,
)


def _slot_key(S: Stratum, **at) -> Tuple:
    """A per-slot monomial tuple with the named slots filled: ``bulk=``
    (first bulk slot), ``L=``/``R=`` (sphere slots), ``packet=((i,j),
    mon)`` via the ``packets`` dict."""
    key = [()] * S.nslots
    packets = at.pop("packets", {})
    for name, mon in at.items():
        if name == "bulk":
            key[S.slot_index(("bulk", S.geom.bulk_codes[0]))] = tuple(mon)
        elif name in ("L", "R"):
            key[S.slot_index(("bulk", name))] = tuple(mon)
        else:
            raise ValueError(f"unknown slot {name!r}")
    for (i, j), mon in packets.items():
        key[S.slot_index(("packet", i, j))] = tuple(mon)
    return tuple(key)


@dataclass(frozen=True)
class ModelFormCatalog:
    """All model forms at one genus: the one-point classes ``a``/``b``
    (empty at genus zero), ``nu``, ``eta``, and the two-point ``omega``."""

    genus: int
    geom: Geometry
    a: Tuple[StratifiedElement, ...]
    b: Tuple[StratifiedElement, ...]
    nu: StratifiedElement
    eta: StratifiedElement
    omega: StratifiedElement

    def form_a(self, j: int) -> StratifiedElement:
        return self.a[j - 1]

    def form_b(self, j: int) -> StratifiedElement:
        return self.b[j - 1]


# ------------------------------------------------------------- genus >= 1


def _build_a(geom: Geometry, j: int) -> StratifiedElement:
    vals = {}
    for S in all_strata(geom, (1,)):
        tgt = S.assignment(1)
        if tgt == 0 or tgt[0] != j:
            continue
        vals[S] = StratumValue(
            S, {_slot_key(S): PolyForm.dvar(S.form_shape, j, 1)}
        )
    return StratifiedElement(geom, (1,), vals)


def _build_b(geom: Geometry, j: int) -> StratifiedElement:
    vals = {}
    for S in all_strata(geom, (1,)):
        tgt = S.assignment(1)
        shape = S.form_shape
        one = PolyForm.const(shape, 1)
        if tgt == 0:
            if j == 1:
                mon = {(gen(1, under(1)),): one}
            else:
                mon = {
                    (gen(1, under(j)),): one,
                    (gen(1, over(j)),): one.scale(-1),
                }
            vals[S] = StratumValue(
                S, {_slot_key(S, bulk=m): f for m, f in mon.items()}
            )
        elif tgt[0] == j:
            vals[S] = StratumValue(
                S, {_slot_key(S, packets={tgt: (gen(1, STAR),)}): one}
            )
    return StratifiedElement(geom, (1,), vals)


def _build_eta(geom: Geometry) -> StratifiedElement:
    vals = {}
    for S in all_strata(geom, (1,)):
        tgt = S.assignment(1)
        shape = S.form_shape
        one = PolyForm.const(shape, 1)
        if tgt == 0:
            vals[S] = StratumValue(S, {
                _slot_key(S, bulk=(gen(1, 1),)): one,
                _slot_key(S, bulk=(gen(1, under(1)),)): one.scale(-1),
            })
        else:
            i = tgt[0]
            coeff = (
                one.scale(-1) if i == 1
                else PolyForm.var(shape, i, 1).scale(-2)
            )
            vals[S] = StratumValue(S, {
                _slot_key(S, packets={tgt: (gen(1, 1),)}): one,
                _slot_key(S, packets={tgt: (gen(1, STAR),)}): coeff,
            })
    return StratifiedElement(geom, (1,), vals)


def _build_omega(geom: Geometry) -> StratifiedElement:
    vals = {}
    for S in all_strata(geom, (1, 2)):
        t1, t2 = S.assignment(1), S.assignment(2)
        shape = S.form_shape
        one = PolyForm.const(shape, 1)
        half = Fraction(1, 2)
        parts: Dict = {}

        def put(key, f):
            if key in parts:
                parts[key] = parts[key] + f
            else:
                parts[key] = f

        if t1 == 0 and t2 == 0:
            put(_slot_key(S, bulk=(gen(1, 2),)), one)
            put(_slot_key(S, bulk=(gen(1, under(1)),)), one.scale(-half))
            put(_slot_key(S, bulk=(gen(2, under(1)),)), one.scale(-half))
        elif (t1 == 0) != (t2 == 0):
            q, p, tgt = (1, 2, t2) if t1 == 0 else (2, 1, t1)
            i = tgt[0]
            t = PolyForm.var(shape, i, tgt[1])
            if i == 1:
                put(_slot_key(S, bulk=(gen(q, under(1)),)),
                    one.scale(half) - t)
                put(_slot_key(S, packets={tgt: (gen(p, STAR),)}),
                    one.scale(-half) + t)
            else:
                put(_slot_key(S, bulk=(gen(q, under(i)),)), one - t)
                put(_slot_key(S, bulk=(gen(q, over(i)),)), t)
                put(_slot_key(S, bulk=(gen(q, under(1)),)), one.scale(-half))
        elif t1 == t2:
            t = PolyForm.var(shape, t1[0], t1[1])
            coeff = one.scale(-half) if t1[0] == 1 else -t
            put(_slot_key(S, packets={t1: (gen(1, 2),)}), one)
            put(_slot_key(S, packets={t1: (gen(1, STAR),)}), coeff)
            put(_slot_key(S, packets={t1: (gen(2, STAR),)}), coeff)
        elif t1[0] == t2[0]:
            i = t1[0]
            p, q = (1, 2) if t1[1] < t2[1] else (2, 1)
            tp, tq = (t1, t2) if t1[1] < t2[1] else (t2, t1)
            u1 = PolyForm.var(shape, i, tp[1])
            u2 = PolyForm.var(shape, i, tq[1])
            if i == 1:
                put(_slot_key(S, packets={tp: (gen(p, STAR),)}),
                    one.scale(half) + u1 - u2)
                put(_slot_key(S, packets={tq: (gen(q, STAR),)}),
                    one.scale(-half) + u2 - u1)
            else:
                put(_slot_key(S, packets={tp: (gen(p, STAR),)}), one - u2)
                put(_slot_key(S, packets={tq: (gen(q, STAR),)}), -u1)
        else:
            if t1[0] == 1 or t2[0] == 1:
                p, tp = (1, t1) if t1[0] == 1 else (2, t2)
                t = PolyForm.var(shape, 1, tp[1])
                put(_slot_key(S, packets={tp: (gen(p, STAR),)}),
                    one.scale(-half) + t)
            # two distinct handles of index >= 2: zero
        sv = StratumValue(S, parts)
        if not sv.is_zero():
            vals[S] = sv
    return StratifiedElement(geom, (1, 2), vals)


# --------------------------------------------------------------- genus == 0


def _build_nu_g0(geom: Geometry) -> StratifiedElement:
    vals = {}
    for S in all_strata(geom, (1,)):
        tgt = S.assignment(1)
        if tgt in S.geom.bulk_codes:
            continue
        vals[S] = StratumValue(S, {
            _slot_key(S, packets={tgt: (gen(1, STAR),)}):
                PolyForm.dvar(S.form_shape, 1, 1).scale(-1)
        })
    return StratifiedElement(geom, (1,), vals)


def _build_eta_g0(geom: Geometry) -> StratifiedElement:
    vals = {}
    for S in all_strata(geom, (1,)):
        tgt = S.assignment(1)
        shape = S.form_shape
        one = PolyForm.const(shape, 1)
        if tgt in S.geom.bulk_codes:
            key = (_slot_key(S, L=(gen(1, 1),)) if tgt == "L"
                   else _slot_key(S, R=(gen(1, 1),)))
            vals[S] = StratumValue(S, {key: one})
        else:
            t = PolyForm.var(shape, 1, 1)
            vals[S] = StratumValue(S, {
                _slot_key(S, packets={tgt: (gen(1, 1),)}): one,
                _slot_key(S, packets={tgt: (gen(1, STAR),)}):
                    (one - t).scale(-2),
            })
    return StratifiedElement(geom, (1,), vals)


def _build_omega_g0(geom: Geometry) -> StratifiedElement:
    vals = {}
    for S in all_strata(geom, (1, 2)):
        t1, t2 = S.assignment(1), S.assignment(2)
        shape = S.form_shape
        one = PolyForm.const(shape, 1)
        parts: Dict = {}

        def put(key, f):
            if key in parts:
                parts[key] = parts[key] + f
            else:
                parts[key] = f

        on_sphere1 = t1 in S.geom.bulk_codes
        on_sphere2 = t2 in S.geom.bulk_codes
        if on_sphere1 and on_sphere2:
            if t1 == t2:
                key = (_slot_key(S, L=(gen(1, 2),)) if t1 == "L"
                       else _slot_key(S, R=(gen(1, 2),)))
                put(key, one)
            # opposite spheres: zero
        elif on_sphere1 != on_sphere2:
            code, p, tp = (t1, 2, t2) if on_sphere1 else (t2, 1, t1)
            t = PolyForm.var(shape, 1, tp[1])
            put(_slot_key(S, packets={tp: (gen(p, STAR),)}),
                t if code == "R" else t - one)
        elif t1 == t2:
            t = PolyForm.var(shape, 1, t1[1])
            put(_slot_key(S, packets={t1: (gen(1, 2),)}), one)
            put(_slot_key(S, packets={t1: (gen(1, STAR),)}), t - one)
            put(_slot_key(S, packets={t1: (gen(2, STAR),)}), t - one)
        else:
            p, q = (1, 2) if t1[1] < t2[1] else (2, 1)
            tp, tq = (t1, t2) if t1[1] < t2[1] else (t2, t1)
            u1 = PolyForm.var(shape, 1, tp[1])
            u2 = PolyForm.var(shape, 1, tq[1])
            put(_slot_key(S, packets={tp: (gen(p, STAR),)}), u1)
            put(_slot_key(S, packets={tq: (gen(q, STAR),)}), u2 - one)
        sv = StratumValue(S, parts)
        if not sv.is_zero():
            vals[S] = sv
    return StratifiedElement(geom, (1, 2), vals)


@lru_cache(maxsize=None)
def build_catalog(g: int) -> ModelFormCatalog:
    """All model forms at genus ``g`` (the two-sphere variant at 0)."""
    if g < 0:
        raise ValueError("genus must be >= 0")
    if g == 0:
        geom = spheres_geometry()
        return ModelFormCatalog(
            0, geom, (), (),
            _build_nu_g0(geom), _build_eta_g0(geom), _build_omega_g0(geom),
        )
    geom = handles_geometry(g)
    a = tuple(_build_a(geom, j) for j in range(1, g + 1))
    b = tuple(_build_b(geom, j) for j in range(1, g + 1))
    nu = total_wedge(a[0], b[0])
    return ModelFormCatalog(g, geom, a, b, nu, _build_eta(geom),
                            _build_omega(geom))


# --------------------------------------------------------- graph evaluation


def _graph_labels(gr: Graph) -> Tuple[int, ...]:
    return tuple(sorted(gr.ext + gr.internal))


def map_A(gr: Graph) -> StratifiedElement:
    """The multiplicative evaluation of a decorated graph: every vertex
    becomes a point; edges pull back the propagator, tadpoles the frame
    class, decorations the surface classes; factors multiply in
    orientation-word order."""
    cat = build_catalog(gr.genus)
    labels = _graph_labels(gr)
    factors = []
    for u, v in gr.edges:
        if u == v:
            factors.append(pullback(cat.eta, {1: u}, labels))
        else:
            factors.append(pullback(cat.omega, {1: u, 2: v}, labels))
    for v, cls in gr.odd:
        base = cat.form_a(cls[1]) if cls[0] == "a" else cat.form_b(cls[1])
        factors.append(pullback(base, {1: v}, labels))
    for v in gr.even:
        factors.append(pullback(cat.nu, {1: v}, labels))
    return total_wedge_all(factors, cat.geom, labels)


def map_F(gr: Graph) -> StratifiedElement:
    """Integrate the internal vertices out of the graph evaluation."""
    return total_fiber_integrate(map_A(gr), gr.internal)


def scalar_value(a: StratifiedElement) -> Fraction:
    """The number represented by a stratified element with no points."""
    if a.labels != ():
        raise ValueError("the element still has points")
    (S,) = all_strata(a.geom, ())
    v = a.value_at(S)
    f = v.terms.get(((),) * S.nslots)
    if f is None:
        return Fraction(0)
    return f.terms.get(((), ()), Fraction(0))


def partition_Z(gr: Graph) -> Fraction:
    """Evaluate a closed (external-free) graph to a number by
    integrating out every vertex."""
    if gr.ext:
        raise ValueError("partition evaluation needs an external-free graph")
    return scalar_value(map_F(gr))


# ------------------------------------------------------------ golden forms


def genus0_f(r: int) -> PolyForm:
    """The value of the basic genus-zero handle integral with ``r``
    retained points, as a polynomial in their ordered positions: the sum
    over the insertion segments of (segment length) x (product of the
    position factors), which telescopes the piecewise-constant
    integrand."""
    if r < 1:
        raise ValueError("r must be >= 1")
    shape = (r,)

    def t(k: int) -> PolyForm:
        if k == 0:
            return PolyForm.zero(shape)
        if k == r + 1:
            return PolyForm.const(shape, 1)
        return PolyForm.var(shape, 1, k)

    one = PolyForm.const(shape, 1)
    total = PolyForm.zero(shape)
    for j in range(0, r + 1):
        piece = t(j + 1) - t(j)
        for k in range(1, j + 1):
            piece = polyform.wedge(piece, t(k))
        for k in range(j + 1, r + 1):
            piece = polyform.wedge(piece, t(k) - one)
        total = total + piece
    return total


def example_alpha(g: int) -> StratifiedElement:
    """The canonical degree-1 primitive: twice the sum over the handles
    of index at least two of the integrated one-loop graphs."""
    if g < 2:
        raise ValueError("needs genus >= 2")
    out = None
    for j in range(2, g + 1):
        gr = Graph(g, (1,), 1, edges=((1, 2),),
                   odd=((2, ("a", j)), (2, ("b", j))))
        fj = map_F(gr)
        out = fj if out is None else out + fj
    return out.scale(2)
