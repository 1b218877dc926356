"""Stratified differential forms on a decomposed framed surface.

A closed oriented surface is cut into bulk pieces with attached handles
(cylinders ``[0,1] x S^1``).  Two geometries are supported:

* ``handles``: one genus-g bulk with g handles, the left end of handle j
  feeding the marked bulk point ``_uj`` and the right end feeding the
  point at infinity (j = 1) or the marked point ``_oj`` (j >= 2);
* ``spheres``: two spheres joined by a single handle (the genus-zero
  variant), the left end feeding the left sphere and the right end the
  right sphere.

A configuration of framed points degenerates onto finitely many strata:
every point either sits in a bulk piece or travels on a handle, and the
points on one handle are grouped into an ordered sequence of nonempty
packets of infinitesimally close clusters.  A :class:`Stratum` records
the packet sizes per handle and the assignment of each point label to a
bulk code or a packet.

The value of a stratified form on a stratum is a finite sum

    bulk monomial (x) packet monomial (x) ... (x) packet monomial * form

with one algebra factor per slot (bulk slots first, then the packets of
each handle in order) and a polynomial differential form in the packet
positions; see :class:`StratumValue`.  Values on different strata are
coupled: restricting to a codimension-one face (two adjacent packets
colliding, or an outermost packet slipping into a handle end) must agree
with the cocomposition of the value on the coarser stratum — the
``check_continuity`` routine verifies exactly that, face by face.

All operations fix one Koszul convention: the form factor sits to the
right of every algebra factor, and any odd symbol moving past another
costs a sign.  Provided stratum-wise:

* ``total_d`` / ``total_wedge`` — the CDGA structure,
* ``total_coaction`` — collapsing a cluster of points to a single point,
  with ``extend_points`` as the point-insertion (counit) companion,
* ``total_boundary`` — the degree -1 operation reading off the class of
  two points orbiting infinitesimally close,
* ``total_fiber_integrate`` — integrating out a set of points, keeping
  per integrated point the angular coefficient of its own packet and
  integrating its position along the handle,
* ``stokes_defect`` — the combinatorial Stokes identity (must vanish).

``dump_element`` / ``parse_element`` serialize stratified elements one
record per stratum, ``(r_1..r_g | f) : ...``, for golden-file tests.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Tuple

from . import polyform
from .bv import (
    BV,
    BVC,
    BVGG,
    STAR,
    AlgElement,
    Presentation,
    boundary,
    cobracket_projection,
    cocompose,
    cocompose_at_marked,
    gen,
    gen_str,
    involution,
    label_key,
    mon_key,
    multiply,
    over,
    split_packet,
    under,
)
from .polyform import PolyForm


# ------------------------------------------------------------------ geometry


@dataclass(frozen=True)
class Geometry:
    """The places points may occupy: bulk pieces and handles.

    ``handles``: one bulk (code ``0``) of the given genus with that many
    handles.  ``spheres``: two bulks (codes ``"L"``, ``"R"``) joined by a
    single handle; genus is 0 by definition.
    """

    kind: str
    genus: int = 0

    def __post_init__(self):
        if self.kind not in ("handles", "spheres"):
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.kind == "handles" and self.genus < 0:
            raise ValueError("genus must be >= 0")
        if self.kind == "spheres" and self.genus != 0:
            raise ValueError("the two-sphere geometry is a genus-0 model")

    @property
    def bulk_codes(self) -> Tuple:
        return (0,) if self.kind == "handles" else ("L", "R")

    @property
    def num_handles(self) -> int:
        return self.genus if self.kind == "handles" else 1

    def bulk_pres(self, code, labels) -> Presentation:
        if self.kind == "handles" and self.genus >= 1:
            return BVGG(self.genus, labels)
        return BV(labels)

    def end_rule(self, handle: int, side: str) -> Tuple:
        """For one handle end: (bulk code it feeds, extraction target,
        whether an extra involution twists the extracted factor)."""
        if side not in ("left", "right"):
            raise ValueError(f"bad side {side!r}")
        if self.kind == "handles":
            if side == "left":
                return 0, under(handle), False
            return 0, ("inf" if handle == 1 else over(handle)), False
        if side == "left":
            return "L", "inf", True
        return "R", "inf", False


def handles_geometry(genus: int) -> Geometry:
    return Geometry("handles", genus)


def spheres_geometry() -> Geometry:
    return Geometry("spheres", 0)


def _sorted_labels(labels) -> Tuple:
    out = tuple(sorted(set(labels), key=label_key))
    if len(out) != len(tuple(labels)):
        raise ValueError("duplicate labels")
    return out


# ------------------------------------------------------------------- stratum


@dataclass(frozen=True)
class Stratum:
    """Packet sizes per handle plus the label assignment.

    ``sizes[i-1]`` is the number of packets on handle ``i``; ``assign``
    is parallel to the sorted ``labels`` and holds either a bulk code or
    a packet address ``(i, j)`` with ``1 <= j <= sizes[i-1]``.  Every
    packet must be hit (packets are nonempty by definition)."""

    geom: Geometry
    labels: Tuple
    sizes: Tuple[int, ...]
    assign: Tuple

    def __post_init__(self):
        labels = _sorted_labels(self.labels)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "sizes", tuple(int(r) for r in self.sizes))
        object.__setattr__(self, "assign", tuple(self.assign))
        if len(self.sizes) != self.geom.num_handles:
            raise ValueError("one packet count per handle required")
        if any(r < 0 for r in self.sizes):
            raise ValueError("negative packet count")
        if len(self.assign) != len(labels):
            raise ValueError("assignment must be parallel to the labels")
        seen = {}
        for tgt in self.assign:
            if tgt in self.geom.bulk_codes:
                continue
            i, j = tgt
            if not (1 <= i <= self.geom.num_handles and 1 <= j <= self.sizes[i - 1]):
                raise ValueError(f"packet address {tgt!r} out of range")
            seen[tgt] = seen.get(tgt, 0) + 1
        for i, r in enumerate(self.sizes, start=1):
            for j in range(1, r + 1):
                if (i, j) not in seen:
                    raise ValueError(f"empty packet ({i}, {j})")

    # -- slots ---------------------------------------------------------

    def assignment(self, x):
        return self.assign[self.labels.index(x)]

    def packet(self, i: int, j: int) -> Tuple:
        return tuple(x for x, t in zip(self.labels, self.assign) if t == (i, j))

    def bulk_points(self, code=None) -> Tuple:
        if code is None:
            code = self.geom.bulk_codes[0]
        return tuple(x for x, t in zip(self.labels, self.assign) if t == code)

    @property
    def slot_specs(self) -> Tuple:
        """Slot order: bulk slots, then each handle's packets in order."""
        specs = [("bulk", c) for c in self.geom.bulk_codes]
        for i, r in enumerate(self.sizes, start=1):
            specs.extend(("packet", i, j) for j in range(1, r + 1))
        return tuple(specs)

    def slot_index(self, spec) -> int:
        return self.slot_specs.index(spec)

    def slot_labels(self, spec) -> Tuple:
        if spec[0] == "bulk":
            return self.bulk_points(spec[1])
        return self.packet(spec[1], spec[2])

    def slot_pres(self, spec) -> Presentation:
        if spec[0] == "bulk":
            return self.geom.bulk_pres(spec[1], self.slot_labels(spec))
        return BVC(self.slot_labels(spec))

    @property
    def presentations(self) -> Tuple[Presentation, ...]:
        return _stratum_presentations(self)

    @property
    def nslots(self) -> int:
        return len(self.geom.bulk_codes) + sum(self.sizes)

    @property
    def form_shape(self) -> Tuple[int, ...]:
        return self.sizes

    def sort_key(self):
        enc = []
        for tgt in self.assign:
            if tgt in self.geom.bulk_codes:
                enc.append((0, self.geom.bulk_codes.index(tgt), 0))
            else:
                enc.append((1, tgt[0], tgt[1]))
        return (sum(self.sizes), self.sizes, tuple(enc))

    def __str__(self) -> str:
        return format_stratum(self)

    __repr__ = __str__


@lru_cache(maxsize=None)
def _stratum_presentations(S: Stratum) -> Tuple[Presentation, ...]:
    return tuple(S.slot_pres(spec) for spec in S.slot_specs)


# ------------------------------------------------------------- enumeration


def _ordered_set_partitions(items: Tuple):
    """All ways to split ``items`` into an ordered sequence of nonempty
    blocks (each block kept label-sorted)."""
    if not items:
        yield ()
        return
    n = len(items)
    for size in range(1, n + 1):
        for block in itertools.combinations(items, size):
            block_set = set(block)
            others = tuple(x for x in items if x not in block_set)
            for tail in _ordered_set_partitions(others):
                yield (block,) + tail


@lru_cache(maxsize=None)
def all_strata(geom: Geometry, labels: Tuple) -> Tuple[Stratum, ...]:
    """Every stratum of the model on the given labels, sorted canonically."""
    labels = _sorted_labels(labels)
    H = geom.num_handles
    choices = tuple(("bulk", c) for c in geom.bulk_codes)
    choices += tuple(("handle", i) for i in range(1, H + 1))
    out = []
    for vec in itertools.product(choices, repeat=len(labels)):
        per_handle = {i: tuple(x for x, c in zip(labels, vec)
                               if c == ("handle", i))
                      for i in range(1, H + 1)}
        for blocks in itertools.product(
            *(_ordered_set_partitions(per_handle[i]) for i in range(1, H + 1))
        ):
            sizes = tuple(len(b) for b in blocks)
            where = {}
            for i, handle_blocks in enumerate(blocks, start=1):
                for j, block in enumerate(handle_blocks, start=1):
                    for x in block:
                        where[x] = (i, j)
            assign = tuple(
                c[1] if c[0] == "bulk" else where[x]
                for x, c in zip(labels, vec)
            )
            out.append(Stratum(geom, labels, sizes, assign))
    out.sort(key=Stratum.sort_key)
    return tuple(out)


def enumerate_strata(genus: int, labels) -> List[Stratum]:
    """All strata of the genus-g handle model on the given point labels."""
    return list(all_strata(handles_geometry(genus), _sorted_labels(labels)))


# ---------------------------------------------------------------- the value


def _as_polyform(shape, f) -> PolyForm:
    if isinstance(f, PolyForm):
        if f.shape != tuple(shape):
            raise ValueError("form shape does not match the stratum")
        return f
    return PolyForm.const(shape, f)


class StratumValue:
    """A sparse sum of (per-slot algebra monomials) * (polynomial form).

    ``terms`` maps a tuple of one normalized monomial per slot to a
    nonzero :class:`PolyForm` on the stratum's packet-position simplices.
    Coefficients live in the form factor."""

    __slots__ = ("stratum", "terms")

    def __init__(self, stratum: Stratum, terms=None, _normalized=False):
        object.__setattr__(self, "stratum", stratum)
        shape = stratum.form_shape
        if terms is None:
            clean: Dict = {}
        elif _normalized:
            clean = dict(terms)
        else:
            pres = stratum.presentations
            clean = {}
            items = terms.items() if isinstance(terms, dict) else terms
            for key, f in items:
                f = _as_polyform(shape, f)
                if f.is_zero():
                    continue
                key = tuple(tuple(m) for m in key)
                if len(key) != len(pres):
                    raise ValueError("one monomial per slot required")
                expanded = [(Fraction(1), ())]
                for p, mon in zip(pres, key):
                    nf = AlgElement(p, {mon: Fraction(1)})
                    expanded = [
                        (c0 * c1, k0 + (m1,))
                        for c0, k0 in expanded
                        for m1, c1 in nf.terms.items()
                    ]
                    if not expanded:
                        break
                for c, k in expanded:
                    cur = clean.get(k)
                    val = f.scale(c) if cur is None else cur + f.scale(c)
                    if val.is_zero():
                        clean.pop(k, None)
                    else:
                        clean[k] = val
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("StratumValue is immutable")

    @staticmethod
    def zero(stratum: Stratum) -> "StratumValue":
        return StratumValue(stratum)

    @staticmethod
    def unit(stratum: Stratum) -> "StratumValue":
        key = ((),) * stratum.nslots
        return StratumValue(
            stratum, {key: PolyForm.const(stratum.form_shape, 1)},
            _normalized=True,
        )

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "StratumValue") -> "StratumValue":
        if self.stratum != other.stratum:
            raise ValueError("stratum mismatch")
        terms = dict(self.terms)
        for k, f in other.terms.items():
            cur = terms.get(k)
            val = f if cur is None else cur + f
            if val.is_zero():
                terms.pop(k, None)
            else:
                terms[k] = val
        return StratumValue(self.stratum, terms, _normalized=True)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "StratumValue":
        c = Fraction(c)
        if not c:
            return StratumValue(self.stratum)
        return StratumValue(
            self.stratum, {k: f.scale(c) for k, f in self.terms.items()},
            _normalized=True,
        )

    def __eq__(self, other):
        return (
            isinstance(other, StratumValue)
            and self.stratum == other.stratum
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.stratum, frozenset(self.terms.items())))

    def degrees(self) -> Tuple[int, ...]:
        degs = set()
        for key, f in self.terms.items():
            alg = sum(len(m) for m in key)
            degs.update(alg + d for d in f.degrees())
        return tuple(sorted(degs))

    def __str__(self):
        return format_value(self)

    __repr__ = __str__


# --------------------------------------------------------- stratified element


class StratifiedElement:
    """A value on every stratum of the model (zero values omitted)."""

    __slots__ = ("geom", "labels", "values")

    def __init__(self, geom: Geometry, labels, values=None):
        object.__setattr__(self, "geom", geom)
        object.__setattr__(self, "labels", _sorted_labels(labels))
        clean: Dict[Stratum, StratumValue] = {}
        if values:
            items = values.items() if isinstance(values, dict) else values
            for S, v in items:
                if S.geom != geom or S.labels != self.labels:
                    raise ValueError("stratum does not belong to this model")
                if not isinstance(v, StratumValue):
                    v = StratumValue(S, v)
                if v.is_zero():
                    continue
                cur = clean.get(S)
                val = v if cur is None else cur + v
                if val.is_zero():
                    clean.pop(S, None)
                else:
                    clean[S] = val
        object.__setattr__(self, "values", clean)

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("StratifiedElement is immutable")

    @staticmethod
    def zero(geom: Geometry, labels) -> "StratifiedElement":
        return StratifiedElement(geom, labels)

    @staticmethod
    def unit(geom: Geometry, labels) -> "StratifiedElement":
        labels = _sorted_labels(labels)
        return StratifiedElement(
            geom, labels,
            {S: StratumValue.unit(S) for S in all_strata(geom, labels)},
        )

    def value_at(self, S: Stratum) -> StratumValue:
        v = self.values.get(S)
        return v if v is not None else StratumValue.zero(S)

    def is_zero(self) -> bool:
        return not self.values

    def __add__(self, other: "StratifiedElement") -> "StratifiedElement":
        if (self.geom, self.labels) != (other.geom, other.labels):
            raise ValueError("model mismatch")
        vals = dict(self.values)
        for S, v in other.values.items():
            cur = vals.get(S)
            val = v if cur is None else cur + v
            if val.is_zero():
                vals.pop(S, None)
            else:
                vals[S] = val
        out = StratifiedElement(self.geom, self.labels)
        object.__setattr__(out, "values", vals)
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "StratifiedElement":
        c = Fraction(c)
        out = StratifiedElement(self.geom, self.labels)
        if c:
            object.__setattr__(
                out, "values", {S: v.scale(c) for S, v in self.values.items()}
            )
        return out

    def __eq__(self, other):
        return (
            isinstance(other, StratifiedElement)
            and (self.geom, self.labels) == (other.geom, other.labels)
            and self.values == other.values
        )

    def __hash__(self):
        return hash((self.geom, self.labels, frozenset(self.values.items())))

    def degrees(self) -> Tuple[int, ...]:
        degs = set()
        for v in self.values.values():
            degs.update(v.degrees())
        return tuple(sorted(degs))

    def __str__(self):
        return dump_element(self)

    __repr__ = __str__


def element_from(geom: Geometry, labels, entries) -> StratifiedElement:
    """Build from {stratum: iterable of (key, form-or-scalar)} data."""
    labels = _sorted_labels(labels)
    return StratifiedElement(
        geom, labels, {S: StratumValue(S, list(data)) for S, data in entries.items()}
    )


# ----------------------------------------------------------------- the faces


def stratum_faces(S: Stratum) -> List[Tuple]:
    """Codimension-one faces: adjacent packets colliding, or an outermost
    packet absorbed into its handle end."""
    faces = []
    for i, r in enumerate(S.sizes, start=1):
        for j in range(1, r):
            faces.append(("collide", i, j))
        if r >= 1:
            faces.append(("left", i))
            faces.append(("right", i))
    return faces


def face_stratum(S: Stratum, face) -> Stratum:
    """The coarser stratum at the given face of ``S``."""
    kind = face[0]
    i = face[1]
    r = S.sizes[i - 1]
    sizes = list(S.sizes)
    sizes[i - 1] = r - 1
    if kind == "collide":
        j = face[2]
        if not 1 <= j <= r - 1:
            raise ValueError("no such collision face")

        def remap(tgt):
            if tgt in S.geom.bulk_codes or tgt[0] != i:
                return tgt
            return (i, tgt[1] if tgt[1] <= j else tgt[1] - 1)

    elif kind in ("left", "right"):
        if r < 1:
            raise ValueError("handle has no packets")
        gone = 1 if kind == "left" else r
        code = S.geom.end_rule(i, kind)[0]

        def remap(tgt):
            if tgt in S.geom.bulk_codes or tgt[0] != i:
                return tgt
            if tgt[1] == gone:
                return code
            return (i, tgt[1] - 1 if tgt[1] > gone else tgt[1])

    else:
        raise ValueError(f"unknown face {face!r}")
    return Stratum(S.geom, S.labels, tuple(sizes), tuple(remap(t) for t in S.assign))


def _face_restrict(v: StratumValue, face) -> Dict:
    """The finer stratum's value restricted to the face: same slot keys,
    forms restricted to the face of the simplex product."""
    out: Dict = {}
    for key, f in v.terms.items():
        rf = polyform.restrict_face(f, face)
        if rf.is_zero():
            continue
        cur = out.get(key)
        val = rf if cur is None else cur + rf
        if val.is_zero():
            out.pop(key, None)
        else:
            out[key] = val
    return out


def _face_cocompose(vt: StratumValue, S: Stratum, face, St: Stratum) -> Dict:
    """The coarser stratum's value pushed onto the face of ``S`` via the
    cocomposition appropriate to the face type."""
    kind = face[0]
    i = face[1]
    out: Dict = {}

    def put(key, f):
        if f.is_zero():
            return
        cur = out.get(key)
        val = f if cur is None else cur + f
        if val.is_zero():
            out.pop(key, None)
        else:
            out[key] = val

    if kind == "collide":
        j = face[2]
        low = S.packet(i, j)
        d = S.slot_index(("packet", i, j))
        st_slot = St.slot_index(("packet", i, j))
        pres = St.presentations[st_slot]
        for key, f in vt.terms.items():
            alg = AlgElement(pres, {key[st_slot]: Fraction(1)}, _normalized=True)
            tensor = split_packet(alg, low)
            for (m_low, m_up), c in tensor.terms.items():
                lst = list(key)
                lst[st_slot] = m_low
                lst.insert(st_slot + 1, m_up)
                put(tuple(lst), f.scale(c))
        return out

    side = kind
    r = S.sizes[i - 1]
    pkt = (i, 1) if side == "left" else (i, r)
    P = S.packet(*pkt)
    code, target, extra_inv = S.geom.end_rule(i, side)
    d = S.slot_index(("packet",) + pkt)
    b = S.slot_index(("bulk", code))
    pres_b = St.presentations[b]
    for key, f in vt.terms.items():
        alg = AlgElement(pres_b, {key[b]: Fraction(1)}, _normalized=True)
        tensor = cocompose_at_marked(alg, P, target)
        if extra_inv:
            tensor = tensor.map_left(involution)
        between = sum(len(key[s]) for s in range(b + 1, d))
        for (m_ext, m_rem), c in tensor.terms.items():
            sign = -1 if (len(m_ext) * (len(m_rem) + between)) % 2 else 1
            lst = list(key)
            lst[b] = m_rem
            lst.insert(d, m_ext)
            put(tuple(lst), f.scale(sign * c))
    return out


@dataclass
class FaceViolation:
    """One failed matching condition, with both sides for inspection."""

    stratum: Stratum
    face: Tuple
    coarse: Stratum
    restricted: Dict
    cocomposed: Dict

    def __str__(self):
        return (
            f"face {self.face} of {format_stratum(self.stratum)} "
            f"(coarse side {format_stratum(self.coarse)}): "
            f"restriction != cocomposition"
        )

    __repr__ = __str__


def check_continuity(a: StratifiedElement) -> List[FaceViolation]:
    """Verify every face matching condition; return the violations."""
    out = []
    for S in all_strata(a.geom, a.labels):
        vS = a.value_at(S)
        for face in stratum_faces(S):
            St = face_stratum(S, face)
            vT = a.value_at(St)
            if vS.is_zero() and vT.is_zero():
                continue
            lhs = _face_restrict(vS, face)
            rhs = _face_cocompose(vT, S, face, St)
            if lhs != rhs:
                out.append(FaceViolation(S, face, St, lhs, rhs))
    return out


# ------------------------------------------------------------ CDGA structure


def total_d(a: StratifiedElement) -> StratifiedElement:
    """The differential: exterior derivative on the form factor, zero on
    the algebra factors, with the sign of crossing the algebra degree."""
    vals = {}
    for S, v in a.values.items():
        terms: Dict = {}
        for key, f in v.terms.items():
            sign = -1 if sum(len(m) for m in key) % 2 else 1
            df = polyform.exterior_d(f).scale(sign)
            if df.is_zero():
                continue
            cur = terms.get(key)
            val = df if cur is None else cur + df
            if val.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = val
        if terms:
            vals[S] = StratumValue(S, terms, _normalized=True)
    return StratifiedElement(a.geom, a.labels, vals)


def _form_pieces(f: PolyForm):
    """Split into homogeneous form-degree pieces as (degree, piece)."""
    by_deg: Dict[int, Dict] = {}
    for (expts, dts), c in f.terms.items():
        by_deg.setdefault(len(dts), {})[(expts, dts)] = c
    return [(d, PolyForm(f.shape, t)) for d, t in sorted(by_deg.items())]


def total_wedge(a: StratifiedElement, b: StratifiedElement) -> StratifiedElement:
    """Stratum-wise graded product (slotwise algebra product, wedge of
    forms, Koszul signs across all factors)."""
    if (a.geom, a.labels) != (b.geom, b.labels):
        raise ValueError("model mismatch")
    vals: Dict[Stratum, StratumValue] = {}
    for S, va in a.values.items():
        vb = b.values.get(S)
        if vb is None:
            continue
        pres = S.presentations
        terms: Dict = {}
        for k1, f1 in va.terms.items():
            deg1_suffix = [0] * (len(k1) + 1)
            for s in range(len(k1) - 1, -1, -1):
                deg1_suffix[s] = deg1_suffix[s + 1] + len(k1[s])
            for k2, f2 in vb.terms.items():
                cross = sum(len(k2[s]) * deg1_suffix[s + 1] for s in range(len(k2)))
                expanded = [(Fraction(1), ())]
                for p, m1, m2 in zip(pres, k1, k2):
                    prod = multiply(
                        AlgElement(p, {m1: Fraction(1)}, _normalized=True),
                        AlgElement(p, {m2: Fraction(1)}, _normalized=True),
                    )
                    expanded = [
                        (c0 * c, k0 + (m,))
                        for c0, k0 in expanded
                        for m, c in prod.terms.items()
                    ]
                    if not expanded:
                        break
                if not expanded:
                    continue
                deg2 = sum(len(m) for m in k2)
                for d1, f1p in _form_pieces(f1):
                    sign = -1 if (cross + d1 * deg2) % 2 else 1
                    ff = polyform.wedge(f1p, f2).scale(sign)
                    if ff.is_zero():
                        continue
                    for c, k in expanded:
                        cur = terms.get(k)
                        val = ff.scale(c) if cur is None else cur + ff.scale(c)
                        if val.is_zero():
                            terms.pop(k, None)
                        else:
                            terms[k] = val
        if terms:
            vals[S] = StratumValue(S, terms, _normalized=True)
    return StratifiedElement(a.geom, a.labels, vals)


def total_wedge_all(factors: Iterable[StratifiedElement],
                    geom: Geometry, labels) -> StratifiedElement:
    """Product of several stratified elements (unit for none)."""
    out = StratifiedElement.unit(geom, _sorted_labels(labels))
    for x in factors:
        out = total_wedge(out, x)
        if out.is_zero():
            break
    return out


# ------------------------------------------------------------- the coaction


class TotalTensor:
    """An element of (stratified model over S') (x) (pair algebra on T):
    ``parts`` maps each normalized right monomial to its stratified
    coefficient; ``right`` is the plain pair algebra on the collapsed
    cluster."""

    __slots__ = ("geom", "labels", "right", "parts")

    def __init__(self, geom: Geometry, labels, right: Presentation, parts=None):
        object.__setattr__(self, "geom", geom)
        object.__setattr__(self, "labels", _sorted_labels(labels))
        object.__setattr__(self, "right", right)
        clean: Dict = {}
        if parts:
            for m, el in (parts.items() if isinstance(parts, dict) else parts):
                if el.is_zero():
                    continue
                if (el.geom, el.labels) != (geom, self.labels):
                    raise ValueError("part does not live on the left model")
                cur = clean.get(m)
                val = el if cur is None else cur + el
                if val.is_zero():
                    clean.pop(m, None)
                else:
                    clean[m] = val
        object.__setattr__(self, "parts", clean)

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("TotalTensor is immutable")

    def part(self, mon) -> StratifiedElement:
        mon = tuple(mon)
        el = self.parts.get(mon)
        return el if el is not None else StratifiedElement.zero(self.geom, self.labels)

    def is_zero(self) -> bool:
        return not self.parts

    def __eq__(self, other):
        return (
            isinstance(other, TotalTensor)
            and (self.geom, self.labels, self.right)
            == (other.geom, other.labels, other.right)
            and self.parts == other.parts
        )

    def __add__(self, other: "TotalTensor") -> "TotalTensor":
        if (self.geom, self.labels, self.right) != (
            other.geom, other.labels, other.right,
        ):
            raise ValueError("tensor mismatch")
        parts = dict(self.parts)
        for m, el in other.parts.items():
            cur = parts.get(m)
            val = el if cur is None else cur + el
            if val.is_zero():
                parts.pop(m, None)
            else:
                parts[m] = val
        out = TotalTensor(self.geom, self.labels, self.right)
        object.__setattr__(out, "parts", parts)
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "TotalTensor":
        c = Fraction(c)
        out = TotalTensor(self.geom, self.labels, self.right)
        if c:
            object.__setattr__(
                out, "parts", {m: el.scale(c) for m, el in self.parts.items()}
            )
        return out

    def __str__(self):
        if not self.parts:
            return "0"
        bits = []
        for m in sorted(self.parts, key=mon_key):
            ms = ".".join(gen_str(g) for g in m) or "1"
            bits.append(f"[right {ms}]\n{dump_element(self.parts[m])}")
        return "\n".join(bits)

    __repr__ = __str__


def total_coaction(a: StratifiedElement, T, new_label=None) -> TotalTensor:
    """Collapse the cluster ``T`` of points to the single point
    ``new_label`` (default: the smallest label of ``T``), recording the
    infinitesimal pair algebra on ``T`` in the right tensor factor.

    Strata where ``T`` is spread over several slots contribute nothing:
    the cooperadic structure only probes the merged faces, and those are
    already determined by continuity."""
    T = _sorted_labels(T)
    if not T:
        raise ValueError("empty collapse set")
    for x in T:
        if x not in a.labels:
            raise ValueError(f"{x!r} is not a point of the model")
    new = T[0] if new_label is None else new_label
    rest = tuple(x for x in a.labels if x not in T)
    if new in rest:
        raise ValueError(f"new label {new!r} already present")
    new_labels = _sorted_labels(rest + (new,))
    right = BV(T)
    parts: Dict = {}
    Tset = set(T)
    for S, v in a.values.items():
        specs = S.slot_specs
        slot_of = {x: k for k, spec in enumerate(specs)
                   for x in S.slot_labels(spec)}
        slots = {slot_of[x] for x in T}
        if len(slots) != 1:
            continue
        s = slots.pop()
        new_assign = []
        for x, tgt in zip(S.labels, S.assign):
            if x in Tset:
                continue
            new_assign.append((x, tgt))
        new_assign.append((new, S.assign[S.labels.index(T[0])]))
        new_assign.sort(key=lambda p: label_key(p[0]))
        Snew = Stratum(S.geom, new_labels, S.sizes,
                       tuple(t for _, t in new_assign))
        pres_s = S.presentations[s]
        for key, f in v.terms.items():
            later = sum(len(key[t]) for t in range(s + 1, len(key)))
            alg = AlgElement(pres_s, {key[s]: Fraction(1)}, _normalized=True)
            tensor = cocompose(alg, T, new)
            for (m_rem, m_right), c in tensor.terms.items():
                lst = list(key)
                lst[s] = m_rem
                nk = tuple(lst)
                for d, fp in _form_pieces(f):
                    sign = -1 if (len(m_right) * (later + d)) % 2 else 1
                    piece = fp.scale(sign * c)
                    cur = parts.setdefault(m_right, {})
                    curv = cur.get(Snew)
                    entry = {nk: piece}
                    add = StratumValue(Snew, entry, _normalized=True)
                    val = add if curv is None else curv + add
                    if val.is_zero():
                        cur.pop(Snew, None)
                    else:
                        cur[Snew] = val
    return TotalTensor(
        a.geom, new_labels, right,
        {m: StratifiedElement(a.geom, new_labels, vals)
         for m, vals in parts.items()},
    )


def _stretch_form(f: PolyForm, new_shape, handle: int, pos: int) -> PolyForm:
    """Reinterpret a form after a fresh packet is inserted on ``handle``
    at position ``pos`` (old positions >= pos shift up by one)."""
    old_shape = f.shape
    n_new = polyform.nvars(new_shape)
    mapping = []
    for v in range(polyform.nvars(old_shape)):
        i, k = polyform.var_name(old_shape, v)
        if i == handle and k >= pos:
            k += 1
        mapping.append(polyform.var_index(new_shape, i, k))
    terms = {}
    for (expts, dts), c in f.terms.items():
        ne = [0] * n_new
        for v, e in enumerate(expts):
            ne[mapping[v]] = e
        nd = tuple(sorted(mapping[v] for v in dts))
        terms[(tuple(ne), nd)] = c
    return PolyForm(new_shape, terms)


def extend_points(a: StratifiedElement, q) -> StratifiedElement:
    """Insert a fresh point ``q``: the pullback along forgetting ``q``.
    On a stratum of the larger model the value is the value of ``a`` on
    the stratum with ``q`` deleted (constant across ``q``'s position)."""
    if q in a.labels:
        raise ValueError(f"label {q!r} already present")
    new_labels = _sorted_labels(a.labels + (q,))
    vals: Dict[Stratum, StratumValue] = {}

    def add(Snew, terms):
        v = StratumValue(Snew, terms, _normalized=True)
        if v.is_zero():
            return
        cur = vals.get(Snew)
        val = v if cur is None else cur + v
        if val.is_zero():
            vals.pop(Snew, None)
        else:
            vals[Snew] = val

    def insert_assign(S, tgt_of_q, shift_handle=None, shift_from=None):
        pairs = list(zip(S.labels, S.assign))
        if shift_handle is not None:
            pairs = [
                (x, (t[0], t[1] + 1)
                 if t not in S.geom.bulk_codes
                 and t[0] == shift_handle and t[1] >= shift_from
                 else t)
                for x, t in pairs
            ]
        pairs.append((q, tgt_of_q))
        pairs.sort(key=lambda p: label_key(p[0]))
        return tuple(t for _, t in pairs)

    for S, v in a.values.items():
        # q joins a bulk piece
        for code in a.geom.bulk_codes:
            Snew = Stratum(a.geom, new_labels, S.sizes, insert_assign(S, code))
            add(Snew, dict(v.terms))
        # q joins an existing packet
        for i, r in enumerate(S.sizes, start=1):
            for j in range(1, r + 1):
                Snew = Stratum(a.geom, new_labels, S.sizes,
                               insert_assign(S, (i, j)))
                add(Snew, dict(v.terms))
        # q rides alone in a fresh packet
        for i, r in enumerate(S.sizes, start=1):
            for p in range(1, r + 2):
                sizes = list(S.sizes)
                sizes[i - 1] = r + 1
                Snew = Stratum(
                    a.geom, new_labels, tuple(sizes),
                    insert_assign(S, (i, p), shift_handle=i, shift_from=p),
                )
                slot = Snew.slot_index(("packet", i, p))
                terms = {}
                for key, f in v.terms.items():
                    lst = list(key)
                    lst.insert(slot, ())
                    terms[tuple(lst)] = _stretch_form(f, tuple(sizes), i, p)
                add(Snew, terms)
    return StratifiedElement(a.geom, new_labels, vals)


def relabel(a: StratifiedElement, mapping: Dict) -> StratifiedElement:
    """Rename the points by an injective mapping (labels not mentioned
    keep their names).  Packet positions are untouched; slot monomials
    are renormalized in the renamed algebras."""
    table = {x: mapping.get(x, x) for x in a.labels}
    if len(set(table.values())) != len(table):
        raise ValueError("relabeling must be injective")
    new_labels = _sorted_labels(tuple(table.values()))
    vals: Dict[Stratum, StratumValue] = {}
    for S, v in a.values.items():
        pairs = sorted(
            ((table[x], t) for x, t in zip(S.labels, S.assign)),
            key=lambda p: label_key(p[0]),
        )
        Snew = Stratum(S.geom, new_labels, S.sizes, tuple(t for _, t in pairs))
        terms = []
        for key, f in v.terms.items():
            nk = tuple(
                tuple(gen(table.get(x, x), table.get(y, y)) for x, y in m)
                for m in key
            )
            terms.append((nk, f))
        sv = StratumValue(Snew, terms)
        if not sv.is_zero():
            cur = vals.get(Snew)
            vals[Snew] = sv if cur is None else cur + sv
    return StratifiedElement(a.geom, new_labels, vals)


def pullback(a: StratifiedElement, mapping: Dict, labels) -> StratifiedElement:
    """Pull back along the projection remembering only some points: send
    the points of ``a`` to their images under the injective ``mapping``
    and extend over the remaining ``labels``."""
    out = relabel(a, mapping)
    for q in _sorted_labels(labels):
        if q not in out.labels:
            out = extend_points(out, q)
    if out.labels != _sorted_labels(labels):
        raise ValueError("mapping does not land in the requested labels")
    return out


# ------------------------------------------------------- boundary operators


def total_boundary(a: StratifiedElement, i, j) -> StratifiedElement:
    """The degree -1 operation reading off the coefficient of the pair
    ``{i, j}`` orbiting infinitesimally close; the merged point keeps the
    smaller label."""
    if i == j or i not in a.labels or j not in a.labels:
        raise ValueError("two distinct point labels required")
    lo, hi = (i, j) if label_key(i) < label_key(j) else (j, i)
    new_labels = tuple(x for x in a.labels if x != hi)
    vals: Dict[Stratum, StratumValue] = {}
    for S, v in a.values.items():
        si = S.assignment(i)
        if si != S.assignment(j):
            continue
        specs = S.slot_specs
        s = S.slot_index(("bulk", si) if si in S.geom.bulk_codes
                         else ("packet",) + si)
        assign = tuple(t for x, t in zip(S.labels, S.assign) if x != hi)
        Snew = Stratum(S.geom, new_labels, S.sizes, assign)
        pres_s = S.presentations[s]
        terms: Dict = {}
        for key, f in v.terms.items():
            before = sum(len(key[t]) for t in range(s))
            out = boundary(
                AlgElement(pres_s, {key[s]: Fraction(1)}, _normalized=True),
                i, j,
            )
            if out.is_zero():
                continue
            for d, fp in _form_pieces(f):
                sign = -1 if (before + d) % 2 else 1
                for m, c in out.terms.items():
                    lst = list(key)
                    lst[s] = m
                    nk = tuple(lst)
                    piece = fp.scale(sign * c)
                    cur = terms.get(nk)
                    val = piece if cur is None else cur + piece
                    if val.is_zero():
                        terms.pop(nk, None)
                    else:
                        terms[nk] = val
        if terms:
            sv = StratumValue(Snew, terms, _normalized=True)
            cur = vals.get(Snew)
            val = sv if cur is None else cur + sv
            if val.is_zero():
                vals.pop(Snew, None)
            else:
                vals[Snew] = val
    return StratifiedElement(a.geom, new_labels, vals)


# --------------------------------------------------------- fiber integration


def total_fiber_integrate(a: StratifiedElement, K) -> StratifiedElement:
    """Integrate out the points ``K``: on each stratum where every point
    of ``K`` rides alone in its own packet, project each such packet to
    the coefficient of its angular class and integrate the packet
    position over its available interval; all other strata contribute
    nothing."""
    K = _sorted_labels(K)
    if not K:
        return a
    for x in K:
        if x not in a.labels:
            raise ValueError(f"{x!r} is not a point of the model")
    Kset = set(K)
    new_labels = tuple(x for x in a.labels if x not in Kset)
    vals: Dict[Stratum, StratumValue] = {}
    for S, v in a.values.items():
        ok = True
        k_packets = set()
        for q in K:
            tgt = S.assignment(q)
            if tgt in S.geom.bulk_codes or S.packet(*tgt) != (q,):
                ok = False
                break
            k_packets.add(tgt)
        if not ok:
            continue
        specs = S.slot_specs
        k_slots = sorted(
            s for s, spec in enumerate(specs)
            if spec[0] == "packet" and (spec[1], spec[2]) in k_packets
        )
        keep_slots = [s for s in range(len(specs)) if s not in set(k_slots)]
        retained = []
        sizes = []
        for i, r in enumerate(S.sizes, start=1):
            keep = tuple(jj for jj in range(1, r + 1) if (i, jj) not in k_packets)
            retained.append(keep)
            sizes.append(len(keep))
        assign_pairs = []
        for x, tgt in zip(S.labels, S.assign):
            if x in Kset:
                continue
            if tgt in S.geom.bulk_codes:
                assign_pairs.append((x, tgt))
            else:
                ii, jj = tgt
                assign_pairs.append((x, (ii, retained[ii - 1].index(jj) + 1)))
        Snew = Stratum(S.geom, new_labels, tuple(sizes),
                       tuple(t for _, t in assign_pairs))
        pres = S.presentations
        terms: Dict = {}
        for key, f in v.terms.items():
            coeff = Fraction(1)
            for s in k_slots:
                coeff *= cobracket_projection(
                    AlgElement(pres[s], {key[s]: Fraction(1)}, _normalized=True)
                )
                if not coeff:
                    break
            if not coeff:
                continue
            suffix_non_k = 0
            exp_base = len(k_slots) * (len(k_slots) - 1) // 2
            for s in range(len(specs) - 1, -1, -1):
                if s in set(k_slots):
                    exp_base += suffix_non_k
                else:
                    suffix_non_k += len(key[s])
            nk = tuple(key[s] for s in keep_slots)
            for d, fp in _form_pieces(f):
                sign = -1 if (exp_base + len(k_slots) * d) % 2 else 1
                intf = polyform.fiber_integrate(fp, tuple(retained))
                if intf.is_zero():
                    continue
                piece = intf.scale(sign * coeff)
                cur = terms.get(nk)
                val = piece if cur is None else cur + piece
                if val.is_zero():
                    terms.pop(nk, None)
                else:
                    terms[nk] = val
        if terms:
            sv = StratumValue(Snew, terms, _normalized=True)
            cur = vals.get(Snew)
            val = sv if cur is None else cur + sv
            if val.is_zero():
                vals.pop(Snew, None)
            else:
                vals[Snew] = val
    return StratifiedElement(a.geom, new_labels, vals)


def stokes_defect(a: StratifiedElement, K) -> StratifiedElement:
    """d(integral) - (-1)^|K| integral(d) - sum of boundary corrections;
    identically zero for continuous integrands."""
    K = _sorted_labels(K)
    lhs = total_d(total_fiber_integrate(a, K))
    sign = -1 if len(K) % 2 else 1
    lhs = lhs - total_fiber_integrate(total_d(a), K).scale(sign)
    for x in K:
        rest = tuple(y for y in K if y != x)
        for y in a.labels:
            if label_key(y) >= label_key(x):
                continue
            lhs = lhs - total_fiber_integrate(total_boundary(a, x, y), rest)
    return lhs


# ------------------------------------------------------------- serialization


def _code_str(code) -> str:
    return "bulk" if code == 0 else str(code)


def format_stratum(S: Stratum) -> str:
    sizes = " ".join(str(r) for r in S.sizes)
    bits = []
    for x, tgt in zip(S.labels, S.assign):
        if tgt in S.geom.bulk_codes:
            bits.append(f"{x}:{_code_str(tgt)}")
        else:
            bits.append(f"{x}:h{tgt[0]}.{tgt[1]}")
    return f"({sizes} | {' '.join(bits)})"


def _form_mon_str(shape, expts, dts) -> str:
    bits = []
    for v, e in enumerate(expts):
        if not e:
            continue
        i, k = polyform.var_name(shape, v)
        bits.append(f"t({i},{k})" + (f"^{e}" if e > 1 else ""))
    for v in dts:
        i, k = polyform.var_name(shape, v)
        bits.append(f"dt({i},{k})")
    return ".".join(bits) or "1"


def format_value(v: StratumValue) -> str:
    if v.is_zero():
        return "0"
    shape = v.stratum.form_shape
    bits = []
    for key in sorted(v.terms, key=lambda k: tuple(mon_key(m) for m in k)):
        tensor = " (x) ".join(".".join(gen_str(g) for g in m) or "1" for m in key)
        f = v.terms[key]
        for fkey in sorted(f.terms):
            expts, dts = fkey
            c = f.terms[fkey]
            bits.append(f"{c} * {tensor} * {_form_mon_str(shape, expts, dts)}")
    return " + ".join(bits)


def dump_element(a: StratifiedElement) -> str:
    if a.geom.kind == "handles":
        head = f"model: handles genus={a.geom.genus}; points={list(a.labels)}"
    else:
        head = f"model: spheres; points={list(a.labels)}"
    lines = [head]
    live = sorted(a.values, key=Stratum.sort_key)
    if not live:
        lines.append("0")
    for S in live:
        lines.append(f"{format_stratum(S)} : {format_value(a.values[S])}")
    return "\n".join(lines)


_HEAD_RE = re.compile(
    r"^model:\s*(handles genus=(\d+)|spheres);\s*points=\[([^\]]*)\]\s*$"
)
_LINE_RE = re.compile(r"^\(([^|]*)\|([^)]*)\)\s*:\s*(.*)$")
_GEN_RE = re.compile(r"^(t|w)\(([^)]*)\)$")
_FVAR_RE = re.compile(r"^(d?t)\((\d+),(\d+)\)(?:\^(\d+))?$")


def _parse_label(tok: str):
    tok = tok.strip()
    if tok == STAR or tok.startswith("_"):
        return tok
    try:
        return int(tok)
    except ValueError:
        return tok


def _parse_mon(text: str) -> Tuple:
    text = text.strip()
    if text == "1":
        return ()
    gens = []
    for piece in text.split("."):
        m = _GEN_RE.match(piece.strip())
        if not m:
            raise ValueError(f"bad generator {piece!r}")
        args = [_parse_label(t) for t in m.group(2).split(",")]
        if m.group(1) == "t":
            if len(args) != 1:
                raise ValueError(f"bad generator {piece!r}")
            gens.append((args[0], args[0]))
        else:
            if len(args) != 2:
                raise ValueError(f"bad generator {piece!r}")
            x, y = args
            gens.append((x, y) if label_key(x) <= label_key(y) else (y, x))
    return tuple(gens)


def _parse_form_mon(shape, text: str):
    n = polyform.nvars(shape)
    expts = [0] * n
    dts = []
    text = text.strip()
    if text != "1":
        for piece in text.split("."):
            m = _FVAR_RE.match(piece.strip())
            if not m:
                raise ValueError(f"bad form monomial {piece!r}")
            v = polyform.var_index(shape, int(m.group(2)), int(m.group(3)))
            if m.group(1) == "t":
                expts[v] += int(m.group(4) or 1)
            else:
                if m.group(4):
                    raise ValueError(f"bad form monomial {piece!r}")
                dts.append(v)
    return tuple(expts), tuple(sorted(dts))


def parse_element(text: str) -> StratifiedElement:
    lines = [ln for ln in (ln.strip() for ln in text.splitlines()) if ln]
    if not lines:
        raise ValueError("empty dump")
    m = _HEAD_RE.match(lines[0])
    if not m:
        raise ValueError(f"bad header {lines[0]!r}")
    if m.group(1) == "spheres":
        geom = spheres_geometry()
    else:
        geom = handles_geometry(int(m.group(2)))
    pts = m.group(3).strip()
    labels = _sorted_labels(
        tuple(_parse_label(t) for t in pts.split(",")) if pts else ()
    )
    entries: Dict[Stratum, Dict] = {}
    for ln in lines[1:]:
        if ln == "0":
            continue
        lm = _LINE_RE.match(ln)
        if not lm:
            raise ValueError(f"bad stratum line {ln!r}")
        sizes = tuple(int(t) for t in lm.group(1).split())
        assign_map = {}
        for tok in lm.group(2).split():
            lab, _, tgt = tok.partition(":")
            lab = _parse_label(lab)
            if tgt == "bulk":
                assign_map[lab] = 0
            elif tgt in ("L", "R"):
                assign_map[lab] = tgt
            else:
                hm = re.match(r"^h(\d+)\.(\d+)$", tgt)
                if not hm:
                    raise ValueError(f"bad assignment {tok!r}")
                assign_map[lab] = (int(hm.group(1)), int(hm.group(2)))
        if set(assign_map) != set(labels):
            raise ValueError(f"assignment does not cover the points: {ln!r}")
        S = Stratum(geom, labels, sizes, tuple(assign_map[x] for x in labels))
        body = lm.group(3).strip()
        terms = entries.setdefault(S, {})
        if body == "0":
            continue
        for term in body.split(" + "):
            parts = term.split(" * ")
            if len(parts) != 3:
                raise ValueError(f"bad term {term!r}")
            c = Fraction(parts[0])
            key = tuple(_parse_mon(p) for p in parts[1].split(" (x) "))
            if len(key) != S.nslots:
                raise ValueError(f"wrong slot count in {term!r}")
            fkey = _parse_form_mon(S.form_shape, parts[2])
            f = PolyForm(S.form_shape, {fkey: c})
            terms[key] = terms.get(key, PolyForm.zero(S.form_shape)) + f
    return StratifiedElement(
        geom, labels,
        {S: StratumValue(S, t) for S, t in entries.items()},
    )
