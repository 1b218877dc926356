"""Exact polynomial differential forms on products of simplices.

The n-simplex is realized as the chain of ordered coordinates

    0 <= t^(1) <= t^(2) <= ... <= t^(n) <= 1,

and a *shape* (r_1, ..., r_g) denotes the product Delta^{r_1} x ... x
Delta^{r_g}.  The coordinate of the k-th packet on the i-th factor is
written t(i,k); its differential dt(i,k) is an odd generator, so every
term carries each dt at most once.

A PolyForm is a finite sum of terms

    c * prod t(i,k)^e(i,k) * dt(v_1) ^ dt(v_2) ^ ... ^ dt(v_m)

with c an exact rational.  Terms are stored with the dt-factors sorted in
the global variable order (handle-major, packet-minor); reordering costs
the usual sign of the permutation.

Besides the graded product and the exterior derivative, the module
implements the two geometric operations the stratified model needs:

* restrict_face -- restriction to a boundary face of one simplex factor
  (two adjacent coordinates collide, or an extreme coordinate hits 0/1);

* fiber_integrate -- the pushforward along the simplicial map that
  forgets a subset of packets.  Each forgotten coordinate is integrated
  over the interval cut out by its current neighbours; forgotten
  coordinates are processed left to right, which realizes the iterated
  "innermost first" integral.  Terms that lack the dt of a forgotten
  coordinate push forward to zero (the fiber is one-dimensional in that
  direction).

All operations are pure and values are never mutated after construction,
so callers may share and combine PolyForms freely.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Tuple

Shape = Tuple[int, ...]

__all__ = [
    "PolyForm",
    "wedge",
    "exterior_d",
    "restrict_face",
    "fiber_integrate",
]


def _check_shape(shape: Iterable[int]) -> Shape:
    shape = tuple(int(r) for r in shape)
    if any(r < 0 for r in shape):
        raise ValueError(f"negative packet count in shape {shape}")
    return shape


def nvars(shape: Shape) -> int:
    return sum(shape)


def var_index(shape: Shape, handle: int, packet: int) -> int:
    """Flat index of t(handle, packet); handle and packet are 1-based."""
    if not (1 <= handle <= len(shape)):
        raise ValueError(f"handle {handle} out of range for shape {shape}")
    if not (1 <= packet <= shape[handle - 1]):
        raise ValueError(f"packet {packet} out of range on handle {handle} of shape {shape}")
    return sum(shape[: handle - 1]) + packet - 1


def var_name(shape: Shape, v: int) -> Tuple[int, int]:
    """Inverse of var_index: flat index -> (handle, packet), both 1-based."""
    for i, r in enumerate(shape):
        if v < r:
            return (i + 1, v + 1)
        v -= r
    raise ValueError("variable index out of range")


def _merge_dts(da: Tuple[int, ...], db: Tuple[int, ...]):
    """Sign and sorted tuple for dt_da ^ dt_db, or (0, ()) if they overlap."""
    if set(da) & set(db):
        return 0, ()
    # count inversions between the two sorted runs
    inv = 0
    for x in da:
        for y in db:
            if y < x:
                inv += 1
    return (-1) ** inv, tuple(sorted(da + db))


class PolyForm:
    """Immutable polynomial differential form on a product of simplices."""

    __slots__ = ("shape", "terms")

    def __init__(self, shape: Iterable[int], terms=None):
        object.__setattr__(self, "shape", _check_shape(shape))
        clean = {}
        n = nvars(self.shape)
        if terms:
            for (expts, dts), c in terms.items():
                c = Fraction(c)
                if not c:
                    continue
                expts = tuple(int(e) for e in expts)
                dts = tuple(sorted(int(v) for v in dts))
                if len(expts) != n:
                    raise ValueError("exponent vector does not match shape")
                if any(e < 0 for e in expts):
                    raise ValueError("negative exponent")
                if len(set(dts)) != len(dts) or any(not (0 <= v < n) for v in dts):
                    raise ValueError("bad dt subset")
                key = (expts, dts)
                c0 = clean.get(key)
                c = c if c0 is None else c0 + c
                if c:
                    clean[key] = c
                elif key in clean:
                    del clean[key]
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("PolyForm is immutable")

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(shape: Iterable[int]) -> "PolyForm":
        return PolyForm(shape)

    @staticmethod
    def const(shape: Iterable[int], c) -> "PolyForm":
        shape = _check_shape(shape)
        return PolyForm(shape, {((0,) * nvars(shape), ()): Fraction(c)})

    @staticmethod
    def var(shape: Iterable[int], handle: int, packet: int) -> "PolyForm":
        """The coordinate t(handle, packet) as a 0-form."""
        shape = _check_shape(shape)
        v = var_index(shape, handle, packet)
        e = [0] * nvars(shape)
        e[v] = 1
        return PolyForm(shape, {(tuple(e), ()): Fraction(1)})

    @staticmethod
    def dvar(shape: Iterable[int], handle: int, packet: int) -> "PolyForm":
        """The 1-form dt(handle, packet)."""
        shape = _check_shape(shape)
        v = var_index(shape, handle, packet)
        return PolyForm(shape, {((0,) * nvars(shape), (v,)): Fraction(1)})

    # -- ring structure ------------------------------------------------

    def __add__(self, other: "PolyForm") -> "PolyForm":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, Fraction(0)) + c
        return PolyForm(self.shape, terms)

    def __sub__(self, other: "PolyForm") -> "PolyForm":
        return self + (-other)

    def __neg__(self) -> "PolyForm":
        return PolyForm(self.shape, {k: -c for k, c in self.terms.items()})

    def scale(self, c) -> "PolyForm":
        c = Fraction(c)
        return PolyForm(self.shape, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, PolyForm):
            return wedge(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PolyForm)
            and self.shape == other.shape
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.shape, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set:
        return {len(dts) for (_, dts) in self.terms}

    def degree(self) -> int:
        """Form degree of a homogeneous form (0 is homogeneous of any degree)."""
        degs = self.degrees()
        if not degs:
            return 0
        if len(degs) > 1:
            raise ValueError(f"inhomogeneous form of degrees {sorted(degs)}")
        return degs.pop()

    # -- printing ------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for (expts, dts), c in sorted(self.terms.items()):
            factors = []
            for v, e in enumerate(expts):
                if e:
                    i, k = var_name(self.shape, v)
                    factors.append(f"t({i},{k})" + (f"^{e}" if e > 1 else ""))
            for v in dts:
                i, k = var_name(self.shape, v)
                factors.append(f"dt({i},{k})")
            body = ".".join(factors)
            if not body:
                bits.append(str(c))
            elif c == 1:
                bits.append(body)
            elif c == -1:
                bits.append(f"-{body}")
            else:
                bits.append(f"{c} {body}")
        out = " + ".join(bits)
        return out.replace("+ -", "- ")

    __repr__ = __str__


# -- operations ---------------------------------------------------------


def wedge(a: PolyForm, b: PolyForm) -> PolyForm:
    """Graded product; terms with a repeated dt vanish."""
    if a.shape != b.shape:
        raise ValueError("shape mismatch")
    terms = {}
    for (ea, da), ca in a.terms.items():
        for (eb, db), cb in b.terms.items():
            sign, dm = _merge_dts(da, db)
            if not sign:
                continue
            key = (tuple(x + y for x, y in zip(ea, eb)), dm)
            terms[key] = terms.get(key, Fraction(0)) + sign * ca * cb
    return PolyForm(a.shape, terms)


def exterior_d(a: PolyForm) -> PolyForm:
    """de Rham differential: d(t^e dtS) = sum_v e_v t^(e - 1_v) dt_v ^ dtS."""
    terms = {}
    for (expts, dts), c in a.terms.items():
        dset = set(dts)
        for v, e in enumerate(expts):
            if not e or v in dset:
                continue
            sign = (-1) ** sum(1 for u in dts if u < v)
            e2 = list(expts)
            e2[v] -= 1
            key = (tuple(e2), tuple(sorted(dts + (v,))))
            terms[key] = terms.get(key, Fraction(0)) + sign * c * e
    return PolyForm(a.shape, terms)


def _drop_var(shape: Shape, handle: int) -> Shape:
    out = list(shape)
    out[handle - 1] -= 1
    return tuple(out)


def restrict_face(a: PolyForm, face) -> PolyForm:
    """Restrict to a boundary face of the handle-`i` simplex factor.

    face is one of
      ("collide", i, j) -- the coordinates t(i,j) and t(i,j+1) are identified
                           (1 <= j < r_i); the merged coordinate is packet j
                           of the smaller simplex;
      ("left", i)       -- t(i,1) = 0;
      ("right", i)      -- t(i,r_i) = 1.
    """
    kind, handle, *rest = face
    r = a.shape[handle - 1] if 1 <= handle <= len(a.shape) else 0
    if kind == "collide":
        (j,) = rest
        if not (1 <= j < r):
            raise ValueError(f"no collision face ({handle},{j}) on shape {a.shape}")
        v = var_index(a.shape, handle, j)
        w = v + 1
        new_shape = _drop_var(a.shape, handle)
        terms = {}
        for (expts, dts), c in a.terms.items():
            if v in dts and w in dts:
                continue  # dt ^ dt on the identified coordinate
            e2 = list(expts)
            e2[v] += e2[w]
            del e2[w]
            # w is adjacent to v, so renaming w -> v preserves the sorted order
            d2 = tuple(sorted(u if u < w else (v if u == w else u - 1) for u in dts))
            key = (tuple(e2), d2)
            terms[key] = terms.get(key, Fraction(0)) + c
        return PolyForm(new_shape, terms)
    if kind in ("left", "right"):
        if r < 1:
            raise ValueError(f"no end face on empty handle {handle} of shape {a.shape}")
        v = var_index(a.shape, handle, 1 if kind == "left" else r)
        new_shape = _drop_var(a.shape, handle)
        terms = {}
        for (expts, dts), c in a.terms.items():
            if v in dts:
                continue  # differential of a constant
            if kind == "left" and expts[v]:
                continue  # t = 0 kills positive powers
            e2 = list(expts)
            del e2[v]
            d2 = tuple(u if u < v else u - 1 for u in dts)
            key = (tuple(e2), d2)
            terms[key] = terms.get(key, Fraction(0)) + c
        return PolyForm(new_shape, terms)
    raise ValueError(f"unknown face kind {kind!r}")


def _integrate_one(a: PolyForm, handle: int, packet: int) -> PolyForm:
    """Integrate out the coordinate t(handle, packet) over the interval cut
    out by its current neighbours on the same handle (or the constants 0/1).

    Only terms containing dt(handle, packet) contribute.  The dt is moved to
    the front of the term's dt-product (sign), and the antiderivative in the
    coordinate is evaluated between the neighbouring coordinates.
    """
    v = var_index(a.shape, handle, packet)
    r = a.shape[handle - 1]
    lo = v - 1 if packet > 1 else None  # flat index of lower neighbour, else 0
    hi = v + 1 if packet < r else None  # flat index of upper neighbour, else 1
    new_shape = _drop_var(a.shape, handle)
    terms = {}
    for (expts, dts), c in a.terms.items():
        if v not in dts:
            continue
        sign = (-1) ** sum(1 for u in dts if u < v)
        e = expts[v] + 1  # antiderivative exponent
        coeff = sign * c * Fraction(1, e)
        d2 = tuple(u if u < v else u - 1 for u in dts if u != v)
        base = list(expts)
        del base[v]
        # upper evaluation: t_v := hi
        for bound, s in ((hi, 1), (lo, -1)):
            if bound is None:
                if s == -1:
                    continue  # lower bound 0 kills t^e with e >= 1
                e2 = tuple(base)  # upper bound 1: the power evaluates to 1
            else:
                e2 = list(base)
                e2[bound if bound < v else bound - 1] += e
                e2 = tuple(e2)
            key = (e2, d2)
            val = terms.get(key, Fraction(0)) + s * coeff
            if val:
                terms[key] = val
            elif key in terms:
                del terms[key]
    return PolyForm(new_shape, terms)


def fiber_integrate(a: PolyForm, retained) -> PolyForm:
    """Pushforward along the simplicial map forgetting the non-retained packets.

    `retained` gives, per handle, the packet indices (1-based) that survive.
    Forgotten coordinates are integrated out left to right; at each step the
    admissible interval is bounded by the current neighbours, which realizes
    the iterated integral with the innermost (leftmost) coordinate first.
    """
    retained = tuple(tuple(sorted(set(r))) for r in retained)
    if len(retained) != len(a.shape):
        raise ValueError("retained marking does not match shape")
    for (keep, r) in zip(retained, a.shape):
        if any(not (1 <= k <= r) for k in keep):
            raise ValueError("retained packet out of range")
    out = a
    for i in range(1, len(a.shape) + 1):
        keep = retained[i - 1]
        # walk the handle left to right; `pos` is the current packet index of
        # the next surviving packet inside the shrinking simplex factor
        pos = 1
        for k in range(1, a.shape[i - 1] + 1):
            if k in keep:
                pos += 1
            else:
                out = _integrate_one(out, i, pos)
    return out
