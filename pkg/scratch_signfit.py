"""Fit the slot-crossing sign law of the pair-boundary operator against
the combinatorial Stokes identity on a battery of graph evaluations."""
import itertools
import time
from fractions import Fraction

from surfconf.bv import (AlgElement, STAR, cocompose, gen, label_key,
                         mon_key)
from surfconf.catalog import build_catalog, map_A
from surfconf.graphs import Graph
from surfconf.polyform import PolyForm
from surfconf import strata as st
from surfconf.strata import (
    StratifiedElement, Stratum, StratumValue, _form_pieces, _sorted_labels,
    total_d, total_fiber_integrate,
)


def total_boundary_param(a, i, j, p):
    aa, bb, cc, ee = p
    lo, hi = (i, j) if label_key(i) < label_key(j) else (j, i)
    new_labels = tuple(x for x in a.labels if x != hi)
    vals = {}
    for S, v in a.values.items():
        si = S.assignment(i)
        if si != S.assignment(j):
            continue
        s = S.slot_index(("bulk", si) if si in S.geom.bulk_codes
                         else ("packet",) + si)
        assign = tuple(t for x, t in zip(S.labels, S.assign) if x != hi)
        Snew = Stratum(S.geom, new_labels, S.sizes, assign)
        pres_s = S.presentations[s]
        terms = {}
        for key, f in v.terms.items():
            before = sum(len(key[t]) for t in range(s))
            later = sum(len(key[t]) for t in range(s + 1, len(key)))
            tensor = cocompose(
                AlgElement(pres_s, {key[s]: Fraction(1)}, _normalized=True),
                (i, j), lo)
            target = (gen(i, j),)
            for (mL, mR), c in tensor.terms.items():
                if mR != target:
                    continue
                for d, fp in _form_pieces(f):
                    exp = aa * before + bb * later + cc * d + ee * len(mL)
                    sign = -1 if exp % 2 else 1
                    lst = list(key)
                    lst[s] = mL
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


def stokes_defect_param(a, K, p):
    K = _sorted_labels(K)
    lhs = total_d(total_fiber_integrate(a, K))
    sign = -1 if len(K) % 2 else 1
    lhs = lhs - total_fiber_integrate(total_d(a), K).scale(sign)
    for x in K:
        rest = tuple(y for y in K if y != x)
        for y in a.labels:
            if label_key(y) >= label_key(x):
                continue
            lhs = lhs - total_fiber_integrate(
                total_boundary_param(a, x, y, p), rest)
    return lhs


cases = [
    (1, (1,), 1, ((1, 2),), ((2, ("a", 1)),), ()),
    (1, (1,), 1, ((1, 1), (1, 2)), ((2, ("a", 1)),), ()),
    (2, (1,), 1, ((1, 2),), ((2, ("a", 2)), (2, ("b", 2))), ()),
    (2, (1,), 1, ((1, 2),), (), (2,)),
    (1, (1, 2), 1, ((1, 3), (2, 3)), ((3, ("a", 1)),), ()),
    (1, (1,), 2, ((1, 2), (2, 3)), ((2, ("a", 1)), (3, ("a", 1))), ()),
    (0, (1,), 1, ((1, 2),), (), (2,)),
    (0, (1,), 1, ((1, 1), (1, 2)), (), (2,)),
    (2, (1, 2), 1, ((1, 2), (1, 3), (2, 3)), ((3, ("a", 2)),), ()),
    (1, (1, 2), 1, ((1, 3), (2, 3)), ((3, ("b", 1)), (1, ("a", 1))), ()),
    (1, (1,), 2, ((1, 2), (1, 3)), ((2, ("a", 1)), (3, ("b", 1))), ()),
    (0, (1, 2), 1, ((1, 3), (2, 3)), (), (3,)),
    (1, (1, 2), 2, ((1, 3), (2, 4), (3, 4)),
     ((3, ("a", 1)), (4, ("a", 1))), ()),
    (2, (1,), 1, ((1, 1), (1, 2)), ((2, ("a", 2)), (2, ("b", 2))), ()),
    (1, (1,), 2, ((1, 2), (2, 3), (1, 3)), ((2, ("a", 1)), (3, ("b", 1))), ()),
]

pre = []
for genus, ext, nint, edges, odd, even in cases:
    gr = Graph(genus, ext, nint, edges=edges, odd=odd, even=even)
    pre.append((map_A(gr), gr.internal, f"g={genus} e={edges} o={odd}"))

if __name__ == "__main__":
    for p in itertools.product((0, 1), repeat=4):
        ok = []
        for A, K, note in pre:
            z = stokes_defect_param(A, K, p).is_zero()
            ok.append(z)
            if not z:
                break
        status = "ALL PASS" if all(ok) else f"fail at case {len(ok)-1}"
        print(f"sign(before,later,d,|mL|)={p}: {status}", flush=True)
