"""Audit case 4 at stratum (2 | 1:h1.1 2:h1.2): compare the engine's
integral against hand-computed sector integrals, evaluated at sample
rational points."""
from fractions import Fraction

from surfconf.catalog import build_catalog, map_A
from surfconf.graphs import Graph
from surfconf.polyform import PolyForm
from surfconf.strata import (
    all_strata, total_d, total_fiber_integrate, total_boundary,
)


def ev(f: PolyForm, vals):
    """Evaluate the 0-form part / coefficient polynomials of f at a
    point, returning {dts: value}."""
    out = {}
    for (expts, dts), c in f.terms.items():
        v = c
        for e, x in zip(expts, vals):
            v *= x ** e
        out[dts] = out.get(dts, Fraction(0)) + v
    return {k: v for k, v in out.items() if v}


gr = Graph(1, (1, 2), 1, edges=((1, 3), (2, 3)), odd=((3, ("a", 1)),))
A = map_A(gr)
I = total_fiber_integrate(A, (3,))

geom = build_catalog(1).geom
S0 = None
for S in all_strata(geom, (1, 2)):
    if S.sizes == (2,) and S.assignment(1) == (1, 1) \
            and S.assignment(2) == (1, 2):
        S0 = S
v = I.value_at(S0)
t1, t2 = Fraction(1, 3), Fraction(2, 3)
print("engine I at S0, (t1,t2)=(1/3,2/3):")
for key, f in sorted(v.terms.items()):
    print("  ", key, ev(f, (t1, t2)), " poly:", dict(f.terms))
print("hand: w(*,1) -> -1/36, w(*,2) -> +1/36")
