from fractions import Fraction

from surfconf.catalog import build_catalog, map_A
from surfconf.graphs import Graph
from surfconf.strata import (
    check_continuity, total_d, total_fiber_integrate, total_boundary,
    pullback, total_wedge, dump_element, all_strata,
)

gr = Graph(1, (1, 2), 1, edges=((1, 3), (2, 3)), odd=((3, ("a", 1)),))
A = map_A(gr)
print("A continuous:", len(check_continuity(A)) == 0, flush=True)

cat = build_catalog(1)
w13 = pullback(cat.omega, {1: 1, 2: 3}, (1, 2, 3))
w23 = pullback(cat.omega, {1: 2, 2: 3}, (1, 2, 3))
a3 = pullback(cat.a[0], {1: 3}, (1, 2, 3))
for nm, x in [("w13", w13), ("w23", w23), ("a3", a3)]:
    print(f"{nm} continuous:", len(check_continuity(x)) == 0, flush=True)

K = (3,)
IA = total_fiber_integrate(A, K)
print("int A continuous:", len(check_continuity(IA)) == 0, flush=True)
dIA = total_d(IA)
IdA = total_fiber_integrate(total_d(A), K)
b1 = total_fiber_integrate(total_boundary(A, 3, 1), ())
b2 = total_fiber_integrate(total_boundary(A, 3, 2), ())
# defect = dIA - (-1)^{|K|} IdA - (b1 + b2); |K|=1 -> +IdA
defect = dIA + IdA + (b1 + b2).scale(-1)
print("defect (recomputed) zero:", defect.is_zero(), flush=True)

# look at one stratum: (1 | 1:bulk 2:h1.1)
for S in all_strata(cat.geom, (1, 2)):
    if S.sizes == (1,) and S.assignment(1) == 0 and S.assignment(2) == (1, 1):
        break
print("stratum:", S)
for nm, x in [("dIA", dIA), ("IdA", IdA), ("b1", b1), ("b2", b2)]:
    v = x.value_at(S)
    print(f"--- {nm}:")
    for key, f in sorted(v.terms.items()):
        print("   ", key, dict(f.terms))
