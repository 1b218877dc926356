import time
from fractions import Fraction

from surfconf.catalog import build_catalog, map_A, map_F, genus0_f
from surfconf.strata import (
    check_continuity, total_d, total_wedge, pullback, element_from,
    total_fiber_integrate, stokes_defect, dump_element,
)

for g in (1, 2, 3):
    t0 = time.time()
    cat = build_catalog(g)
    for name, form in [("a1", cat.a[0]), ("b1", cat.b[0]),
                       ("nu", cat.nu), ("eta", cat.eta),
                       ("omega", cat.omega)] + (
                       [("a%d" % g, cat.a[-1]), ("b%d" % g, cat.b[-1])]
                       if g > 1 else []):
        viol = check_continuity(form)
        print(f"g={g} {name}: violations={len(viol)}", flush=True)
        if viol:
            v = viol[0]
            print("  at", v.stratum, v.face)
            print("  coarse:", v.restricted.terms if v.restricted else None)
            print("  fine:", v.cocomposed.terms if v.cocomposed else None)
            break
    print(f"g={g} continuity done in {time.time()-t0:.1f}s", flush=True)

# differential identities at g=2
g = 2
cat = build_catalog(g)
labels = (1, 2)
# d eta = 2 nu - 2 sum_k a^k b^k
rhs = cat.nu.scale(2)
for k in range(g):
    rhs = rhs + total_wedge(cat.a[k], cat.b[k]).scale(-2)
print("d eta == 2nu - 2 sum a^k b^k :", total_d(cat.eta) == rhs, flush=True)

# d omega = pi1* nu + pi2* nu - sum_k (pi1 a^k pi2 b^k + pi2 a^k pi1 b^k)
p1 = lambda f: pullback(f, {1: 1}, labels)
p2 = lambda f: pullback(f, {1: 2}, labels)
rhs = p1(cat.nu) + p2(cat.nu)
for k in range(g):
    rhs = rhs + total_wedge(p1(cat.a[k]), p2(cat.b[k])).scale(-1)
    rhs = rhs + total_wedge(p2(cat.a[k]), p1(cat.b[k])).scale(-1)
do = total_d(cat.omega)
print("d omega identity:", do == rhs, flush=True)
if do != rhs:
    diff = do + rhs.scale(-1)
    n = 0
    for S, v in sorted(diff.values.items(), key=lambda kv: kv[0].sort_key()):
        if not v.is_zero():
            print(" stratum", S)
            for key, f in sorted(v.terms.items()):
                print("   ", key, dict(f.terms))
            n += 1
            if n > 5:
                break
