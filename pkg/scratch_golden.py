import time
from fractions import Fraction

from surfconf.bv import STAR, gen, under, over
from surfconf.catalog import (build_catalog, map_A, map_F, partition_Z,
                              example_alpha, _slot_key)
from surfconf.graphs import Graph, z_trivial
from surfconf.polyform import PolyForm
from surfconf.strata import (
    all_strata, total_d, total_wedge, pullback, stokes_defect,
    StratumValue, StratifiedElement, check_continuity, dump_element,
)


def golden_expect(cat, j, middle):
    vals = {}
    g = cat.genus
    for S in all_strata(cat.geom, (1,)):
        tgt = S.assignment(1)
        shape = S.form_shape
        one = PolyForm.const(shape, 1)
        h = Fraction(1, 2)
        if tgt == 0:
            vals[S] = StratumValue(S, {
                _slot_key(S, bulk=(gen(1, under(j)),)): one.scale(h),
                _slot_key(S, bulk=(gen(1, over(j)),)): one.scale(middle * h),
                _slot_key(S, bulk=(gen(1, under(1)),)): one.scale(-h),
            })
        elif tgt[0] == 1:
            t = PolyForm.var(shape, 1, tgt[1])
            vals[S] = StratumValue(S, {
                _slot_key(S, packets={tgt: (gen(1, STAR),)}):
                    t - one.scale(h)})
        elif tgt[0] == j:
            t = PolyForm.var(shape, j, tgt[1])
            vals[S] = StratumValue(S, {
                _slot_key(S, packets={tgt: (gen(1, STAR),)}):
                    one.scale(h) - t})
    return StratifiedElement(cat.geom, (1,), vals)


g = 3
cat = build_catalog(g)

t0 = time.time()
for j in range(1, g + 1):
    gr = Graph(g, (1,), 1, edges=((1, 2),),
               odd=((2, ("a", j)), (2, ("b", j))))
    F = map_F(gr)
    if j == 1:
        print(f"F(Gamma_1) == 0: {F.is_zero()}", flush=True)
        continue
    print(f"F(Gamma_{j}) continuous:", len(check_continuity(F)) == 0,
          flush=True)
    for middle in (+1, -1):
        ok = F == golden_expect(cat, j, middle)
        print(f"  matches golden middle={middle:+d}: {ok}", flush=True)
    want = cat.nu + total_wedge(cat.a[j-1], cat.b[j-1]).scale(-1)
    print(f"  dF(Gamma_{j}) == nu - a^{j} b^{j}:", total_d(F) == want,
          flush=True)
    if F != golden_expect(cat, j, +1):
        d = F + golden_expect(cat, j, +1).scale(-1)
        for S, v in sorted(d.values.items(), key=lambda kv: kv[0].sort_key()):
            if not v.is_zero():
                print("  diff vs +1 at", S)
                for key, f in sorted(v.terms.items()):
                    print("    ", key, dict(f.terms))
                break
print(f"golden in {time.time()-t0:.1f}s", flush=True)

# negative control: continuity of the minus-middle variant
nv = check_continuity(golden_expect(cat, 2, -1))
print("negative control (minus middle) violations:", len(nv), flush=True)
pv = check_continuity(golden_expect(cat, 2, +1))
print("plus-middle variant violations:", len(pv), flush=True)

# alpha
t0 = time.time()
al = example_alpha(g)
want = cat.nu.scale(2 * g - 2)
for j in range(2, g + 1):
    want = want + total_wedge(cat.a[j-1], cat.b[j-1]).scale(-2)
print("d alpha identity:", total_d(al) == want, flush=True)
print("alpha continuous:", len(check_continuity(al)) == 0,
      f"({time.time()-t0:.1f}s)", flush=True)
