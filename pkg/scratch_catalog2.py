from fractions import Fraction

from surfconf.bv import STAR, AlgElement, Presentation, gen
from surfconf.catalog import build_catalog, scalar_value
from surfconf.strata import (
    check_continuity, total_d, total_wedge, pullback, total_coaction,
    total_boundary, element_from, all_strata, StratumValue,
    StratifiedElement,
)

# genus 0 catalog
cat = build_catalog(0)
for name, form in [("nu", cat.nu), ("eta", cat.eta), ("omega", cat.omega)]:
    viol = check_continuity(form)
    print(f"g=0 {name}: violations={len(viol)}", flush=True)
    if viol:
        v = viol[0]
        print("  at", v.stratum, v.face)
        print("  coarse:", v.restricted.terms if v.restricted else None)
        print("  fine:", v.cocomposed.terms if v.cocomposed else None)

labels = (1, 2)
p1 = lambda f: pullback(f, {1: 1}, labels)
p2 = lambda f: pullback(f, {1: 2}, labels)
print("g=0 d eta == 2 nu:", total_d(cat.eta) == cat.nu.scale(2))
print("g=0 d omega == pi1 nu + pi2 nu:",
      total_d(cat.omega) == p1(cat.nu) + p2(cat.nu))

# coaction Delta_{12} omega = eta_new (x) 1 + 1 (x) omega_{12}, each genus
for g in (0, 1, 2):
    cat = build_catalog(g)
    T = total_coaction(cat.omega, (1, 2))          # new label defaults to 1
    eta = cat.eta
    right = None
    for mon, part in T.parts.items():
        if mon == ():
            continue
        right = (mon, part)
    ok_unit = T.part(()) is not None
    # the identity: part(()) == omega_{12}-term? no: part(()) carries 1 (x) ...
    # parts keyed by right monomial: eta (x) 1 -> key (), value eta pulled to new label
    # 1 (x) omega_{12} -> key (gen(1,2),), value unit
    from surfconf.strata import StratifiedElement as SE
    unit = SE.unit(cat.geom, (1,))
    k12 = (gen(1, 2),)
    keys = set(T.parts.keys())
    ok = (keys <= {(), k12}
          and T.part(()) == eta
          and T.part(k12) == unit)
    print(f"g={g} Delta_12 omega == eta (x) 1 + 1 (x) omega_12 : {ok}",
          flush=True)
    if not ok:
        print("  keys:", keys)
        if T.part(()) != eta:
            d = T.part(()) + eta.scale(-1)
            for S, v in d.values.items():
                if not v.is_zero():
                    print("  part() mismatch at", S)
                    for key, f in v.terms.items():
                        print("    ", key, dict(f.terms))
                    break

# boundary: partial_12 omega = unit over {1}
for g in (0, 1, 2):
    cat = build_catalog(g)
    b = total_boundary(cat.omega, 1, 2)
    from surfconf.strata import StratifiedElement as SE
    print(f"g={g} boundary_12 omega == unit:",
          b == SE.unit(cat.geom, (1,)), flush=True)
