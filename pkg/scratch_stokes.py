import time
from fractions import Fraction

from surfconf.catalog import build_catalog, map_A, map_F
from surfconf.graphs import Graph
from surfconf.strata import stokes_defect, check_continuity, dump_element

cases = [
    # (genus, ext, nint, edges, odd, even, note)
    (1, (1,), 1, ((1, 2),), ((2, ("a", 1)),), (), "edge+a1"),
    (1, (1,), 1, ((1, 1), (1, 2)), ((2, ("a", 1)),), (), "tadpole+edge+a1"),
    (2, (1,), 1, ((1, 2),), ((2, ("a", 2)), (2, ("b", 2))), (), "golden"),
    (2, (1,), 1, ((1, 2),), (), ((2,),), "edge+nu"),
    (2, (1,), 1, ((1, 1),), ((1, ("b", 1)),), (), "tadpole only, no K"),
    (1, (1, 2), 1, ((1, 3), (2, 3)), ((3, ("a", 1)),), (), "bivalent+a1"),
    (1, (1,), 2, ((1, 2), (2, 3)), ((2, ("a", 1)), (3, ("a", 1))), (),
     "chain 2 internal"),
    (0, (1,), 1, ((1, 2),), (), ((2,),), "g0 edge+nu"),
    (0, (1,), 1, ((1, 1), (1, 2)), (), ((2,),), "g0 tadpole+edge+nu"),
    (2, (1, 2), 1, ((1, 2), (1, 3), (2, 3)), ((3, ("a", 2)),), (),
     "triangle+a2"),
]

for genus, ext, nint, edges, odd, even, note in cases:
    gr = Graph(genus, ext, nint, edges=edges, odd=odd, even=tuple(
        v[0] if isinstance(v, tuple) else v for v in even))
    t0 = time.time()
    A = map_A(gr)
    K = gr.internal
    d = stokes_defect(A, K)
    dt = time.time() - t0
    print(f"g={genus} {note}: defect zero = {d.is_zero()}  ({dt:.2f}s)",
          flush=True)
    if not d.is_zero():
        txt = dump_element(d)
        print("\n".join(txt.splitlines()[:12]))
