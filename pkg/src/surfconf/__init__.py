"""surfconf: exact-arithmetic engine for the combinatorial model of
configuration spaces of framed points on oriented surfaces.

Subpackage map:

* polyform -- rational polynomial differential forms on products of
  simplices (graded product, exterior derivative, face restriction,
  fiber integration along simplicial forgetful maps);
* bv       -- the presented graded-commutative algebras of point/cylinder/
  surface configurations with normal forms, cocompositions, boundary
  operators and the cylinder involution;
* mog      -- the small model of framed configuration spaces on a closed
  surface: normal form, differential, coaction and exact cohomology;
* graphs   -- decorated graph complexes with signed canonical forms,
  differential, coaction and the projection to the small model;
* strata   -- the stratified totalization: strata enumeration, continuity
  checking, differential/product/coaction/boundary, combinatorial fiber
  integration, Stokes defect;
* catalog  -- the model one- and two-point forms, the graph evaluation
  maps, partition-function values, and the worked example elements;
* cli      -- command-line verification campaigns with JSON certificates.

All coefficients everywhere are `fractions.Fraction`; there is no floating
point in the engine.
"""

from .polyform import PolyForm, wedge, exterior_d, restrict_face, fiber_integrate

__version__ = "0.1.0"
