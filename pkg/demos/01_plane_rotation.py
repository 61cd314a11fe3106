"""
Rotations of the plane
======================

One constraint mu = x1 y2 - x2 y1 on two symplectic pairs.
"""
from bfvkit import GeneratorTable, PolyRing, buchberger, koszul_init, tate_extend, brst_charge
from bfvkit import Element, h0_lift, h0_bracket, probe_exact

table = GeneratorTable(2)
ring = PolyRing.for_table(table)
ideal = buchberger([ring.parse("x1*y2 - x2*y1")], ring)

# a single regular constraint: the Koszul complex is already acyclic
res = tate_extend(koszul_init(ideal, table), 3)
print("ghosts:", [res.table.name(g) for g in res.ghosts()])

# the charge is e* mu, no recursion needed
charge = brst_charge(res, 4)
print("R =", charge.R.to_expr(), "| steps:", len(charge.steps))

# invariant functions and their bracket on the reduced space
a = h0_lift(ring.parse("x1^2 + x2^2"), res, charge.R)
b = h0_lift(ring.parse("y1^2 + y2^2"), res, charge.R)
print("{r^2, p^2} =", h0_bracket(a, b).to_expr())

# e* is closed but not exact: degree 1 cohomology is nonzero
r = probe_exact(Element.gen(res.table, "e1_1*", 4), charge.R, 4, D=3)
print("e1_1* exact?", r.status, "-", r.detail)
