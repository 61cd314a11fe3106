"""
Normal ordering and the quantum master equation
===============================================

Coordinates and ghosts go left, momenta and antighosts go right.
"""
from bfvkit import GeneratorTable, PolyRing, buchberger, koszul_init, tate_extend, brst_charge
from bfvkit import Element, normal_order, q_map, qmul, qme_solve, qexp_ad, quantum_gauge_match
from bfvkit.quantize import qme_residual

t = GeneratorTable(1, (1,))
print("y1 x1      =", normal_order(["y1", "x1"], t).to_expr())
print("e1_1* e1_1 =", normal_order(["e1_1*", "e1_1"], t).to_expr())
print("(y1)(x1^2) =", qmul(q_map(Element.gen(t, "y1")), q_map(Element.monomial(t, ["x1", "x1"]))).to_expr())

table = GeneratorTable(2)
ring = PolyRing.for_table(table)
res = tate_extend(koszul_init(buchberger([ring.parse("x1*y2 - x2*y1")], ring), table), 3)
R = brst_charge(res, 4).R

# solve [r, r] = 0 modulo hbar^3 and F^4
out = qme_solve(R, 4, 3)
print("r =", out.r.to_expr())
print("residual:", qme_residual(out.r).to_expr())

# an hbar-divisible gauge generator and its recovery
u = Element.monomial(res.table, ["x1", "y1"], N=4)
rp = qexp_ad(q_map(u, 3).hbar_shift(1), out.r)
eq = quantum_gauge_match(out.r, rp, R, 4, 3)
print("quantum gauge generators:", len(eq.generators), "| round trip:", eq.apply(out.r) == rp)
