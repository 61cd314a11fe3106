"""
Angular momentum in three dimensions
====================================

Constraints mu_i = (x cross p)_i. The Koszul complex has homology, so the
resolution needs ghosts of lower degree and the charge needs a correction.
"""
from bfvkit import GeneratorTable, PolyRing, buchberger, koszul_init, tate_extend, brst_charge
from bfvkit import SliceBounds, Homotopy, q0_charge, cme_check
from bfvkit.tate import homology_classes

table = GeneratorTable(3, (), "x", "p")
ring = PolyRing.for_table(table)
mus = [ring.parse(s) for s in ("x2*p3 - x3*p2", "x3*p1 - x1*p3", "x1*p2 - x2*p1")]
ideal = buchberger(mus, ring)

koszul = koszul_init(ideal, table)
bounds = SliceBounds(D=3)
print("Koszul classes in degree -1 (within bounds):", len(homology_classes(koszul, -1, bounds)))

# x.mu = 0 and p.mu = 0 are the syzygies that need degree -2 ghosts
res = tate_extend(koszul, 3, bounds)
for g in res.ghosts():
    print(f"  delta {res.table.name(g)} = {res.images[g].to_expr()}")

hom = Homotopy(res, bounds)
charge = brst_charge(res, 4, hom)
print("recursion steps:", len(charge.steps))
print("Q1 =", (charge.R - q0_charge(res, 4)).to_expr())
print("{R, R} mod F^4 =", cme_check(charge.R, 4).to_expr())
