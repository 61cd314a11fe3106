"""
Gauge equivalences and trivial models
=====================================

Two charges that induce the same differential differ by exp(ad c).
"""
import random
from fractions import Fraction

from bfvkit import GeneratorTable, PolyRing, buchberger, koszul_init, tate_extend, brst_charge
from bfvkit import Element, Homotopy, SliceBounds, exp_ad, gauge_match, cme_check
from bfvkit import trivial_model, product_model
from bfvkit.algebra import mono_poscount, x_slice

table = GeneratorTable(3, (), "x", "p")
ring = PolyRing.for_table(table)
mus = [ring.parse(s) for s in ("x2*p3 - x3*p2", "x3*p1 - x1*p3", "x1*p2 - x2*p1")]
res = tate_extend(koszul_init(buchberger(mus, ring), table), 3, SliceBounds(D=3))
hom = Homotopy(res)
R = brst_charge(res, 4, hom).R

# a random generator: degree 0, at least two antighosts per term
rng = random.Random(0)
cands = [m for m in x_slice(res.table, 0, 4, 1) if mono_poscount(m) >= 2]
c = Element({m: Fraction(rng.randint(1, 3)) for m in rng.sample(cands, 3)}, res.table, 4)
Rp = exp_ad(c, R, 4)
print("perturbed charge solves the master equation:", not cme_check(Rp, 4))

eq = gauge_match(R, Rp, res, 4, hom)
print("recovered", len(eq.generators), "generator(s); round trip exact:", eq.apply(R) == Rp)

# a trivial pair (n, nt) with delta nt = n, and the product with the model above
tres, S = trivial_model([(1, 1)])
print("trivial charge S =", S.to_expr())
pm = product_model((res, R), (tres, S))
print("product charge solves the master equation:", not cme_check(pm.L, 4))
