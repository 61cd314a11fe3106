"""Gauge equivalences ``exp(ad_c)``, trivial models and products of models."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (
    ANTI, GHOST, Element, dual, left_derivative, mono_degree, mono_mul, mono_poscount, rename,
)
from .brst import InvariantViolation, MasterEquationError, cme_check
from .poisson import bracket
from .tate import Homotopy, Resolution, trivial_resolution


class GaugeError(ValueError):
    pass


def check_generator(c):
    """A gauge generator has degree 0 and at least two antighost factors per term."""
    for m in c.terms:
        if mono_degree(m) != 0:
            raise GaugeError("gauge generator must have degree 0")
        if mono_poscount(m) < 2:
            raise GaugeError("gauge generator must lie in the square of the antighost ideal")


def exp_ad(c, x, N):
    """``sum_k ad_c^k(x) / k!`` modulo ``F^N``; the series stops since ad_c raises the antighost count."""
    check_generator(c)
    ct = Element(c.terms, c.table, N)
    xt = Element(x.terms, x.table, N) if x.N is None or x.N >= N else x
    total = xt
    term = xt
    k = 0
    while term:
        k += 1
        if k > N + 1:
            raise InvariantViolation("exp(ad) series failed to terminate")
        term = bracket(ct, term) / k
        total = total + term
    return total


@dataclass
class GaugeEquivalence:
    """Generators applied in order: ``R' = exp(ad_{c_k}) ... exp(ad_{c_1}) R``."""

    generators: list = field(default_factory=list)
    N: int = 0

    def apply(self, x):
        for c in self.generators:
            x = exp_ad(c, x, self.N)
        return x

    def dumps(self):
        table = self.generators[0].table if self.generators else None
        lines = ["# gauge equivalence", f"N {self.N}", f"generators {len(self.generators)}"]
        if table is not None:
            lines.insert(1, "table " + table.header())
        for i, c in enumerate(self.generators, 1):
            lines.append(f"generator {i}")
            lines += ["  " + ln for ln in c.to_text().splitlines()]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text, table):
        lines = text.splitlines()
        N = int(next(ln for ln in lines if ln.startswith("N ")).split()[1])
        gens, cur = [], None
        for ln in lines:
            if ln.startswith("generator "):
                cur = []
                gens.append(cur)
            elif ln.startswith("  ") and cur is not None:
                cur.append(ln.strip())
        return cls([Element.from_text("\n".join(g), table, N) for g in gens], N)


def gauge_match(R, Rp, res, N, homotopy=None):
    """A gauge equivalence carrying ``R`` to ``Rp`` modulo ``F^N``.

    Both charges must solve the master equation and induce the same delta
    (they agree modulo the square of the antighost ideal).
    """
    table = R.table if Rp.table.issubtable(R.table) else Rp.table
    R = Element(R.terms, table, N)
    Rp = Element(Rp.terms, table, N)
    if cme_check(R, N) or cme_check(Rp, N):
        raise MasterEquationError("both charges must solve the master equation")
    diff = Rp - R
    if any(mono_poscount(m) < 2 for m in diff.terms):
        raise GaugeError("charges induce different differentials (differ outside I^(2))")
    hom = homotopy or Homotopy(res)
    gens = []
    cur = R
    for p in range(2, N):
        for _ in range(p + 2):
            v = (Rp - cur).weight_part(p)
            if not v:
                break
            # exp(ad_c) R = R - d_R c + ..., and d_R c = delta c at weight p
            c = -hom(v)
            check_generator(c)
            if not c:
                raise InvariantViolation(f"weight {p}: homotopy killed the discrepancy")
            gens.append(c)
            cur = exp_ad(c, cur, N)
        if (Rp - cur).weight_part(p):
            raise InvariantViolation(f"weight {p} discrepancy did not close")
    if Rp - cur:
        raise InvariantViolation("residual discrepancy after matching")
    return GaugeEquivalence(gens, N)


# ---------------------------------------------------------------------------
# trivial models and products


def trivial_model(pairs):
    """Trivial model from ghost pairs ``n`` (degree -l), ``nt`` (degree -l-1), ``delta nt = n``."""
    res, _ = trivial_resolution(pairs)
    return res, _full_q0(res)


def _full_q0(res):
    terms = {}
    for g in res.ghosts():
        l = g[1]
        sign = 1 if (1 - l) % 2 == 0 else -1
        for m, c in (Element.gen(res.table, dual(g)) * res.images[g]).terms.items():
            terms[m] = terms.get(m, 0) + sign * c
    return Element(terms, res.table)


@dataclass
class ProductModel:
    """Product of a model ``A = (res, R)`` with a trivial model ``B = (res, S)``."""

    res: Resolution
    L: Element
    ghost_map: dict  # B ghost -> product ghost
    b_ghosts: frozenset  # product ghosts coming from B
    s_gen: dict  # product generator -> (coefficient, generator) for the B homotopy

    def iota(self, x):
        return x.with_table(self.res.table)

    def _is_b(self, g):
        if g[0] == GHOST:
            return g in self.b_ghosts
        if g[0] == ANTI:
            return dual(g) in self.b_ghosts
        return False

    def proj(self, z):
        """Drop every term with a factor from the trivial model."""
        return z.filter(lambda m: not any(self._is_b(g) for g, _ in m))

    def t(self, z):
        """``t(x y) = (-1)^{|x|} x s_B(y) / j`` on B-form degree ``j``."""
        out = {}
        for m, c in z.terms.items():
            j = sum(e for g, e in m if self._is_b(g))
            if j == 0:
                continue
            for g, _ in m:
                if not self._is_b(g) or g not in self.s_gen:
                    continue
                k, h = self.s_gen[g]
                coeff, rest = left_derivative(m, g)
                sign, nm = mono_mul(((h, 1),), rest)
                if not sign:
                    continue
                v = out.get(nm, 0) + Fraction(sign * coeff * k) * c / j
                if v:
                    out[nm] = v
                else:
                    del out[nm]
        # s_B acts on the B factor; moving it there from the front of the
        # monomial is accounted for by the derivation sign above
        return Element(out, self.res.table, z.N)

    def d_L(self, z):
        return bracket(Element(self.L.terms, self.L.table, z.N), z)


def product_model(A, B):
    """Product of ``A = (resA, R)`` with a trivial model ``B = (resB, S)``."""
    resA, R = A
    resB, S = B
    if resB.table.n_pairs:
        raise ValueError("second factor must be a trivial model (no symplectic pairs)")
    table = resA.table
    gmap = {}
    for g in resB.ghosts():
        table, (ng,) = table.with_ghosts(g[1], 1)
        gmap[g] = ng
    full = dict(gmap)
    full.update({dual(g): dual(ng) for g, ng in gmap.items()})
    images = {g: im.with_table(table) for g, im in resA.images.items()}
    for g, ng in gmap.items():
        images[ng] = rename(resB.images[g], full, table)
    weights = None
    if resA.weights is not None:
        weights = dict(resA.weights)
        weights.update({ng: 0 for ng in gmap.values()})
    res = Resolution(table, images, resA.ideal, resA.extent, weights,
                     resA.ledger + ("product with trivial model",), resA.complete)
    Sp = Element(rename(S, full, table).terms, table, R.N)
    L = R.with_table(table) + Sp
    # the differential of S on B generators is a single term; invert it
    s_gen = {}
    for ng in gmap.values():
        for g in (ng, dual(ng)):
            img = bracket(Sp, Element.gen(table, g))
            if len(img) == 1:
                (m, c), = img.terms.items()
                (h, e), = m
                s_gen[h] = (Fraction(1) / c, g)
    return ProductModel(res, L, gmap, frozenset(gmap.values()), s_gen)


__all__ = [
    "exp_ad", "gauge_match", "GaugeEquivalence", "trivial_model", "product_model", "ProductModel",
    "check_generator", "GaugeError",
]
