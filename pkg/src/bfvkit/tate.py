"""Tate resolutions of P/J, the differential delta, the projection pibar and the homotopy s.

The resolution algebra T is generated over P by ghosts of negative degree;
``delta`` is the odd derivation fixed by the ghost images.  Linear problems
are solved on finite *slices*.  When all constraints are homogeneous, every
ghost gets an internal weight (polynomial degree of its image), delta
preserves the total weight, and a slice is the finite space of monomials of
fixed homological degree and weight, so solves there are complete.  For
inhomogeneous constraints slices are bounded by polynomial degree instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

from .algebra import (
    GHOST, Element, GeneratorTable, gen_odd, left_derivative, mono_degree,
    mono_mul, mono_pdeg, mono_ppart, mono_split,
)
from .groebner import (
    PolyIdeal, PolyRing, buchberger, element_to_poly, is_homogeneous, mono_to_exps,
    pdeg, poly_to_element,
)
from .linalg import Echelon


class SliceError(RuntimeError):
    """A slice solve failed: the complex is not acyclic where it was needed."""


class ShallowResolution(ValueError):
    pass


@dataclass(frozen=True)
class SliceBounds:
    """``D`` bounds the polynomial degree of slice coefficients.

    ``W`` (ghost word length) is kept in cache keys and model files but never
    cuts anything: ghost words of a fixed homological degree are finite.
    ``widen`` is how far the homotopy may raise ``D`` before giving up.
    """

    D: int = 4
    W: int = 6
    widen: int = 3


@dataclass
class _Cache:
    delta: dict = field(default_factory=dict)
    nf: dict = field(default_factory=dict)
    words: dict = field(default_factory=dict)
    pmonos: dict = field(default_factory=dict)
    deg1: object = None


@dataclass(frozen=True)
class Resolution:
    table: GeneratorTable
    images: dict  # ghost -> Element of T (untruncated)
    ideal: PolyIdeal
    extent: int = 1
    weights: dict = None  # generator -> weight, or None when inhomogeneous
    ledger: tuple = ()
    complete: bool = False  # acyclic in every degree by construction
    _cache: _Cache = field(default_factory=_Cache, compare=False, repr=False)

    @property
    def homogeneous(self):
        return self.weights is not None

    def image(self, g):
        return self.images[g]

    def ghosts(self, l=None):
        return self.table.ghosts(l)

    def gen_weight(self, g):
        if g[0] <= 1:
            return 1
        return self.weights[g]

    def mono_internal_weight(self, m):
        return sum(self.gen_weight(g) * e for g, e in m)

    # ------------------------------------------------------------------ delta
    def delta_mono(self, m):
        cache = self._cache.delta
        hit = cache.get(m)
        if hit is not None:
            return hit
        out = {}
        for g, _ in m:
            if g[0] != GHOST:
                continue
            coeff, rest = left_derivative(m, g)
            for im, ic in self.images[g].terms.items():
                sign, nm = mono_mul(im, rest)
                if sign:
                    v = out.get(nm, 0) + sign * coeff * ic
                    if v:
                        out[nm] = v
                    else:
                        del out[nm]
        cache[m] = out
        return out

    # ------------------------------------------------------------- normal forms
    def nf_mono(self, p):
        """Normal form of a pure symplectic monomial as a dict of monomials."""
        cache = self._cache.nf
        hit = cache.get(p)
        if hit is not None:
            return hit
        n = self.table.n_pairs
        f = {mono_to_exps(p, n): Fraction(1)}
        r = self.ideal.normal_form(f) if self.ideal.basis else f
        out = poly_to_element(r, self.table).terms
        cache[p] = out
        return out

    def deg1_data(self):
        """Ideal generated by the nonzero images of degree -1 ghosts, with those ghosts."""
        if self._cache.deg1 is None:
            ghosts, gens = [], []
            for g in self.ghosts(1):
                im = self.images[g]
                if im:
                    ghosts.append(g)
                    gens.append(element_to_poly(im))
            if [dict(g) for g in self.ideal.gens] == gens:
                ideal = self.ideal
            else:
                ideal = buchberger(gens, self.ideal.ring)
            self._cache.deg1 = (ghosts, ideal)
        return self._cache.deg1

    # ------------------------------------------------------------------ slices
    def ghost_words(self, d):
        """All ghost monomials of homological degree ``d`` (finite)."""
        cache = self._cache.words
        if d in cache:
            return cache[d]
        ghosts = self.ghosts()
        out = []

        def rec(idx, remaining, acc):
            if remaining == 0:
                out.append(tuple(acc))
                return
            for k in range(idx, len(ghosts)):
                g = ghosts[k]
                l = g[1]
                if l > remaining:
                    continue
                maxe = 1 if gen_odd(g) else remaining // l
                for e in range(1, maxe + 1):
                    if e * l > remaining:
                        break
                    acc.append((g, e))
                    rec(k + 1, remaining - e * l, acc)
                    acc.pop()

        rec(0, -d, [])
        out.sort()
        cache[d] = out
        return out

    def p_monomials(self, k):
        cache = self._cache.pmonos
        if k in cache:
            return cache[k]
        gens = self.table.coords() + self.table.momenta()
        out = []
        if k == 0:
            out = [()]
        elif gens:
            for combo in combinations_with_replacement(gens, k):
                exps = {}
                for g in combo:
                    exps[g] = exps.get(g, 0) + 1
                out.append(tuple(sorted(exps.items())))
        out.sort()
        cache[k] = out
        return out

    def slice_basis(self, d, w=None, D=None):
        """Monomials of T of degree ``d`` and weight ``w`` (homogeneous) or P-degree <= ``D``."""
        out = []
        for gw in self.ghost_words(d):
            if w is not None:
                k = w - self.mono_internal_weight(gw)
                ks = [k] if k >= 0 else []
            else:
                ks = range(0, D + 1)
            for k in ks:
                for p in self.p_monomials(k):
                    out.append(p + gw)
        return out

    # ------------------------------------------------------------ serialization
    def dumps(self):
        r = self.ideal.ring
        lines = ["# tate resolution", "table " + self.table.header()]
        lines.append("ring " + " ".join(r.names) + " | " + r.order)
        lines.append(f"constraints {len(self.ideal.gens)}")
        lines += ["  " + r.to_str(g) for g in self.ideal.gens]
        lines.append(f"extent {self.extent}")
        lines.append("homogeneous " + ("yes" if self.homogeneous else "no"))
        for g in self.ghosts():
            w = f" weight {self.weights[g]}" if self.homogeneous else ""
            lines.append(f"ghost {self.table.name(g)}{w}")
            lines += ["  " + ln for ln in self.images[g].to_text().splitlines()]
        for entry in self.ledger:
            lines.append("ledger " + entry)
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text, ideal=None):
        lines = text.splitlines()
        table = GeneratorTable.from_header(lines[1][len("table "):])
        names, _, order = lines[2][len("ring "):].partition(" | ")
        ring = PolyRing(tuple(names.split()), order.strip())
        nc = int(lines[3].split()[1])
        gens = [ring.from_str(s) for s in lines[4: 4 + nc]]
        pos = 4 + nc
        extent = int(lines[pos].split()[1])
        homogeneous = lines[pos + 1].split()[1] == "yes"
        pos += 2
        images, weights, ledger = {}, {}, []
        while pos < len(lines):
            line = lines[pos]
            if line.startswith("ghost "):
                parts = line.split()
                g = table.gen(parts[1])
                if homogeneous:
                    weights[g] = int(parts[3])
                body = []
                pos += 1
                while pos < len(lines) and lines[pos].startswith("  "):
                    body.append(lines[pos].strip())
                    pos += 1
                images[g] = Element.from_text("\n".join(body), table)
                continue
            if line.startswith("ledger "):
                ledger.append(line[len("ledger "):])
            pos += 1
        if ideal is None:
            ideal = buchberger(gens, ring)
        return cls(table, images, ideal, extent, weights if homogeneous else None, tuple(ledger))


# ---------------------------------------------------------------------------


def koszul_init(ideal, table=None):
    """Koszul complex: one degree -1 ghost ``e1_i`` per generator with ``delta e1_i = gens[i]``."""
    if table is None:
        n = ideal.ring.nvars // 2
        table = GeneratorTable(n)
    for g in ideal.gens:
        if not g:
            raise ValueError("zero constraint")
    k = len(ideal.gens)
    table, ghosts = table.with_ghosts(1, k) if k else (table, [])
    images = {g: poly_to_element(f, table) for g, f in zip(ghosts, ideal.gens)}
    weights = None
    if all(is_homogeneous(f) for f in ideal.gens):
        weights = {g: pdeg(f) for g, f in zip(ghosts, ideal.gens)}
    return Resolution(table, images, ideal, 1, weights, ("koszul ghosts=%d" % k,))


def delta_apply(res, a, allow_antighosts=False):
    """Apply delta to ``a``.

    On antighost factors delta vanishes, which realizes
    ``delta(b t) = (-1)^{|b|} b delta(t)``.
    """
    if not allow_antighosts and a.has_antighosts():
        raise ValueError("delta_apply expects an element of T (no antighosts)")
    out = {}
    for m, c in a.terms.items():
        for nm, k in res.delta_mono(m).items():
            v = out.get(nm, 0) + k * c
            if v:
                out[nm] = v
            else:
                del out[nm]
    return Element(out, _bigger(res.table, a.table), a.N)


def _bigger(t1, t2):
    return t2 if t1.issubtable(t2) else t1


def pibar(res, a):
    """Projection to normal forms of ghost-free terms; kills anything with a ghost factor."""
    out = {}
    for m, c in a.terms.items():
        t, b = mono_split(m)
        p, rest = mono_ppart(t)
        if rest:
            continue
        for nm, k in res.nf_mono(p).items():
            full = nm + b
            v = out.get(full, 0) + k * c
            if v:
                out[full] = v
            else:
                del out[full]
    return Element(out, _bigger(res.table, a.table), a.N)


class Homotopy:
    """Contracting homotopy s with ``delta s + s delta = 1 - pibar``.

    s is fixed monomial by monomial: on a degree 0 monomial it is the Gröbner
    certificate of ``m - NF(m)``; below degree 0 it is the echelon solution
    of ``delta y = m - s(delta m)`` on the slice containing the target.  On
    antighost factors it acts as the identity: ``s(t b) = s(t) b``.
    """

    def __init__(self, res, bounds=None):
        self.res = res
        self.bounds = bounds or SliceBounds()
        self._memo = {}
        self._echelons = {}
        self.log = []

    def __call__(self, a):
        out = {}
        groups = {}
        for m, c in a.terms.items():
            t, b = mono_split(m)
            groups.setdefault(b, {})[t] = c
        for b, part in groups.items():
            for t, c in part.items():
                for nm, k in self.mono(t).items():
                    full = nm + b
                    v = out.get(full, 0) + k * c
                    if v:
                        out[full] = v
                    else:
                        del out[full]
        return Element(out, _bigger(self.res.table, a.table), a.N)

    def mono(self, t):
        hit = self._memo.get(t)
        if hit is not None:
            return hit
        res = self.res
        k = mono_degree(t)
        if k == 0:
            out = self._lift(t)
        else:
            target = {t: Fraction(1)}
            for m, c in res.delta_mono(t).items():
                for nm, v in self.mono(m).items():
                    w = target.get(nm, 0) - c * v
                    if w:
                        target[nm] = w
                    else:
                        target.pop(nm, None)
            out = self._solve(k - 1, target) if target else {}
        self._memo[t] = out
        return out

    def _lift(self, p):
        res = self.res
        nf = res.nf_mono(p)
        diff = {p: Fraction(1)}
        for m, c in nf.items():
            w = diff.get(m, 0) - c
            if w:
                diff[m] = w
            else:
                diff.pop(m, None)
        if not diff:
            return {}
        ghosts, ideal = res.deg1_data()
        n = res.table.n_pairs
        f = {mono_to_exps(m, n): c for m, c in diff.items()}
        coeffs = ideal.lift(f)
        if coeffs is None:
            raise SliceError("normal form difference not in the ideal")
        out = {}
        for g, a in zip(ghosts, coeffs):
            for m, c in poly_to_element(a, res.table).terms.items():
                nm = m + ((g, 1),)
                out[nm] = out.get(nm, 0) + c
        return {m: c for m, c in out.items() if c}

    def _echelon(self, d, key):
        ech = self._echelons.get((d, key))
        if ech is None:
            res = self.res
            if res.homogeneous:
                basis = res.slice_basis(d, w=key)
            else:
                basis = res.slice_basis(d, D=key)
            ech = Echelon()
            for m in basis:
                ech.add(m, res.delta_mono(m))
            self._echelons[(d, key)] = ech
        return ech

    def _solve(self, d, target):
        res = self.res
        if res.homogeneous:
            parts = {}
            for m, c in target.items():
                parts.setdefault(res.mono_internal_weight(m), {})[m] = c
            out = {}
            for w in sorted(parts):
                sol = self._echelon(d, w).solve(parts[w])
                if sol is None:
                    raise SliceError(
                        f"delta is not onto the cycles in degree {d + 1} at weight {w}; "
                        "extend the resolution further"
                    )
                for m, c in sol.items():
                    out[m] = out.get(m, 0) + c
            return {m: c for m, c in out.items() if c}
        base = max(mono_pdeg(m) for m in target)
        for D in range(base, base + self.bounds.widen + 1):
            sol = self._echelon(d, D).solve(target)
            if sol is not None:
                if D > base:
                    self.log.append(f"widened slice degree {d} to D={D}")
                return sol
        raise SliceError(
            f"no preimage in degree {d} with polynomial degree <= {base + self.bounds.widen}"
        )


def homotopy_s(res, a, homotopy=None):
    return (homotopy or Homotopy(res))(a)


# ---------------------------------------------------------------------------
# extension


def _cycle_search_keys(res, d, bounds):
    if res.homogeneous:
        ws = set()
        for gw in res.ghost_words(d):
            base = res.mono_internal_weight(gw)
            ws.update(range(base, base + bounds.D + 1))
        return sorted(ws)
    return [bounds.D]


def homology_classes(res, d, bounds):
    """Representatives of cycles of degree ``d`` that are not boundaries, within bounds."""
    classes = []
    hom = Homotopy(res, bounds)
    for key in _cycle_search_keys(res, d, bounds):
        z_ech, b_ech = _cycle_and_boundary(res, hom, d, key)
        for z in z_ech.kernel:
            r, _ = b_ech.reduce(z)
            if r:
                b_ech.add(("class", len(classes)), r)
                classes.append(Element(r, res.table))
    return classes


def _cycle_and_boundary(res, hom, d, key):
    z_ech = Echelon()
    basis = res.slice_basis(d, w=key) if res.homogeneous else res.slice_basis(d, D=key)
    for m in basis:
        z_ech.add(m, res.delta_mono(m))
    b_ech = Echelon()
    lower = res.slice_basis(d - 1, w=key) if res.homogeneous else res.slice_basis(d - 1, D=key)
    for m in lower:
        b_ech.add(m, res.delta_mono(m))
    return z_ech, b_ech


def tate_extend(res, to_degree, bounds=None):
    """Adjoin ghosts of degrees down to ``-to_degree`` killing homology within slice bounds."""
    bounds = bounds or SliceBounds()
    if res.complete:
        return res
    for l in range(res.extent + 1, to_degree + 1):
        res = _extend_once(res, l, bounds)
    return res


def _extend_once(res, l, bounds):
    d = -l + 1
    added = 0
    if res.homogeneous:
        for w in _cycle_search_keys(res, d, bounds):
            hom = Homotopy(res, bounds)
            z_ech, b_ech = _cycle_and_boundary(res, hom, d, w)
            new = []
            for z in z_ech.kernel:
                r, _ = b_ech.reduce(z)
                if r:
                    b_ech.add(("new", len(new)), r)
                    new.append(r)
            if new:
                res = _adjoin(res, l, new, [w] * len(new))
                added += len(new)
    else:
        hom = Homotopy(res, bounds)
        z_ech, b_ech = _cycle_and_boundary(res, hom, d, bounds.D)
        kernel = sorted(z_ech.kernel, key=lambda z: (max(mono_pdeg(m) for m in z), sorted(z)))
        new = []
        for z in kernel:
            r, _ = b_ech.reduce(z)
            if not r:
                continue
            new.append(r)
            rem = bounds.D - min(mono_pdeg(m) for m in r)
            for k in range(0, max(rem, 0) + 1):
                for p in res.p_monomials(k):
                    b_ech.add(("mult", len(new), p), {mono_mul(p, m)[1]: c for m, c in r.items()})
        if new:
            res = _adjoin(res, l, new, None)
            added = len(new)
    desc = f"degree {d} acyclic up to D={bounds.D}: added {added} ghosts of degree {-l}"
    return Resolution(res.table, res.images, res.ideal, l, res.weights, res.ledger + (desc,), res.complete)


def _adjoin(res, l, vectors, weights):
    table, ghosts = res.table.with_ghosts(l, len(vectors))
    images = {g: im.with_table(table) for g, im in res.images.items()}
    for g, vec in zip(ghosts, vectors):
        images[g] = Element(vec, table)
    new_weights = None
    if res.weights is not None and weights is not None:
        new_weights = dict(res.weights)
        new_weights.update(zip(ghosts, weights))
    return Resolution(table, images, res.ideal, res.extent, new_weights, res.ledger, res.complete)


def trivial_resolution(pairs):
    """Acyclic resolution over the ground field: for each ``(l, count)`` ghosts
    ``n`` of degree ``-l`` and ``nt`` of degree ``-l-1`` with ``delta nt = n``."""
    table = GeneratorTable(0)
    images = {}
    spec = []
    for l, count in pairs:
        if l < 1 or count < 0:
            raise ValueError("trivial pairs need l >= 1 and count >= 0")
        for _ in range(count):
            table, (n,) = table.with_ghosts(l, 1)
            table, (nt,) = table.with_ghosts(l + 1, 1)
            spec.append((n, nt))
    for n, nt in spec:
        images[n] = Element.zero(table)
        images[nt] = Element.gen(table, n)
    images = {g: im.with_table(table) for g, im in images.items()}
    ideal = buchberger([], PolyRing(()))
    depth = table.depth
    res = Resolution(table, images, ideal, depth, {g: 0 for g in images}, ("trivial model",), True)
    return res, spec


__all__ = [
    "Resolution", "SliceBounds", "SliceError", "Homotopy", "koszul_init", "tate_extend",
    "delta_apply", "pibar", "homotopy_s", "homology_classes", "trivial_resolution",
]
