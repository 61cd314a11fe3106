"""Degree 0 cohomology (invariant functions on the constraint surface) and exactness probes."""
from __future__ import annotations

from dataclasses import dataclass

from .algebra import (
    Element, GeneratorTable, dual, mono_pdeg, truncate, x_slice,
)
from .brst import MasterEquationError, cme_check
from .groebner import element_to_poly, poly_to_element
from .linalg import Echelon
from .poisson import bracket


class SliceBoundsError(RuntimeError):
    """The slice was too small to decide a question and no degree argument applies."""


def _as_element(p, table):
    if isinstance(p, Element):
        return Element(p.terms, table)
    return poly_to_element(p, table)


def table_for_ideal(ideal):
    """Symplectic table matching the variable names of ``ideal.ring``."""
    names = ideal.ring.names
    n = len(names) // 2
    if n == 0:
        return GeneratorTable(0)
    return GeneratorTable(n, (), names[0].rstrip("0123456789"), names[n].rstrip("0123456789"))


def invariance_check(p, ideal):
    """Whether ``{J, p}`` lies in ``J``; returns ``(ok, certificates)``.

    ``certificates[k]`` expresses ``{gens[k], p}`` in terms of the generators
    (None where membership fails).
    """
    table = table_for_ideal(ideal)
    pe = _as_element(p, table)
    certs = []
    ok = True
    for g in ideal.gens:
        f = element_to_poly(bracket(poly_to_element(g, table), pe))
        c = ideal.lift(f)
        if c is None:
            ok = False
        certs.append(c)
    return ok, certs


@dataclass
class H0Class:
    """A degree 0 cocycle ``x = x0 + sum a_kj e_k* e_j`` representing ``x0`` mod J."""

    x0: Element
    a: dict  # (k, j) -> Element of P
    x: Element
    res: object

    def project(self):
        return self.x0


def h0_lift(p, res, R=None, N=2):
    """Lift an invariant polynomial to a cocycle modulo ``F^2`` (enough to fix its class)."""
    table = res.table
    x0 = _as_element(p, table)
    ghosts, ideal = res.deg1_data()
    a = {}
    x = Element(x0.terms, table, N)
    for k, gk in enumerate(ghosts):
        f = element_to_poly(bracket(res.images[gk], x0))
        coeffs = ideal.lift(f)
        if coeffs is None:
            raise ValueError("polynomial is not invariant: {J, p} is not contained in J")
        for j, (gj, c) in enumerate(zip(ghosts, coeffs)):
            if not c:
                continue
            ce = poly_to_element(c, table)
            a[(k, j)] = ce
            x = x + Element((ce * Element.monomial(table, [dual(gk), gj])).terms, table, N)
    cls = H0Class(x0, a, x, res)
    if R is not None:
        check = bracket(Element(R.terms, R.table, 2), Element(x.terms, table, 2))
        if check:
            raise MasterEquationError(f"lift is not closed modulo F^2: {check}")
    return cls


def h0_bracket(c1, c2):
    """Bracket of two classes, as the normal form of ``{x0, y0}`` modulo J."""
    res = c1.res
    b = bracket(c1.x0, c2.x0)
    nf = res.ideal.normal_form(element_to_poly(b))
    return poly_to_element(nf, res.table)


def h0_product(c1, c2):
    res = c1.res
    nf = res.ideal.normal_form(element_to_poly(c1.x0 * c2.x0))
    return poly_to_element(nf, res.table)


# ---------------------------------------------------------------------------


@dataclass
class ExactResult:
    status: str  # "exact", "none" (certified), or "insufficient"
    primitive: Element = None
    detail: str = ""


def _min_shift(R):
    """Least change of polynomial degree that bracketing with ``R`` can produce."""
    shifts = []
    for m in R.terms:
        d = mono_pdeg(m)
        # pairing through a symplectic variable removes one from each side
        shifts.append(d - 2 if d > 0 else d)
    return min(shifts, default=0)


def probe_exact(x, R, N, D=3, check=True):
    """Search ``y`` with ``{R, y} = x`` modulo ``F^N`` among monomials of P-degree <= ``D``."""
    if check and cme_check(R, N):
        raise MasterEquationError("R does not solve the master equation at this order")
    table = R.table if x.table.issubtable(R.table) else x.table
    if not x:
        return ExactResult("exact", Element.zero(table, N))
    k = x.degree()
    loss = max(0, 1 - k)
    Nout = N - loss
    target = truncate(Element(x.terms, table, N), Nout) if Nout >= 0 else Element.zero(table, 0)
    if not target:
        return ExactResult("exact", Element.zero(table, N), "target vanishes at this precision")
    Rt = Element(R.terms, table, N)

    def image(m):
        return truncate(bracket(Rt, Element({m: 1}, table, N)), Nout).terms

    ech = Echelon()
    for m in x_slice(table, k - 1, N, D):
        ech.add(m, image(m))
    sol = ech.solve(target.terms)
    if sol is not None:
        return ExactResult("exact", Element(sol, table, N))
    # degree argument: the lowest polynomial degree of the target can only be
    # reached from unknowns of degree <= d0 - shift
    d0 = min(mono_pdeg(m) for m in target.terms)
    bound = d0 - _min_shift(Rt)
    low = {m: c for m, c in target.terms.items() if mono_pdeg(m) == d0}
    ech = Echelon()
    if bound >= 0:
        for m in x_slice(table, k - 1, N, bound):
            img = {r: c for r, c in image(m).items() if mono_pdeg(r) == d0}
            ech.add(m, img)
    if ech.solve(low) is None:
        return ExactResult(
            "none", None,
            f"polynomial degree {d0} part unreachable: preimages of degree <= {bound} do not hit it",
        )
    return ExactResult("insufficient", None, f"no primitive with polynomial degree <= {D}")


def is_exact(x, R, N, D=3, check=True):
    """A primitive ``y`` with ``d_R y = x`` mod ``F^N``, or None when none exists.

    Raises :class:`SliceBoundsError` when the search slice was too small and
    the degree argument does not settle the question.
    """
    r = probe_exact(x, R, N, D, check)
    if r.status == "insufficient":
        raise SliceBoundsError(r.detail)
    return r.primitive


__all__ = [
    "invariance_check", "h0_lift", "h0_bracket", "h0_product", "is_exact", "probe_exact",
    "H0Class", "ExactResult", "SliceBoundsError",
]
