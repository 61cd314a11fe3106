"""BRST charges: the degree 1 solution of the classical master equation.

Starting from ``Q0 = sum_j (-1)^{1+d_j} e_j* delta(e_j)`` the recursion
``Q_{n+1} = -1/2 s{R_n, R_n}`` removes the residual of ``{R, R}`` one
filtration order at a time.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import Element, dual, mono_degree, mono_poscount, mono_weight, truncate
from .poisson import bracket
from .tate import Homotopy, ShallowResolution


class InvariantViolation(RuntimeError):
    pass


class MasterEquationError(ValueError):
    pass


def q0_charge(res, N):
    """Leading part of the charge, truncated at ``N``."""
    if not res.complete and res.ghosts() and res.extent < N - 1:
        raise ShallowResolution(
            f"resolution verified only down to degree {-res.extent}; charge mod F^{N} needs {-(N - 1)}"
        )
    table = res.table
    terms = {}
    for g in res.ghosts():
        l = g[1]
        if l >= N:
            continue
        sign = 1 if (1 - l) % 2 == 0 else -1  # (-1)^{1+d} with d = -l
        term = Element.gen(table, dual(g)) * res.images[g].with_table(table)
        for m, c in term.terms.items():
            terms[m] = terms.get(m, 0) + sign * c
    return Element(terms, table, N)


@dataclass
class StepRecord:
    index: int
    residual_weight: int
    terms: int

    def text(self):
        return f"step {self.index} residual_weight {self.residual_weight} terms {self.terms}"


@dataclass
class Charge:
    R: Element
    N: int
    steps: list = field(default_factory=list)
    residual: Element = None

    def dumps(self):
        lines = ["# brst charge", "table " + self.R.table.header(), f"N {self.N}"]
        lines += [s.text() for s in self.steps]
        lines.append("residual " + ("0" if not self.residual else "nonzero"))
        lines.append("terms")
        lines += ["  " + ln for ln in self.R.to_text().splitlines()]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text, table=None):
        from .algebra import GeneratorTable

        lines = text.splitlines()
        t = GeneratorTable.from_header(lines[1][len("table "):])
        table = table or t
        N = int(lines[2].split()[1])
        steps = []
        pos = 3
        while lines[pos].startswith("step "):
            p = lines[pos].split()
            steps.append(StepRecord(int(p[1]), int(p[3]), int(p[5])))
            pos += 1
        pos += 2  # residual, terms
        R = Element.from_text("\n".join(ln.strip() for ln in lines[pos:]), table, N)
        return cls(R, N, steps, cme_check(R, N))


def cme_check(R, N):
    """``{R, R}`` truncated at ``N``."""
    if R.N is not None and R.N != N:
        R = truncate(R, N)
    elif R.N is None:
        R = Element(R.terms, R.table, N)
    return bracket(R, R)


def brst_charge(res, N, homotopy=None):
    """Solve ``{R, R} = 0`` mod ``F^N`` starting from ``Q0``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    hom = homotopy or Homotopy(res)
    q0 = q0_charge(res, N)
    R = q0
    steps = []
    for n in range(N + 2):
        rr = bracket(R, R)
        if not rr:
            return Charge(R, N, steps, rr)
        if n > N:
            raise InvariantViolation(f"charge recursion did not terminate after {N + 1} steps")
        w = rr.min_weight()
        if w < n + 2 or rr.min_poscount() < 2:
            raise InvariantViolation(
                f"step {n}: residual has weight {w} and positive count {rr.min_poscount()}"
            )
        Q = hom(rr).scale(-1) / 2
        if not Q and rr:
            raise InvariantViolation(f"step {n}: homotopy annihilated a nonzero residual")
        R = R + Q
        steps.append(StepRecord(n + 1, w, len(Q)))
        if (R - q0).terms and min(mono_poscount(m) for m in (R - q0).terms) < 2:
            raise InvariantViolation("R - Q0 left the square of the antighost ideal")
    raise InvariantViolation("unreachable")


def d_R_apply(R, x, N, check=True):
    """``{R, x}`` modulo the filtration order that survives the precision loss."""
    if check and cme_check(R, N):
        raise MasterEquationError("R does not solve the master equation at this order")
    if x.N is not None and x.N < N:
        N = x.N
    Rt = Element(R.terms, R.table, N)
    out = bracket(Rt, Element(x.terms, x.table, N))
    degs = [mono_degree(m) for m in x.terms]
    loss = max([0] + [-d for d in degs])
    if loss:
        out = truncate(out, max(out.N - loss, 0))
    return out


def weights_of(a):
    return sorted({mono_weight(m) for m in a.terms})


__all__ = [
    "q0_charge", "brst_charge", "cme_check", "d_R_apply", "Charge", "InvariantViolation",
    "MasterEquationError",
]
