import pytest

from bfvkit.algebra import GeneratorTable
from bfvkit.brst import brst_charge
from bfvkit.groebner import PolyRing, buchberger
from bfvkit.tate import Homotopy, SliceBounds, koszul_init, tate_extend

SO3_CONSTRAINTS = ("x2*p3 - x3*p2", "x3*p1 - x1*p3", "x1*p2 - x2*p1")


class Model:
    def __init__(self, table, constraints, N=4, D=3):
        self.table = table
        self.ring = PolyRing.for_table(table)
        self.gens = [self.ring.parse(c) for c in constraints]
        self.ideal = buchberger(self.gens, self.ring)
        self.koszul = koszul_init(self.ideal, table)
        self.bounds = SliceBounds(D=D)
        self.res = tate_extend(self.koszul, N - 1, self.bounds)
        self.hom = Homotopy(self.res, self.bounds)
        self.N = N
        self.charge = brst_charge(self.res, N, self.hom)
        self.R = self.charge.R


@pytest.fixture(scope="session")
def plane():
    """Rotations of the plane: one constraint x1 y2 - x2 y1 on two pairs."""
    return Model(GeneratorTable(2), ["x1*y2 - x2*y1"])


@pytest.fixture(scope="session")
def so3():
    """Angular momentum constraints on three pairs (x, p)."""
    return Model(GeneratorTable(3, (), "x", "p"), SO3_CONSTRAINTS)


_acceptance = {}


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        if "test_criterion_" in name:
            n = int(name.split("_")[2])
            if report.when == "call" or n not in _acceptance:
                _acceptance[n] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        status = "PASS" if _acceptance[n] == "passed" else "FAIL"
        terminalreporter.write_line(f"{status} criterion {n:2d}: {CRITERIA[n]}")
