"""Exact BRST/BFV constructions for polynomial constraint systems."""
from .algebra import Element, GeneratorTable
from .brst import Charge, brst_charge, cme_check, d_R_apply, q0_charge
from .cohomology import h0_bracket, h0_lift, invariance_check, is_exact, probe_exact
from .gauge import GaugeEquivalence, exp_ad, gauge_match, product_model, trivial_model
from .groebner import PolyIdeal, PolyRing, buchberger
from .poisson import bracket, filtration_bound, jacobiator
from .quantize import (
    QElement, normal_order, q_inv, q_map, qbracket_over_hbar, qexp_ad, qme_solve, qmul,
    quantum_gauge_match,
)
from .tate import Homotopy, Resolution, SliceBounds, delta_apply, koszul_init, pibar, tate_extend

__version__ = "0.1.0"

__all__ = [
    "Element", "GeneratorTable", "Charge", "brst_charge", "cme_check", "d_R_apply", "q0_charge",
    "h0_bracket", "h0_lift", "invariance_check", "is_exact", "probe_exact", "GaugeEquivalence",
    "exp_ad", "gauge_match", "product_model", "trivial_model", "PolyIdeal", "PolyRing", "buchberger",
    "bracket", "filtration_bound", "jacobiator", "QElement", "normal_order", "q_inv", "q_map",
    "qbracket_over_hbar", "qexp_ad", "qme_solve", "qmul", "quantum_gauge_match", "Homotopy",
    "Resolution", "SliceBounds", "delta_apply", "koszul_init", "pibar", "tate_extend",
]
