"""Sparse exact Gaussian elimination over the rationals.

Vectors are dicts ``row key -> Fraction``; row keys must be mutually
comparable so that the pivot of a vector (its largest row) is deterministic.
"""
from __future__ import annotations

from fractions import Fraction


def _axpy(target, vec, c):
    for r, v in vec.items():
        w = target.get(r, 0) - c * v
        if w:
            target[r] = w
        else:
            target.pop(r, None)


class Echelon:
    """Incremental row-echelon span of column vectors.

    Each stored pivot vector remembers its expression in terms of the
    labelled columns that were added, so membership queries return
    explicit preimages.
    """

    def __init__(self):
        self.pivots = {}  # row -> (vector normalized to 1 at row, combination)
        self.kernel = []  # combinations of columns mapping to zero

    def __len__(self):
        return len(self.pivots)

    def reduce(self, vec, track=False):
        """Eliminate pivot rows from ``vec``; returns (residue, combination used)."""
        vec = dict(vec)
        acc = {} if track else None
        pivots = self.pivots
        while True:
            hits = [r for r in vec if r in pivots]
            if not hits:
                return vec, acc
            r = max(hits)
            c = vec[r]
            pvec, pcomb = pivots[r]
            _axpy(vec, pvec, c)
            if track:
                for k, v in pcomb.items():
                    w = acc.get(k, 0) + c * v
                    if w:
                        acc[k] = w
                    else:
                        acc.pop(k, None)

    def add(self, label, vec):
        """Add column ``label`` with image ``vec``; returns True if it enlarged the span."""
        res, acc = self.reduce(vec, track=True)
        comb = {label: Fraction(1)}
        for k, v in acc.items():
            comb[k] = comb.get(k, 0) - v
        comb = {k: v for k, v in comb.items() if v}
        if not res:
            self.kernel.append(comb)
            return False
        r = max(res)
        inv = 1 / res[r]
        self.pivots[r] = ({k: v * inv for k, v in res.items()}, {k: v * inv for k, v in comb.items()})
        return True

    def solve(self, target):
        """A combination of columns whose image is ``target``, or None."""
        res, acc = self.reduce(target, track=True)
        if res:
            return None
        return acc

    def contains(self, vec):
        return not self.reduce(vec)[0]
