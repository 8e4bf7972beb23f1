"""Exact Fourier-Motzkin feasibility for small rational systems.

Constraints read ``sum(c_i * x_i) <= b`` or, when strict, ``< b``.  A
feasible system gets an explicit rational solution by back-substitution.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple
    bound: Fraction
    strict: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        object.__setattr__(self, "bound", Fraction(self.bound))

    def holds(self, xs: Sequence[Fraction]) -> bool:
        lhs = sum(c * x for c, x in zip(self.coeffs, xs))
        return lhs < self.bound if self.strict else lhs <= self.bound

    def normalized(self) -> "Constraint":
        # scale so the first nonzero coefficient has absolute value 1
        piv = next((abs(c) for c in self.coeffs if c), None)
        if piv is None or piv == 1:
            return self
        return Constraint(tuple(c / piv for c in self.coeffs), self.bound / piv, self.strict)


def upper(nvars: int, i: int, b, strict: bool = False) -> Constraint:
    """``x_i <= b`` (or ``<``)."""
    c = [0] * nvars
    c[i] = 1
    return Constraint(tuple(c), b, strict)


def lower(nvars: int, i: int, b, strict: bool = False) -> Constraint:
    """``x_i >= b`` (or ``>``)."""
    c = [0] * nvars
    c[i] = -1
    return Constraint(tuple(c), -Fraction(b), strict)


def pair_sum_at_least(nvars: int, i: int, j: int, b) -> Constraint:
    """``x_i + x_j >= b``."""
    c = [0] * nvars
    c[i] -= 1
    c[j] -= 1
    return Constraint(tuple(c), -Fraction(b))


def _eliminate(cons: list[Constraint], k: int) -> list[Constraint]:
    pos, neg, rest = [], [], []
    for c in cons:
        a = c.coeffs[k]
        (pos if a > 0 else neg if a < 0 else rest).append(c)
    out = set(rest)
    for p in pos:
        for q in neg:
            a, b = p.coeffs[k], -q.coeffs[k]
            coeffs = tuple(b * x + a * y for x, y in zip(p.coeffs, q.coeffs))
            out.add(Constraint(coeffs, b * p.bound + a * q.bound,
                               p.strict or q.strict).normalized())
    return list(out)


def feasible(constraints: Sequence[Constraint], nvars: int) -> tuple[Fraction, ...] | None:
    """A rational point satisfying every constraint, or None."""
    levels = [[c.normalized() for c in constraints]]
    for k in range(nvars - 1, -1, -1):
        levels.append(_eliminate(levels[-1], k))
    for c in levels[-1]:
        if not (0 < c.bound if c.strict else 0 <= c.bound):
            return None
    xs = [Fraction(0)] * nvars
    # levels[nvars - 1 - k] mentions x_0..x_k only
    for k in range(nvars):
        lo, lo_strict, hi, hi_strict = None, False, None, False
        for c in levels[nvars - 1 - k]:
            a = c.coeffs[k]
            if not a:
                continue
            rest = sum(c.coeffs[t] * xs[t] for t in range(k))
            val = (c.bound - rest) / a
            if a > 0:
                if hi is None or val < hi or (val == hi and c.strict):
                    hi, hi_strict = val, c.strict
            else:
                if lo is None or val > lo or (val == lo and c.strict):
                    lo, lo_strict = val, c.strict
        if lo is not None and hi is not None:
            xs[k] = lo if lo == hi else (lo + hi) / 2
        elif lo is not None:
            xs[k] = lo + 1 if lo_strict else lo
        elif hi is not None:
            xs[k] = hi - 1 if hi_strict else hi
    if not all(c.holds(xs) for c in constraints):
        raise ArithmeticError("back-substitution produced an infeasible point")
    return tuple(xs)
