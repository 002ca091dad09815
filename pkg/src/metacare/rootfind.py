"""Bracketed bisection for monotone scalar equations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

EDGE_TOL = 1e-12


class NoSignChange(ValueError):
    """The function has the same sign at both ends of the bracket."""


class MaxIterExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"bracket endpoints must be finite: {self}")
        if not self.lo < self.hi:
            raise ValueError(f"empty bracket: {self}")

    @property
    def width(self) -> float:
        return self.hi - self.lo


def max_bisect_iters(b: Bracket, tol: float) -> int:
    return max(0, math.ceil(math.log2(b.width / tol))) + 1


def bisect(
    f: Callable[[float], float],
    b: Bracket,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Find a root of ``f`` in ``[b.lo, b.hi]`` by plain bisection.

    Stops once the bracket is narrower than ``tol`` or ``|f(mid)| < tol``.
    If both endpoints share a sign but one is within ``EDGE_TOL`` of zero,
    that endpoint is returned; otherwise ``NoSignChange`` is raised.
    """
    lo, hi = b.lo, b.hi
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo < 0.0) == (fhi < 0.0):
        if min(abs(flo), abs(fhi)) < EDGE_TOL:
            return lo if abs(flo) <= abs(fhi) else hi
        raise NoSignChange(f"f({lo!r})={flo!r} and f({hi!r})={fhi!r} share a sign")
    lo_negative = flo < 0.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid) < tol or hi - lo < tol:
            return mid
        if (fmid < 0.0) == lo_negative:
            lo = mid
        else:
            hi = mid
    raise MaxIterExceeded(f"no convergence after {max_iter} iterations on {b}")
