"""Weight vectors on the probability simplex and the numeric primitives built on them.

Everything here is a pure function of its inputs. Logarithms are natural and
``0 * log 0`` is taken to be 0.
"""

from __future__ import annotations

import math

import numpy as np

SIMPLEX_ATOL = 1e-9

# below this many distinct loss values the scalar path beats numpy's per-call overhead
_SCALAR_GROUPS = 48


class SimplexError(ValueError):
    """Base class for rejected weight / loss vectors."""


class NegativeEntry(SimplexError):
    pass


class SumNotOne(SimplexError):
    pass


class DimensionTooSmall(SimplexError):
    pass


class NonFiniteInput(SimplexError):
    pass


def validate_simplex(v, atol: float = SIMPLEX_ATOL) -> np.ndarray:
    """Return ``v`` as a float array after checking it lies on the simplex."""
    w = np.asarray(v, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise DimensionTooSmall(f"need at least 2 experts, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise NonFiniteInput("weight vector has non-finite entries")
    if np.any(w < 0):
        raise NegativeEntry(f"negative weight {w.min()!r}")
    total = float(w.sum())
    if abs(total - 1.0) > atol:
        raise SumNotOne(f"weights sum to {total!r}")
    return w


def validate_losses(losses, n: int | None = None) -> np.ndarray:
    """Check a per-round loss vector: finite, in [0, 1], and of length ``n`` if given."""
    l = np.asarray(losses, dtype=float)
    if l.ndim != 1 or l.size < 2:
        raise DimensionTooSmall(f"need at least 2 experts, got shape {l.shape}")
    if n is not None and l.size != n:
        raise SimplexError(f"expected {n} losses, got {l.size}")
    if not np.all(np.isfinite(l)):
        raise NonFiniteInput("loss vector has non-finite entries")
    if np.any(l < 0) or np.any(l > 1):
        raise SimplexError("losses must lie in [0, 1]")
    return l


def entropy(u) -> float:
    """Shannon entropy ``-sum u_i log u_i`` in nats."""
    u = np.asarray(u, dtype=float)
    nz = u[u > 0]
    return float(-np.sum(nz * np.log(nz)))


def softmax(L, eta: float) -> np.ndarray:
    """Exponential weights ``exp(-eta L_i) / sum_j exp(-eta L_j)``.

    The cumulative losses are shifted by their minimum first, so arbitrarily
    large totals never overflow.
    """
    L = np.asarray(L, dtype=float)
    if not (math.isfinite(eta) and np.all(np.isfinite(L))):
        raise NonFiniteInput("softmax needs finite losses and learning rate")
    if eta <= 0:
        raise ValueError(f"learning rate must be positive, got {eta}")
    e = np.exp(-eta * (L - L.min()))
    return e / e.sum()


def argmin_expert(L) -> int:
    """Index of the smallest cumulative loss; ties go to the lowest index."""
    return int(np.argmin(np.asarray(L, dtype=float)))


def group_losses(L) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collapse experts with identical cumulative loss.

    Returns ``(offsets, counts, inverse)`` where ``offsets`` are the distinct
    values minus the minimum, so ``offsets[0] == 0``, and
    ``offsets[inverse]`` rebuilds the shifted vector.
    """
    vals, inverse, counts = np.unique(
        np.asarray(L, dtype=float), return_inverse=True, return_counts=True
    )
    return vals - vals[0], counts, inverse


def grouped_softmax(offsets, counts, eta: float) -> np.ndarray:
    """Per-group expert weight of the exponential-weights vector (not summed over the group)."""
    e = np.exp(-eta * np.asarray(offsets, dtype=float))
    return e / np.dot(counts, e)


def grouped_softmax_entropy(offsets, counts, eta: float) -> float:
    """Entropy of ``softmax(L, eta)`` given the grouped form of ``L``.

    Equal to ``entropy(softmax(L, eta))`` up to roundoff, at O(#groups) cost.
    """
    if len(offsets) <= _SCALAR_GROUPS:
        if not isinstance(offsets, list):
            offsets = list(map(float, offsets))
            counts = list(map(int, counts))
        es = [math.exp(-eta * v) for v in offsets]
        z = 0.0
        for c, e in zip(counts, es):
            z += c * e
        h = 0.0
        for c, e in zip(counts, es):
            p = e / z
            if p > 0.0:
                h -= c * p * math.log(p)
        return h
    p = grouped_softmax(offsets, counts, eta)
    pos = p > 0
    return float(-np.dot(counts[pos], p[pos] * np.log(p[pos])))
