"""Loss-generating mechanisms.

Four kinds:

* ``stochastic`` - the first ``n_effective`` experts draw i.i.d. Bernoulli(1/2)
  losses, the rest always lose 1 (effective gap 1/2).
* ``alternating`` - two halves of the effective set take turns losing 0 while
  the ineffective experts always lose 1.
* ``switching`` - alternating up to an even ``switch_time``, then only expert 0
  loses 0.
* ``file`` - rows of a headerless CSV, one round per line.

Bernoulli bits are the low bit of raw 64-bit PCG64 outputs. Round ``t`` uses
outputs ``(t-1)*n_effective ... t*n_effective - 1`` of the stream seeded
with ``seed``, so a single round can be regenerated by jumping ahead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

KINDS = ("stochastic", "alternating", "switching", "file")
DETERMINISTIC_KINDS = ("alternating", "switching")

_CHUNK = 4096


class MechanismError(ValueError):
    """Invalid mechanism specification."""


class FileStreamError(ValueError):
    pass


class MissingRow(FileStreamError, IndexError):
    pass


class OutOfRangeLoss(FileStreamError):
    pass


class ParseError(FileStreamError):
    pass


@dataclass(frozen=True)
class MechanismSpec:
    """A data-generating mechanism.

    ``odd_zero_half`` selects which half of the effective set loses 0 on odd
    rounds in the alternating phase (0: first half, 1: second half). Left as
    ``None`` it defaults to 1 for ``alternating``, so expert 0 loses
    ``t mod 2``, and to 0 for ``switching``.
    """

    kind: str
    n_experts: int
    n_effective: int = 1
    switch_time: int | None = None
    seed: int = 0
    path: str | None = None
    odd_zero_half: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MechanismError(f"unknown mechanism kind {self.kind!r}")
        if self.kind == "file":
            if self.path is None:
                raise MechanismError("file mechanism needs a path")
            if self.n_experts < 2:
                raise MechanismError("need at least 2 experts")
            return
        if self.n_experts < 2:
            raise MechanismError(f"need at least 2 experts, got {self.n_experts}")
        if not 1 <= self.n_effective <= self.n_experts:
            raise MechanismError(f"need 1 <= N0 <= N, got N0={self.n_effective}, N={self.n_experts}")
        if self.kind in DETERMINISTIC_KINDS:
            if self.n_effective < 2 or self.n_effective % 2:
                raise MechanismError(f"{self.kind} needs an even N0 >= 2, got {self.n_effective}")
            if self.odd_zero_half not in (None, 0, 1):
                raise MechanismError("odd_zero_half must be 0 or 1")
        if self.kind == "switching":
            t1 = self.switch_time
            if t1 is None or t1 < 2 or t1 % 2:
                raise MechanismError(f"switch_time must be an even integer >= 2, got {t1}")
        if self.kind == "stochastic" and not 0 <= self.seed < 2**64:
            raise MechanismError("seed must fit in 64 unsigned bits")

    @property
    def deterministic(self) -> bool:
        return self.kind in DETERMINISTIC_KINDS or self.kind == "file"

    @property
    def zero_half(self) -> int:
        if self.odd_zero_half is not None:
            return self.odd_zero_half
        return 1 if self.kind == "alternating" else 0

    @property
    def gap(self) -> float:
        """Effective stochastic gap of the built-in constructions."""
        if self.kind == "file":
            return math.inf
        return 0.5

    def with_seed(self, seed: int) -> "MechanismSpec":
        return replace(self, seed=seed)


def _alternating_row(spec: MechanismSpec, odd: bool) -> np.ndarray:
    n, h = spec.n_experts, spec.n_effective // 2
    row = np.ones(n)
    first_half_zero = (spec.zero_half == 0) == odd
    if first_half_zero:
        row[:h] = 0.0
    else:
        row[h:2 * h] = 0.0
    return row


def alternating_losses(spec: MechanismSpec, t: int) -> np.ndarray:
    return _alternating_row(spec, t % 2 == 1)


def _switched_row(n: int) -> np.ndarray:
    row = np.ones(n)
    row[0] = 0.0
    return row


def switching_losses(spec: MechanismSpec, t: int) -> np.ndarray:
    if t <= spec.switch_time:
        return alternating_losses(spec, t)
    return _switched_row(spec.n_experts)


def stochastic_gap_losses(spec: MechanismSpec, t: int, seed: int | None = None) -> np.ndarray:
    """Losses of round ``t`` (1-based) for the Bernoulli(1/2) gap mechanism."""
    bg = np.random.PCG64(spec.seed if seed is None else seed)
    bg.advance((t - 1) * spec.n_effective)
    row = np.ones(spec.n_experts)
    row[: spec.n_effective] = bg.random_raw(spec.n_effective) & np.uint64(1)
    return row


@lru_cache(maxsize=16)
def _load_rows(path: str) -> tuple[tuple[float, ...], ...]:
    rows = []
    try:
        with open(path, newline="") as fh:
            for lineno, rec in enumerate(csv.reader(fh), start=1):
                if not rec:
                    continue
                try:
                    vals = tuple(float(x) for x in rec)
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: {exc}") from None
                rows.append(vals)
    except OSError as exc:
        raise FileStreamError(f"cannot read {path}: {exc}") from exc
    return tuple(rows)


def file_losses(spec: MechanismSpec, t: int) -> np.ndarray:
    rows = _load_rows(str(Path(spec.path)))
    if not 1 <= t <= len(rows):
        raise MissingRow(f"{spec.path} has {len(rows)} rows, asked for round {t}")
    row = np.array(rows[t - 1])
    if row.size != spec.n_experts:
        raise ParseError(f"{spec.path}:{t}: expected {spec.n_experts} fields, got {row.size}")
    if not np.all(np.isfinite(row)) or np.any(row < 0) or np.any(row > 1):
        raise OutOfRangeLoss(f"{spec.path}:{t}: losses must lie in [0, 1]")
    return row


def file_row_count(path) -> int:
    return len(_load_rows(str(Path(path))))


def losses_at(spec: MechanismSpec, t: int, seed: int | None = None) -> np.ndarray:
    """Loss vector of round ``t`` as a pure function of ``(spec, t, seed)``."""
    if t < 1:
        raise ValueError(f"rounds start at 1, got {t}")
    if spec.kind == "stochastic":
        return stochastic_gap_losses(spec, t, seed)
    if spec.kind == "alternating":
        return alternating_losses(spec, t)
    if spec.kind == "switching":
        return switching_losses(spec, t)
    return file_losses(spec, t)


class LossStream:
    """Sequential loss vectors for rounds 1, 2, ...; identical to ``losses_at``.

    Rows are returned read-only and may be shared between rounds.
    """

    def __init__(self, spec: MechanismSpec, seed: int | None = None):
        self.spec = spec
        self.seed = spec.seed if seed is None else seed
        self.t = 0
        if spec.kind == "stochastic":
            self._bg = np.random.PCG64(self.seed)
            self._buf = np.empty((0, spec.n_effective))
            self._pos = 0
        elif spec.kind in DETERMINISTIC_KINDS:
            rows = [_alternating_row(spec, True), _alternating_row(spec, False)]
            if spec.kind == "switching":
                rows.append(_switched_row(spec.n_experts))
            for r in rows:
                r.setflags(write=False)
            self._rows = rows

    def __iter__(self):
        return self

    def __next__(self) -> np.ndarray:
        self.t += 1
        t, spec = self.t, self.spec
        if spec.kind == "alternating":
            return self._rows[0 if t % 2 else 1]
        if spec.kind == "switching":
            if t > spec.switch_time:
                return self._rows[2]
            return self._rows[0 if t % 2 else 1]
        if spec.kind == "file":
            return file_losses(spec, t)
        if self._pos == len(self._buf):
            n0 = spec.n_effective
            self._buf = (self._bg.random_raw((_CHUNK, n0)) & np.uint64(1)).astype(float)
            self._pos = 0
        row = np.ones(spec.n_experts)
        row[: spec.n_effective] = self._buf[self._pos]
        self._pos += 1
        return row
