"""D.HEDGE, FTRL-CARE and META-CARE.

The functional core (``hedge_weights``, ``ftrlh_weights``, ``care_weights``,
``meta_weights``, ``meta_update``) is pure. The learner classes wrap it in a
two-phase per-round protocol: ``weights()`` for the current round, then
``observe(loss)``.

Round indexing: the weights played in round ``t`` are computed from the
cumulative losses ``L(t-1)``. FTRL "time" is the number of rounds already
observed and the regularizer scale is ``sqrt(time + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .rootfind import Bracket, bisect
from .simplex import group_losses, grouped_softmax, grouped_softmax_entropy, softmax

SQRT8 = math.sqrt(8.0)
DEFAULT_C_H = SQRT8
DEFAULT_C1 = SQRT8
DEFAULT_C2 = 1.0
DEFAULT_C_M = 100.0
DEFAULT_ROOT_TOL = 1e-12


class BracketViolation(RuntimeError):
    """The fixed-point learning rate was not found inside its guaranteed interval."""


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class HedgeConfig:
    g: float

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"g must be positive, got {self.g}")

    @classmethod
    def standard(cls, n: int, c_h: float = DEFAULT_C_H) -> "HedgeConfig":
        """``g(N) = c_h * sqrt(log N)``."""
        return cls(c_h * math.sqrt(math.log(n)))


@dataclass(frozen=True)
class CareConfig:
    c1: float = DEFAULT_C1
    c2: float = DEFAULT_C2
    root_tol: float = DEFAULT_ROOT_TOL

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0 and self.root_tol > 0):
            raise ValueError(f"CARE parameters must be positive: {self}")


@dataclass(frozen=True)
class PsiSpec:
    """Entropy transform of an FTRL regularizer, ``r_0 = -psi(H(u))``."""

    psi: Callable[[float], float]
    psi_prime: Callable[[float], float]


def linear_psi(g: float) -> PsiSpec:
    # plain entropic regularization, i.e. Hedge at rate g / sqrt(t+1)
    return PsiSpec(lambda s: s / g, lambda s: 1.0 / g)


def care_psi(c1: float, c2: float) -> PsiSpec:
    return PsiSpec(
        lambda s: math.sqrt(s + c2) / c1,
        lambda s: 1.0 / (2.0 * c1 * math.sqrt(s + c2)),
    )


def hedge_rate(t: int, cfg: HedgeConfig) -> float:
    if t < 1:
        raise ValueError(f"round index starts at 1, got {t}")
    return cfg.g / math.sqrt(t)


def hedge_weights(L_prev, t: int, cfg: HedgeConfig) -> np.ndarray:
    """D.HEDGE weights for round ``t`` from the losses of rounds ``1..t-1``."""
    return softmax(L_prev, hedge_rate(t, cfg))


def rate_bracket(n: int, t: int, psi: PsiSpec) -> tuple[float, float]:
    beta = math.sqrt(t + 1)
    return 1.0 / (beta * psi.psi_prime(0.0)), 1.0 / (beta * psi.psi_prime(math.log(n)))


def ftrlh_weights(L_prev, t: int, psi: PsiSpec, root_tol: float = DEFAULT_ROOT_TOL):
    """Solve the FTRL fixed point for an entropy-transform regularizer.

    ``L_prev`` holds the losses of ``t`` observed rounds. Returns ``(u, eta)``
    with ``u = softmax(L_prev, eta)`` and
    ``eta = 1 / (sqrt(t+1) * psi'(H(u)))``.
    """
    L_prev = np.asarray(L_prev, dtype=float)
    n = L_prev.size
    lo, hi = rate_bracket(n, t, psi)
    offsets, counts, inverse = group_losses(L_prev)
    if len(offsets) == 1:
        # entropy is pinned at log N whatever the rate
        return np.full(n, 1.0 / n), hi
    if not lo < hi:
        eta = hi
    else:
        beta = math.sqrt(t + 1)
        offs, cnts = offsets.tolist(), counts.tolist()
        if len(offs) > 48:
            offs, cnts = offsets, counts
        psi_prime = psi.psi_prime

        def residual(eta: float) -> float:
            return eta - 1.0 / (beta * psi_prime(grouped_softmax_entropy(offs, cnts, eta)))

        eta = bisect(residual, Bracket(lo, hi), tol=root_tol)
        if not (lo - root_tol <= eta <= hi + root_tol):
            raise BracketViolation(f"eta={eta} outside [{lo}, {hi}]")
    return grouped_softmax(offsets, counts, eta)[inverse], eta


def care_weights(L_prev, t: int, cfg: CareConfig):
    """FTRL-CARE weights and learning rate after ``t`` observed rounds."""
    return ftrlh_weights(L_prev, t, care_psi(cfg.c1, cfg.c2), cfg.root_tol)


def care_bracket(n: int, t: int, cfg: CareConfig) -> tuple[float, float]:
    s = math.sqrt(t + 1)
    return 2 * cfg.c1 * math.sqrt(cfg.c2) / s, 2 * cfg.c1 * math.sqrt(cfg.c2 + math.log(n)) / s


@dataclass(frozen=True)
class MetaCareState:
    hedge_cfg: HedgeConfig
    care_cfg: CareConfig
    c_m: float = DEFAULT_C_M
    meta_loss_hedge: float = 0.0
    meta_loss_care: float = 0.0
    rounds: int = 0

    def hedge_share(self) -> float:
        """Mixing weight on the D.HEDGE meta-expert."""
        if self.rounds == 0:
            return 0.5
        eta_m = self.c_m / math.sqrt(self.rounds)
        # two-point softmax, shifted by the smaller meta-loss
        d = eta_m * (self.meta_loss_hedge - self.meta_loss_care)
        if d >= 0:
            e = math.exp(-d)
            return e / (1.0 + e)
        return 1.0 / (1.0 + math.exp(d))


def meta_weights(state: MetaCareState, w_hedge, w_care) -> np.ndarray:
    w_hedge = np.asarray(w_hedge, dtype=float)
    w_care = np.asarray(w_care, dtype=float)
    if w_hedge.shape != w_care.shape:
        raise DimensionMismatch(f"{w_hedge.shape} vs {w_care.shape}")
    a = state.hedge_share()
    return a * w_hedge + (1.0 - a) * w_care


def meta_update(state: MetaCareState, loss, w_hedge, w_care) -> MetaCareState:
    loss = np.asarray(loss, dtype=float)
    w_hedge = np.asarray(w_hedge, dtype=float)
    w_care = np.asarray(w_care, dtype=float)
    if not (loss.shape == w_hedge.shape == w_care.shape):
        raise DimensionMismatch(f"{loss.shape}, {w_hedge.shape}, {w_care.shape}")
    return replace(
        state,
        meta_loss_hedge=state.meta_loss_hedge + float(loss @ w_hedge),
        meta_loss_care=state.meta_loss_care + float(loss @ w_care),
        rounds=state.rounds + 1,
    )


# -- stateful learners ---------------------------------------------------------


class Learner:
    """Two-phase online learner over ``n`` experts."""

    name = "learner"

    def __init__(self, n: int):
        if n < 2:
            raise ValueError(f"need at least 2 experts, got {n}")
        self.n = n
        self.L = np.zeros(n)
        self.t = 0  # rounds observed so far
        self._w = None

    def weights(self) -> np.ndarray:
        if self._w is None:
            self._w = self._compute()
        return self._w

    def observe(self, loss) -> None:
        self.weights()
        self.L += loss
        self.t += 1
        self._w = None

    def components(self) -> tuple["Learner", ...]:
        return ()

    def _compute(self) -> np.ndarray:
        raise NotImplementedError


class DecreasingHedge(Learner):
    name = "dhedge"

    def __init__(self, n: int, cfg: HedgeConfig):
        super().__init__(n)
        self.cfg = cfg

    def _compute(self):
        return hedge_weights(self.L, self.t + 1, self.cfg)


class FTRLCare(Learner):
    name = "ftrl-care"

    def __init__(self, n: int, cfg: CareConfig):
        super().__init__(n)
        self.cfg = cfg
        self.eta = None

    def _compute(self):
        w, self.eta = care_weights(self.L, self.t, self.cfg)
        return w


class MetaCare(Learner):
    """Exponential-weights mix of one D.HEDGE and one FTRL-CARE learner.

    The two components may be shared with other learners in the same game;
    ``observe`` then only advances the components when ``owns_components``.
    """

    name = "meta-care"

    def __init__(self, hedge: DecreasingHedge, care: FTRLCare, c_m: float = DEFAULT_C_M,
                 owns_components: bool = True):
        if hedge.n != care.n:
            raise DimensionMismatch(f"{hedge.n} vs {care.n} experts")
        super().__init__(hedge.n)
        self.hedge = hedge
        self.care = care
        self.owns_components = owns_components
        self.state = MetaCareState(hedge.cfg, care.cfg, c_m)

    def _compute(self):
        return meta_weights(self.state, self.hedge.weights(), self.care.weights())

    def observe(self, loss) -> None:
        self.weights()
        self.state = meta_update(self.state, loss, self.hedge.weights(), self.care.weights())
        super().observe(loss)
        if self.owns_components:
            self.hedge.observe(loss)
            self.care.observe(loss)

    def components(self):
        return (self.hedge, self.care)


# -- configuration -------------------------------------------------------------

ALGORITHMS = ("dhedge", "ftrl-care", "meta-care")


@dataclass(frozen=True)
class LearnerSpec:
    """N-independent description of a learner.

    D.HEDGE uses ``g`` when given, else ``g(N) = c_h * sqrt(log N)``.
    """

    algorithm: str
    c_h: float = DEFAULT_C_H
    g: float | None = None
    c1: float = DEFAULT_C1
    c2: float = DEFAULT_C2
    c_m: float = DEFAULT_C_M
    root_tol: float = DEFAULT_ROOT_TOL
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        for name in ("c_h", "c1", "c2", "c_m", "root_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.g is not None and not self.g > 0:
            raise ValueError("g must be positive")

    @property
    def name(self) -> str:
        return self.label or self.algorithm

    def hedge_config(self, n: int) -> HedgeConfig:
        return HedgeConfig(self.g) if self.g is not None else HedgeConfig.standard(n, self.c_h)

    def care_config(self) -> CareConfig:
        return CareConfig(self.c1, self.c2, self.root_tol)


def build_learners(specs, n: int) -> list[Learner]:
    """Instantiate learners for one game.

    A META-CARE learner reuses any D.HEDGE / FTRL-CARE learner in ``specs``
    with identical parameters, so each distinct base learner is solved once
    per round. Weights depend only on the loss history, so sharing does not
    change any trace. Components are never advanced by the META-CARE learner
    here; use ``step_all`` to drive the returned list.
    """
    hedges: dict[HedgeConfig, DecreasingHedge] = {}
    cares: dict[CareConfig, FTRLCare] = {}

    def hedge(cfg):
        return hedges.setdefault(cfg, DecreasingHedge(n, cfg))

    def care(cfg):
        return cares.setdefault(cfg, FTRLCare(n, cfg))

    out: list[Learner] = []
    for spec in specs:
        if spec.algorithm == "dhedge":
            out.append(hedge(spec.hedge_config(n)))
        elif spec.algorithm == "ftrl-care":
            out.append(care(spec.care_config()))
        else:
            out.append(MetaCare(hedge(spec.hedge_config(n)), care(spec.care_config()),
                                spec.c_m, owns_components=False))
    return out


def step_all(learners, loss) -> None:
    """Advance every distinct learner (and component) by one round, exactly once.

    Mixtures are advanced before their components so they read this round's
    component weights.
    """
    seen: set[int] = set()
    ordered: list[Learner] = []
    for lrn in learners:
        for obj in (lrn, *lrn.components()):
            if id(obj) not in seen:
                seen.add(id(obj))
                ordered.append(obj)
    ordered.sort(key=lambda o: not o.components())
    for obj in ordered:
        if isinstance(obj, MetaCare) and obj.owns_components:
            raise ValueError("step_all drives components itself; build with owns_components=False")
        obj.observe(loss)
