"""Regret upper bounds for D.HEDGE and FTRL-CARE, and numeric checks of the supporting lemmas.

The bound formulas are evaluated term by term as stated, without algebraic
simplification. An infinite gap (``delta0 = math.inf``) makes every
``1/delta0`` term vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .simplex import entropy


@dataclass(frozen=True)
class BoundParams:
    N: int
    N0: int = 1
    delta0: float = math.inf
    g: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    T: int = 1

    def __post_init__(self):
        if not 1 <= self.N0 <= self.N or self.N < 2:
            raise ValueError(f"need N >= 2 and 1 <= N0 <= N: {self}")
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        if not (self.g > 0 and self.c1 > 0 and self.c2 > 0):
            raise ValueError("g, c1, c2 must be positive")
        if self.T < 0:
            raise ValueError("T must be non-negative")


@dataclass(frozen=True)
class BoundValue:
    adversarial: float
    adaptive: float
    t_threshold: int
    # whether the adaptive display is guarded by T > threshold (strict) or T >= threshold
    strict: bool

    def adaptive_applies(self, T: int) -> bool:
        return T > self.t_threshold if self.strict else T >= self.t_threshold


def _ceil_threshold(x: float) -> int:
    # T counts rounds from 1, so a vanishing threshold still means T >= 1
    return max(1, math.ceil(x))


def theorem4_bound(p: BoundParams) -> BoundValue:
    """D.HEDGE with learning rate g / sqrt(t)."""
    logN, logN0, g, T = math.log(p.N), math.log(p.N0), p.g, p.T
    inv_gap = 0.0 if math.isinf(p.delta0) else 1.0 / p.delta0
    adversarial = math.sqrt(T + 1) * (logN / g + g)
    tail = math.sqrt(2) * (logN / g + g)
    if p.N0 > 1:
        adaptive = (
            17 / 16 * math.sqrt(T) * (logN0 / g + g)
            + 32 * inv_gap * (logN / g) * (logN / g + g)
            + tail
        )
    else:
        adaptive = 5 * inv_gap * ((logN / g) * (logN / g + g) + 4 * (1 / g**2 + g**2)) + tail
    thr = 8 * (logN + g**2 / 4 + g) ** 2 * inv_gap**2 / g**2
    return BoundValue(adversarial, adaptive, _ceil_threshold(thr), strict=True)


def theorem5_constants(c1: float, c2: float) -> tuple[float, float, float, float]:
    C1 = 1 / c1 + 3 * c1 / 2
    C2 = math.sqrt(2) * C1 * (1 / (c1 * math.sqrt(c2)) + 1 / c2)
    C3 = math.sqrt(2) * (8 + 12 * c1**2) / (3 * c1**2 * math.sqrt(c2))
    C4 = max(c2, 3 * c1 * math.sqrt(c2) + 5 * c1**2 * c2 / 4)
    return C1, C2, C3, C4


def theorem5_bound(p: BoundParams) -> BoundValue:
    """FTRL-CARE with parameters (c1, c2)."""
    C1, C2, C3, C4 = theorem5_constants(p.c1, p.c2)
    logN, logN0, T = math.log(p.N), math.log(p.N0), p.T
    inv_gap = 0.0 if math.isinf(p.delta0) else 1.0 / p.delta0
    adversarial = C1 * math.sqrt((T + 1) * (logN + p.c2))
    burn_in = C2 * (logN + C4) ** 1.5 * inv_gap
    if p.N0 > 1:
        adaptive = 33 * C1 / 32 * math.sqrt((T + 1) * (logN0 + p.c2)) + burn_in + C3 * inv_gap
    else:
        adaptive = burn_in + (C3 + 6) * inv_gap
    thr = 2 * (logN + C4) ** 2 * inv_gap**2 / (p.c1**2 * p.c2)
    return BoundValue(adversarial, adaptive, _ceil_threshold(thr), strict=False)


def meta_overhead(T: int, c_m: float) -> float:
    """Regret of exponential weights over the two META-CARE components."""
    return math.sqrt(T + 1) * (math.log(2) / c_m + 3 * c_m / 4)


def lemma1_entropy_bound(u, effective_set, p: float) -> tuple[float, bool]:
    """Entropy bound in terms of the effective experts and the mass outside them."""
    u = np.asarray(u, dtype=float)
    eff = sorted(set(int(i) for i in effective_set))
    if not eff:
        raise ValueError("effective set must be non-empty")
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    outside = np.ones(u.size, dtype=bool)
    outside[eff] = False
    bound = (2 / (math.e * math.log(2))) * math.log(len(eff)) + (
        1 + 1 / ((1 - p) * math.e)
    ) * float(np.sum(u[outside] ** p))
    return bound, entropy(u) <= bound + 1e-12


# -- lemma property suites -------------------------------------------------------


@dataclass
class LemmaReport:
    cases: dict[str, int] = field(default_factory=dict)
    violations: list[tuple[str, dict]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        lines = []
        for name, n in self.cases.items():
            bad = sum(1 for v in self.violations if v[0] == name)
            lines.append(f"{name}: {n} cases, {bad} violations")
        for name, witness in self.violations[:20]:
            lines.append(f"  {name} violated at {witness}")
        return "\n".join(lines)


def _mixture_variance(alpha: float, x: float, support: np.ndarray, probs: np.ndarray) -> float:
    # brute force over the atoms of alpha*delta_x + (1-alpha)*nu
    atoms = np.concatenate(([x], support))
    w = np.concatenate(([alpha], (1 - alpha) * probs))
    mean = float(np.dot(w, atoms))
    return float(np.dot(w, (atoms - mean) ** 2))


def mixture_variance_bound(alpha: float) -> float:
    return alpha * (1 - alpha) if alpha >= 0.5 else 0.25


def check_mixture_variance(rng: np.random.Generator, cases: int = 10_000,
                           report: LemmaReport | None = None, support_size: int = 100) -> LemmaReport:
    report = report or LemmaReport()
    grid = np.linspace(0.0, 1.0, support_size)
    for k in range(cases):
        y = rng.uniform(0, 1)
        support = grid - y
        alpha = float(rng.uniform(0, 1)) if k % 10 else float(k % 20 == 0)
        x = float(rng.choice([-y, 1 - y, rng.uniform(-y, 1 - y)]))
        if k % 4 == 0:
            # worst case of the argument: nu is a Bernoulli on the endpoints
            mu = rng.uniform(0, 1)
            probs = np.zeros(support_size)
            probs[0], probs[-1] = 1 - mu, mu
        else:
            probs = rng.dirichlet(np.full(support_size, rng.choice([0.05, 1.0, 10.0])))
        var = _mixture_variance(alpha, x, support, probs)
        if var > mixture_variance_bound(alpha) + 1e-12:
            report.violations.append(("mixture_variance", {"alpha": alpha, "x": x, "y": y, "var": var}))
    report.cases["mixture_variance"] = report.cases.get("mixture_variance", 0) + cases
    return report


def root_exp_tail_sums(alpha: float, horizon: int) -> np.ndarray:
    """``S[t0] = sum_{t=t0+1}^{horizon} exp(-alpha sqrt t) / sqrt t`` for t0 = 0..horizon."""
    t = np.arange(1, horizon + 1, dtype=float)
    terms = np.exp(-alpha * np.sqrt(t)) / np.sqrt(t)
    tail = np.concatenate((np.cumsum(terms[::-1])[::-1], [0.0]))
    return tail


def tail_sum_bound(alpha: float, t0) -> np.ndarray:
    return 2 / alpha * np.exp(-alpha * np.sqrt(np.asarray(t0, dtype=float)))


def check_tail_sum(rng: np.random.Generator, cases: int = 10_000, report: LemmaReport | None = None,
                   horizon: int = 10**6, n_alpha: int = 100) -> LemmaReport:
    report = report or LemmaReport()
    per_alpha = cases // n_alpha
    alphas = np.exp(rng.uniform(np.log(0.01), np.log(20.0), n_alpha))
    alphas[0] = 1.0
    for a in alphas:
        tail = root_exp_tail_sums(float(a), horizon)
        t0 = np.floor(np.exp(rng.uniform(0, np.log(horizon), per_alpha))).astype(np.int64)
        t0[0] = 1
        lhs, rhs = tail[t0], tail_sum_bound(float(a), t0)
        bad = np.nonzero(lhs > rhs * (1 + 1e-12))[0]
        for b in bad:
            report.violations.append(("tail_sum", {"alpha": float(a), "t0": int(t0[b]),
                                                 "sum": float(lhs[b]), "bound": float(rhs[b])}))
    report.cases["tail_sum"] = report.cases.get("tail_sum", 0) + per_alpha * n_alpha
    return report


def xlogx_power_gap(x, p):
    """``x^p / ((1-p) e) + x log x``; non-negative when the inequality holds."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    return x**p / ((1 - p) * math.e) + x * np.log(x)


def check_xlogx_power(cases: int = 10_000, report: LemmaReport | None = None) -> LemmaReport:
    report = report or LemmaReport()
    side = int(round(math.sqrt(cases)))
    xs = np.linspace(0, 1, side + 1)[1:]
    ps = np.linspace(0, 1, side + 2)[1:-1]
    X, P = np.meshgrid(xs, ps, indexing="ij")
    gap = xlogx_power_gap(X, P)
    scale = np.maximum(1.0, X**P / ((1 - P) * math.e))
    bad = np.argwhere(gap < -1e-12 * scale)
    for i, j in bad:
        report.violations.append(("xlogx_power", {"x": float(X[i, j]), "p": float(P[i, j]),
                                              "gap": float(gap[i, j])}))
    report.cases["xlogx_power"] = report.cases.get("xlogx_power", 0) + gap.size
    return report


def check_entropy_split(rng: np.random.Generator, cases: int = 10_000,
                 report: LemmaReport | None = None) -> LemmaReport:
    report = report or LemmaReport()
    for k in range(cases):
        n = int(rng.integers(2, 65))
        n0 = int(rng.integers(1, n + 1))
        eff = rng.choice(n, size=n0, replace=False)
        conc = rng.choice([0.01, 0.1, 1.0, 10.0])
        u = rng.dirichlet(np.full(n, conc))
        if k % 5 == 0:
            # mass concentrated on the effective set
            u = np.zeros(n)
            u[eff] = rng.dirichlet(np.ones(n0))
            u = 0.99 * u + 0.01 * rng.dirichlet(np.ones(n))
        p = float(rng.uniform(0.001, 0.999))
        bound, holds = lemma1_entropy_bound(u, eff, p)
        if not holds:
            report.violations.append(("entropy_split", {"n": n, "effective": sorted(eff.tolist()),
                                                 "p": p, "H": entropy(u), "bound": bound}))
    report.cases["entropy_split"] = report.cases.get("entropy_split", 0) + cases
    return report


def lemma_checks(seed: int = 0, cases: int = 10_000) -> LemmaReport:
    """Run the randomized / gridded suites for the auxiliary inequalities."""
    rng = np.random.default_rng(seed)
    report = LemmaReport()
    check_mixture_variance(rng, cases, report)
    check_tail_sum(rng, cases, report)
    check_xlogx_power(cases, report)
    check_entropy_split(rng, cases, report)
    return report
