"""Play the expert-advice game and measure (quasi-)regret.

The recorded learner loss in round ``t`` is the expectation ``<l(t), w(t)>``
of the loss of an expert drawn from the learner's weights, so only the
mechanism contributes randomness.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .environments import LossStream, MechanismSpec, MissingRow, file_row_count
from .learners import LearnerSpec, MetaCare, build_learners, step_all

CURVE_HEADER = ("t", "mean_regret", "stderr", "replications", "learner", "mechanism", "N", "N0", "seed")


def geometric_checkpoints(horizon: int, per_decade: int = 8) -> np.ndarray:
    """``floor(10**(k/per_decade))`` for k = 0, 1, ... up to ``horizon``, plus ``horizon``."""
    pts = set()
    k = 0
    while True:
        v = math.floor(10 ** (k / per_decade) + 1e-9)
        if v > horizon:
            break
        pts.add(v)
        k += 1
    pts.add(horizon)
    return np.array(sorted(pts), dtype=np.int64)


def replication_seed(base_seed: int, r: int) -> int:
    """Seed of replication ``r``: first 64-bit word of ``SeedSequence([base_seed, r])``."""
    ss = np.random.SeedSequence([int(base_seed), int(r)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class RegretTrace:
    """Per-checkpoint record of one game for one learner.

    ``regret[k] = learner_loss[k] - best_loss[k]`` where ``learner_loss`` is
    the running sum of expected per-round losses.
    """

    learner: str
    mechanism: MechanismSpec
    seed: int
    t: np.ndarray
    inst_loss: np.ndarray
    learner_loss: np.ndarray
    best_loss: np.ndarray
    regret: np.ndarray
    # META-CARE only: running meta-losses of its two components
    meta_loss_hedge: np.ndarray | None = None
    meta_loss_care: np.ndarray | None = None

    def component_regret(self) -> dict[str, np.ndarray]:
        if self.meta_loss_hedge is None:
            return {}
        return {
            "dhedge": self.meta_loss_hedge - self.best_loss,
            "ftrl-care": self.meta_loss_care - self.best_loss,
        }


def _check_horizon(mechanism: MechanismSpec, horizon: int) -> None:
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if mechanism.kind == "file" and file_row_count(mechanism.path) < horizon:
        raise MissingRow(f"{mechanism.path} has fewer than {horizon} rows")


def run_games(specs, mechanism: MechanismSpec, horizon: int, seed: int | None = None,
              checkpoints=None, full: bool = False) -> list[RegretTrace]:
    """Play every learner in ``specs`` against one shared loss stream.

    Records are kept at ``checkpoints`` (default: geometric grid) or at every
    round when ``full`` is set.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("no learners given")
    _check_horizon(mechanism, horizon)
    seed = mechanism.seed if seed is None else seed
    n = mechanism.n_experts
    if full:
        cps = np.arange(1, horizon + 1, dtype=np.int64)
    elif checkpoints is None:
        cps = geometric_checkpoints(horizon)
    else:
        cps = np.asarray(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
        if cps.size == 0 or cps[0] < 1 or cps[-1] > horizon:
            raise ValueError("checkpoints must lie in [1, horizon]")

    learners = build_learners(specs, n)
    metas = [i for i, l in enumerate(learners) if isinstance(l, MetaCare)]
    k = len(learners)
    m = cps.size
    inst = np.zeros((k, m))
    cum_rec = np.zeros((k, m))
    best = np.zeros(m)
    meta_h = {i: np.zeros(m) for i in metas}
    meta_c = {i: np.zeros(m) for i in metas}

    stream = LossStream(mechanism, seed)
    L = np.zeros(n)
    cum = [0.0] * k
    nxt, j = int(cps[0]), 0
    for t in range(1, horizon + 1):
        loss = next(stream)
        ws = [lrn.weights() for lrn in learners]
        step = [float(np.dot(loss, w)) for w in ws]
        for i in range(k):
            cum[i] += step[i]
        L += loss
        if t == nxt:
            best[j] = L.min()
            inst[:, j] = step
            cum_rec[:, j] = cum
            for i in metas:
                st = learners[i].state
                # meta state is updated inside step_all below; add this round by hand
                meta_h[i][j] = st.meta_loss_hedge + float(np.dot(loss, learners[i].hedge.weights()))
                meta_c[i][j] = st.meta_loss_care + float(np.dot(loss, learners[i].care.weights()))
            j += 1
            nxt = int(cps[j]) if j < m else -1
        step_all(learners, loss)

    traces = []
    for i, spec in enumerate(specs):
        traces.append(RegretTrace(
            learner=spec.name,
            mechanism=mechanism,
            seed=seed,
            t=cps.copy(),
            inst_loss=inst[i],
            learner_loss=cum_rec[i],
            best_loss=best.copy(),
            regret=cum_rec[i] - best,
            meta_loss_hedge=meta_h.get(i),
            meta_loss_care=meta_c.get(i),
        ))
    return traces


def run_game(spec: LearnerSpec, mechanism: MechanismSpec, horizon: int, seed: int | None = None,
             checkpoints=None, full: bool = False) -> RegretTrace:
    return run_games([spec], mechanism, horizon, seed, checkpoints, full)[0]


@dataclass
class ExpectedRegretCurve:
    learner: str
    mechanism: str
    n_experts: int
    n_effective: int
    seed: int
    checkpoints: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    replications: int
    # replication x checkpoint regret matrix; not serialized
    samples: np.ndarray | None = field(default=None, repr=False)
    component_samples: dict = field(default_factory=dict, repr=False)

    def rows(self):
        for t, mu, se in zip(self.checkpoints, self.mean, self.stderr):
            yield (int(t), float(mu), float(se), self.replications, self.learner,
                   self.mechanism, self.n_experts, self.n_effective, self.seed)


def _replicate(args):
    specs, mechanism, cps, seed = args
    traces = run_games(specs, mechanism, int(cps[-1]), seed=seed, checkpoints=cps)
    return [(tr.regret, tr.component_regret()) for tr in traces]


def expected_regret_many(specs, mechanism: MechanismSpec, checkpoints, replications: int = 1,
                         base_seed: int = 0, n_jobs: int = 1) -> list[ExpectedRegretCurve]:
    """Mean and standard error of the quasi-regret over independent replications.

    Replication ``r`` draws its losses from ``replication_seed(base_seed, r)``.
    Deterministic mechanisms are evaluated once, exactly. Results are reduced
    in replication order, so ``n_jobs`` never changes the output.
    """
    specs = list(specs)
    if replications < 1:
        raise ValueError("need at least one replication")
    cps = np.asarray(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
    if mechanism.deterministic:
        replications = 1
        seeds = [mechanism.seed]
    else:
        seeds = [replication_seed(base_seed, r) for r in range(replications)]
    jobs = [(specs, mechanism, cps, s) for s in seeds]
    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            results = list(ex.map(_replicate, jobs))
    else:
        results = [_replicate(j) for j in jobs]

    curves = []
    for i, spec in enumerate(specs):
        samples = np.vstack([res[i][0] for res in results])
        comps = {}
        for name in results[0][i][1]:
            comps[name] = np.vstack([res[i][1][name] for res in results])
        mean = samples.mean(axis=0)
        if replications > 1:
            se = samples.std(axis=0, ddof=1) / math.sqrt(replications)
        else:
            se = np.zeros_like(mean)
        curves.append(ExpectedRegretCurve(
            learner=spec.name,
            mechanism=mechanism.kind,
            n_experts=mechanism.n_experts,
            n_effective=mechanism.n_effective,
            seed=base_seed if not mechanism.deterministic else mechanism.seed,
            checkpoints=cps,
            mean=mean,
            stderr=se,
            replications=replications,
            samples=samples,
            component_samples=comps,
        ))
    return curves


def expected_regret(spec: LearnerSpec, mechanism: MechanismSpec, checkpoints, replications: int = 1,
                    base_seed: int = 0, n_jobs: int = 1) -> ExpectedRegretCurve:
    return expected_regret_many([spec], mechanism, checkpoints, replications, base_seed, n_jobs)[0]


# -- CSV -------------------------------------------------------------------------


def curves_to_csv(curves) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for c in curves:
        for row in c.rows():
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file in the same directory."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_curves(curves, path) -> None:
    atomic_write(path, curves_to_csv(curves))


class SchemaMismatch(ValueError):
    pass


def read_curves(path) -> list[ExpectedRegretCurve]:
    """Parse a curve CSV back into curves, one per (learner, mechanism, N, N0, seed)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CURVE_HEADER:
            raise SchemaMismatch(f"{path}: expected header {','.join(CURVE_HEADER)}")
        groups: dict[tuple, list] = {}
        for row in reader:
            if not row:
                continue
            if len(row) != len(CURVE_HEADER):
                raise SchemaMismatch(f"{path}: bad row {row}")
            t, mu, se, reps, learner, mech, n, n0, seed = row
            key = (learner, mech, int(n), int(n0), int(seed), int(reps))
            groups.setdefault(key, []).append((int(t), float(mu), float(se)))
    curves = []
    for (learner, mech, n, n0, seed, reps), pts in groups.items():
        arr = list(zip(*pts))
        curves.append(ExpectedRegretCurve(
            learner=learner, mechanism=mech, n_experts=n, n_effective=n0, seed=seed,
            checkpoints=np.array(arr[0], dtype=np.int64), mean=np.array(arr[1]),
            stderr=np.array(arr[2]), replications=reps,
        ))
    return curves
