import math

import numpy as np
import pytest

from metacare.environments import MechanismSpec, MissingRow
from metacare.harness import (
    CURVE_HEADER,
    SchemaMismatch,
    curves_to_csv,
    expected_regret,
    expected_regret_many,
    geometric_checkpoints,
    read_curves,
    replication_seed,
    run_game,
    run_games,
    write_curves,
)
from metacare.learners import HedgeConfig, LearnerSpec, hedge_weights
from metacare.simplex import softmax

ALL = [LearnerSpec("dhedge"), LearnerSpec("ftrl-care"), LearnerSpec("meta-care")]


def test_geometric_grid():
    cps = geometric_checkpoints(100)
    assert cps.tolist() == sorted({int(math.floor(10 ** (k / 8) + 1e-9)) for k in range(17)})
    assert cps.tolist()[:6] == [1, 2, 3, 4, 5, 7]
    assert geometric_checkpoints(150)[-1] == 150
    assert np.all(np.diff(geometric_checkpoints(10**5)) > 0)


def test_replication_seed_stable():
    assert replication_seed(0, 0) == replication_seed(0, 0)
    assert len({replication_seed(0, r) for r in range(100)}) == 100
    assert replication_seed(1, 0) != replication_seed(0, 1)
    assert int(np.random.SeedSequence([7, 3]).generate_state(1, np.uint64)[0]) == replication_seed(7, 3)


def test_two_round_hedge_by_hand():
    g = 1.3
    tr = run_game(LearnerSpec("dhedge", g=g), MechanismSpec("alternating", 2, 2), 2, full=True)
    w2 = softmax([1.0, 0.0], g / math.sqrt(2))
    assert tr.inst_loss[0] == 0.5
    assert tr.inst_loss[1] == pytest.approx(w2[1], abs=1e-15)
    assert tr.regret[-1] == pytest.approx(0.5 + w2[1] - 1, abs=1e-15)


def test_zero_losses_zero_regret(tmp_path):
    p = tmp_path / "z.csv"
    p.write_text("0,0,0\n" * 25)
    for tr in run_games(ALL, MechanismSpec("file", 3, path=str(p)), 25, full=True):
        assert np.all(tr.regret == 0)


def test_trace_resummation(tmp_path):
    rng = np.random.default_rng(0)
    T, n = 60, 4
    rows = rng.uniform(0, 1, (T, n))
    rows[:, 0] = 0.0
    p = tmp_path / "r.csv"
    p.write_text("\n".join(",".join(repr(float(v)) for v in r) for r in rows) + "\n")
    spec = LearnerSpec("dhedge", g=0.9)
    tr = run_game(spec, MechanismSpec("file", n, path=str(p)), T, full=True)
    L = np.zeros(n)
    total = 0.0
    for t in range(1, T + 1):
        w = hedge_weights(L, t, HedgeConfig(0.9))
        total += float(rows[t - 1] @ w)
        L += rows[t - 1]
    assert tr.regret[-1] == pytest.approx(total, abs=1e-12)
    assert tr.best_loss[-1] == 0.0


def test_file_too_short(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("0,1\n")
    with pytest.raises(MissingRow):
        run_game(ALL[0], MechanismSpec("file", 2, path=str(p)), 2)


def test_trace_invariants():
    mech = MechanismSpec("stochastic", 8, 2, seed=3)
    for tr in run_games(ALL, mech, 300, full=True):
        assert np.all(np.isfinite(tr.regret))
        assert np.all(np.abs(np.diff(tr.regret)) <= 2)
        assert np.all(np.diff(tr.learner_loss) >= 0)
        assert np.allclose(tr.regret, tr.learner_loss - tr.best_loss)


def test_alternating_best_loss():
    tr = run_game(ALL[1], MechanismSpec("alternating", 6, 2), 100, full=True)
    even = tr.t % 2 == 0
    assert np.array_equal(tr.best_loss[even], tr.t[even] / 2)


def test_joint_play_equals_single_play():
    mech = MechanismSpec("stochastic", 16, 1, seed=77)
    joint = run_games(ALL, mech, 500)
    for spec, tr in zip(ALL, joint):
        single = run_game(spec, mech, 500)
        assert np.array_equal(single.regret, tr.regret)


def test_meta_component_losses():
    mech = MechanismSpec("alternating", 4, 2)
    h, c, m = run_games(ALL, mech, 200, full=True)
    comp = m.component_regret()
    assert np.allclose(comp["dhedge"], h.regret, atol=1e-9)
    assert np.allclose(comp["ftrl-care"], c.regret, atol=1e-9)


def test_deterministic_collapses_replications():
    curve = expected_regret(ALL[0], MechanismSpec("alternating", 4, 2), [10, 100], replications=10)
    assert curve.replications == 1
    assert np.all(curve.stderr == 0)
    tr = run_game(ALL[0], MechanismSpec("alternating", 4, 2), 100, checkpoints=[10, 100])
    assert np.array_equal(curve.mean, tr.regret)


def test_single_replication_equals_run_game():
    mech = MechanismSpec("stochastic", 4, 1)
    curve = expected_regret(ALL[1], mech, [5, 50, 200], replications=1, base_seed=9)
    tr = run_game(ALL[1], mech, 200, seed=replication_seed(9, 0), checkpoints=[5, 50, 200])
    assert np.array_equal(curve.mean, tr.regret)


def test_stderr_scaling():
    mech = MechanismSpec("stochastic", 2, 1)
    spec = [ALL[0]]
    a = expected_regret_many(spec, mech, [10**4], 50, base_seed=1)[0]
    b = expected_regret_many(spec, mech, [10**4], 200, base_seed=2)[0]
    ratio = a.stderr[-1] / b.stderr[-1]
    assert 2 * 0.7 <= ratio <= 2 * 1.3


def test_parallel_equals_serial():
    mech = MechanismSpec("stochastic", 8, 1)
    cps = [10, 100, 300]
    s = expected_regret_many(ALL, mech, cps, 6, base_seed=4, n_jobs=1)
    p = expected_regret_many(ALL, mech, cps, 6, base_seed=4, n_jobs=3)
    for a, b in zip(s, p):
        assert np.array_equal(a.mean, b.mean) and np.array_equal(a.stderr, b.stderr)


def test_csv_round_trip(tmp_path):
    mech = MechanismSpec("stochastic", 8, 1)
    curves = expected_regret_many(ALL, mech, [1, 10, 100], 3, base_seed=5)
    path = tmp_path / "c.csv"
    write_curves(curves, path)
    assert path.read_text().splitlines()[0] == ",".join(CURVE_HEADER)
    back = read_curves(path)
    assert len(back) == 3
    for a, b in zip(curves, back):
        assert (a.learner, a.mechanism, a.n_experts, a.n_effective, a.seed, a.replications) == (
            b.learner, b.mechanism, b.n_experts, b.n_effective, b.seed, b.replications)
        assert np.array_equal(a.checkpoints, b.checkpoints)
        assert np.array_equal(a.mean, b.mean) and np.array_equal(a.stderr, b.stderr)
    assert curves_to_csv(back) == path.read_text()


def test_read_rejects_other_schema(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(SchemaMismatch):
        read_curves(p)
