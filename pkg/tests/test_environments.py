import numpy as np
import pytest

from metacare.environments import (
    LossStream,
    MechanismError,
    MechanismSpec,
    MissingRow,
    OutOfRangeLoss,
    ParseError,
    alternating_losses,
    file_losses,
    losses_at,
    stochastic_gap_losses,
    switching_losses,
)


def alt(n, n0, **kw):
    return MechanismSpec("alternating", n, n0, **kw)


def test_alternating_first_expert_loses_t_mod_2():
    spec = alt(4, 2)
    assert alternating_losses(spec, 1).tolist() == [1, 0, 1, 1]
    assert alternating_losses(spec, 2).tolist() == [0, 1, 1, 1]


def test_alternating_first_half_convention():
    spec = alt(6, 4, odd_zero_half=0)
    assert alternating_losses(spec, 3).tolist() == [0, 0, 1, 1, 1, 1]
    assert alternating_losses(spec, 4).tolist() == [1, 1, 0, 0, 1, 1]


@pytest.mark.parametrize("half", [0, 1])
def test_alternating_window_accounting(half):
    spec = alt(10, 4, odd_zero_half=half)
    L = np.zeros(10)
    for t in range(1, 201):
        L += alternating_losses(spec, t)
        if t % 2 == 0:
            assert L[:4].tolist() == [t / 2] * 4
            assert L[4:].tolist() == [t] * 6
            assert L.min() == t / 2


def test_switching_examples():
    spec = MechanismSpec("switching", 3, 2, switch_time=4)
    assert switching_losses(spec, 3).tolist() == [0, 1, 1]
    assert switching_losses(spec, 5).tolist() == [0, 1, 1]
    assert switching_losses(spec, 6).tolist() == [0, 1, 1]
    assert switching_losses(spec, 4).tolist() == [1, 0, 1]


def test_switching_cumulative_loss_after_switch():
    t1 = 10
    spec = MechanismSpec("switching", 5, 2, switch_time=t1)
    L = sum(switching_losses(spec, t) for t in range(1, 31))
    # expert 0 stops accumulating at t1/2 losses, expert 1 keeps losing after the switch
    assert L[0] == t1 / 2
    assert L[1] == t1 / 2 + (30 - t1)


@pytest.mark.parametrize("kw", [
    dict(kind="alternating", n_experts=4, n_effective=3),
    dict(kind="alternating", n_experts=4, n_effective=1),
    dict(kind="alternating", n_experts=4, n_effective=6),
    dict(kind="switching", n_experts=4, n_effective=2, switch_time=3),
    dict(kind="switching", n_experts=4, n_effective=2),
    dict(kind="stochastic", n_experts=1),
    dict(kind="bogus", n_experts=3),
    dict(kind="file", n_experts=3),
])
def test_spec_validation(kw):
    with pytest.raises(MechanismError):
        MechanismSpec(**kw)


def test_stochastic_shape():
    spec = MechanismSpec("stochastic", 3, 1, seed=5)
    for t in range(1, 50):
        row = stochastic_gap_losses(spec, t)
        assert row[0] in (0.0, 1.0) and row[1:].tolist() == [1.0, 1.0]


def test_stochastic_mean():
    spec = MechanismSpec("stochastic", 2, 2, seed=11)
    stream = LossStream(spec)
    rows = np.array([next(stream) for _ in range(10**5)])
    assert np.all(np.abs(rows.mean(axis=0) - 0.5) <= 0.01)


def test_stochastic_ineffective_exact():
    spec = MechanismSpec("stochastic", 6, 2, seed=2)
    stream = LossStream(spec)
    rows = np.array([next(stream) for _ in range(10**4)])
    assert np.all(rows[:, 2:] == 1.0)


def test_stochastic_determinism_and_random_access():
    spec = MechanismSpec("stochastic", 5, 3, seed=123)
    a, b = LossStream(spec), LossStream(spec)
    seq_a = [next(a).copy() for _ in range(5000)]
    seq_b = [next(b).copy() for _ in range(5000)]
    assert all(np.array_equal(x, y) for x, y in zip(seq_a, seq_b))
    # the chunked stream and single-round access agree, across a chunk boundary too
    for t in (1, 2, 4096, 4097, 5000):
        assert np.array_equal(seq_a[t - 1], losses_at(spec, t))
    other = LossStream(spec, seed=124)
    assert not all(np.array_equal(next(other), x) for x in seq_a[:64])


def test_deterministic_stream_matches_pure_function():
    for spec in (alt(8, 4), MechanismSpec("switching", 5, 2, switch_time=6)):
        stream = LossStream(spec)
        for t in range(1, 40):
            assert np.array_equal(next(stream), losses_at(spec, t))


def test_file_stream(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("0.5,1\n0,1\n")
    spec = MechanismSpec("file", 2, path=str(p))
    assert file_losses(spec, 1).tolist() == [0.5, 1.0]
    assert list(map(float, next(iter(LossStream(spec))))) == [0.5, 1.0]
    with pytest.raises(MissingRow):
        file_losses(spec, 3)


def test_file_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("0.5,1.7\n")
    with pytest.raises(OutOfRangeLoss):
        file_losses(MechanismSpec("file", 2, path=str(p)), 1)
    q = tmp_path / "wide.csv"
    q.write_text("0,0,0\n")
    with pytest.raises(ParseError):
        file_losses(MechanismSpec("file", 2, path=str(q)), 1)
    r = tmp_path / "text.csv"
    r.write_text("a,b\n")
    with pytest.raises(ParseError):
        file_losses(MechanismSpec("file", 2, path=str(r)), 1)


def test_losses_in_unit_interval():
    specs = [alt(6, 2), MechanismSpec("switching", 4, 4, switch_time=2),
             MechanismSpec("stochastic", 4, 2, seed=9)]
    for spec in specs:
        for t in range(1, 30):
            row = losses_at(spec, t)
            assert np.all((row >= 0) & (row <= 1))
