import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from bridgeheights.errors import CapacityError, DomainError
from bridgeheights.walkers import (
    HeightHistogram,
    WalkEnsembleConfig,
    _sample_paths,
    capped_counts,
    capped_counts_closed_form,
    enumerate_heights,
    lgv_total,
    sample_heights,
    scaling_report,
    wall_path_counts,
)


def brute_force(n, n_walkers):
    """Exhaustive generation of every step sequence; independent of the DP."""
    starts = (0,) if n_walkers == 1 else (0, 2)
    m = 2 * n
    counts = {}
    for steps in itertools.product((1, -1), repeat=m * n_walkers):
        pos = list(starts)
        top = pos[-1]
        ok = True
        for t in range(m):
            for i in range(n_walkers):
                pos[i] += steps[t * n_walkers + i]
            if pos[0] < 0 or (n_walkers == 2 and pos[0] >= pos[1]):
                ok = False
                break
            top = max(top, pos[-1])
        if ok and tuple(pos) == starts:
            counts[top] = counts.get(top, 0) + 1
    return counts


def catalan(n):
    c = [1]
    for k in range(n):
        c.append(sum(c[i] * c[k - i] for i in range(k + 1)))
    return c[n]


def test_single_path():
    h = enumerate_heights(WalkEnsembleConfig(1, 1))
    assert h.counts == {1: 1} and h.total == 1


def test_two_dyck_paths():
    h = enumerate_heights(WalkEnsembleConfig(1, 2))
    assert h.counts == {1: 1, 2: 1}
    assert h.mean() == Fraction(3, 2)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("n_walkers", [1, 2])
def test_matches_exhaustive_generation(n, n_walkers):
    if n_walkers == 2 and n == 4:
        pytest.skip("4^16 sequences")
    assert enumerate_heights(WalkEnsembleConfig(n_walkers, n)).counts == brute_force(n, n_walkers)


def test_two_walkers_n2_pinned():
    h = enumerate_heights(WalkEnsembleConfig(2, 2))
    assert h.counts == {3: 1, 4: 2}
    assert h.mean() == Fraction(11, 3)


@pytest.mark.parametrize("n", range(1, 21))
def test_totals(n):
    assert enumerate_heights(WalkEnsembleConfig(1, n)).total == catalan(n)
    assert enumerate_heights(WalkEnsembleConfig(2, n)).total == lgv_total(n)


def test_lgv_uses_dp_counts():
    a = wall_path_counts(8, 0)
    assert a[0] == catalan(4)


@pytest.mark.parametrize("n_walkers", [1, 2])
def test_cap_monotone_and_closed_form(n_walkers):
    n = 15
    caps = capped_counts(n, n_walkers)
    vals = [caps[h] for h in sorted(caps)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    top = max(caps)
    assert caps[top] == enumerate_heights(WalkEnsembleConfig(n_walkers, n)).total
    assert caps == capped_counts_closed_form(n, n_walkers)


def test_height_bounds():
    for nw, n in ((1, 12), (2, 12)):
        h = enumerate_heights(WalkEnsembleConfig(nw, n))
        top = n if nw == 1 else n + 2
        assert min(h.counts) >= 1 and max(h.counts) == top


def test_counts_exceed_64_bits():
    assert enumerate_heights(WalkEnsembleConfig(2, 40)).total > 2**64


def test_capacity_and_config_errors():
    with pytest.raises(CapacityError):
        WalkEnsembleConfig(2, 121)
    WalkEnsembleConfig(2, 121, mode="sample")
    with pytest.raises(DomainError):
        WalkEnsembleConfig(3, 5)
    with pytest.raises(DomainError):
        WalkEnsembleConfig(1, 0)
    with pytest.raises(DomainError):
        WalkEnsembleConfig(1, 5, seed=-1)
    with pytest.raises(DomainError):
        enumerate_heights(WalkEnsembleConfig(1, 5, mode="sample"))


def test_histogram_invariant():
    with pytest.raises(ValueError):
        HeightHistogram({1: 2}, 3, 1, 2)


def test_zeroth_scaled_moment_is_one():
    for r in scaling_report([5, 10, 30], [0.0], n_walkers=2):
        assert r.scaled_moment == 1.0


def test_sample_n2_band():
    h = sample_heights(WalkEnsembleConfig(1, 2, "sample", 10**5, 11))
    p = h.counts.get(2, 0) / h.total
    assert abs(p - 0.5) <= 5.0 * math.sqrt(0.25 / h.total)


@pytest.mark.parametrize("engine", ["path", "marginal"])
def test_sampling_deterministic(engine):
    cfg = WalkEnsembleConfig(2, 12, "sample", 70000, 5, engine)
    assert sample_heights(cfg).counts == sample_heights(cfg).counts
    other = WalkEnsembleConfig(2, 12, "sample", 70000, 6, engine)
    assert sample_heights(cfg).counts != sample_heights(other).counts


def test_sampling_prefix_stable():
    # Sample i depends only on (seed, i): a longer run extends a shorter one.
    a = sample_heights(WalkEnsembleConfig(1, 8, "sample", 65536, 3))
    b = sample_heights(WalkEnsembleConfig(1, 8, "sample", 2 * 65536, 3))
    assert all(b.counts.get(k, 0) >= v for k, v in a.counts.items())


@pytest.mark.parametrize("n_walkers", [1, 2])
def test_sample_mean_vs_exact(n_walkers):
    n = 30
    exact = float(enumerate_heights(WalkEnsembleConfig(n_walkers, n)).mean())
    h = sample_heights(WalkEnsembleConfig(n_walkers, n, "sample", 10**6, 2))
    se = h.standard_error(1, scale=1.0)
    assert abs(h.moment(1) - exact) <= 5.0 * se


def _chisquare(observed, expected):
    order = np.argsort(expected)
    obs, exp = np.asarray(observed, float)[order], np.asarray(expected, float)[order]
    # Pool small-expectation cells from the low end.
    po, pe, acc_o, acc_e = [], [], 0.0, 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            po.append(acc_o)
            pe.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0:
        po[-1] += acc_o
        pe[-1] += acc_e
    return stats.chisquare(po, pe).pvalue


@pytest.mark.parametrize("n_walkers", [1, 2])
@pytest.mark.parametrize("engine", ["path", "marginal"])
def test_sampled_heights_chisquare(n_walkers, engine):
    n, samples = 10, 10**5
    exact = enumerate_heights(WalkEnsembleConfig(n_walkers, n))
    got = sample_heights(WalkEnsembleConfig(n_walkers, n, "sample", samples, 123, engine))
    hs = sorted(exact.counts)
    expected = [samples * exact.counts[h] / exact.total for h in hs]
    observed = [got.counts.get(h, 0) for h in hs]
    assert _chisquare(observed, expected) > 1e-3


def _prefix_counts(n_walkers, t):
    # Forward DP from the start state, by brute force over step choices.
    starts = (0,) if n_walkers == 1 else (0, 2)
    states = {starts: 1}
    moves = [(1,), (-1,)] if n_walkers == 1 else list(itertools.product((1, -1), repeat=2))
    for _ in range(t):
        nxt = {}
        for s, c in states.items():
            for mv in moves:
                ns = tuple(a + b for a, b in zip(s, mv))
                if ns[0] < 0 or (n_walkers == 2 and ns[0] >= ns[1]):
                    continue
                nxt[ns] = nxt.get(ns, 0) + c
        states = nxt
    return states


@pytest.mark.parametrize("n_walkers", [1, 2])
@pytest.mark.parametrize("t", [2, 10])
def test_sampled_joint_state_chisquare(n_walkers, t):
    # Joint position at time t: P(state) = prefix(state) * suffix(state) / total.
    n, samples = 10, 10**5
    pre = _prefix_counts(n_walkers, t)
    post = _prefix_counts(n_walkers, 2 * n - t)  # paths are reversible
    weights = {s: c * post.get(s, 0) for s, c in pre.items() if post.get(s, 0)}
    total = sum(weights.values())
    cfg = WalkEnsembleConfig(n_walkers, n, "sample", samples, 99, "path")
    _, states = _sample_paths(cfg, record_time=t)
    if states.ndim == 1:
        keys = [(int(x),) for x in states]
    else:
        keys = [tuple(int(v) for v in row) for row in states]
    seen = {}
    for k in keys:
        seen[k] = seen.get(k, 0) + 1
    assert set(seen) <= set(weights)
    support = sorted(weights)
    expected = [samples * weights[s] / total for s in support]
    observed = [seen.get(s, 0) for s in support]
    assert _chisquare(observed, expected) > 1e-3


def test_exact_scaling_approaches_limit():
    reps = scaling_report([50, 100, 200, 400], [1.0], n_walkers=1)
    devs = [r.deviation for r in reps]
    assert all(b < a for a, b in zip(devs, devs[1:]))
    for r in reps:
        assert r.deviation == abs(r.scaled_moment - r.continuum_target)


def test_mean_height_offset_shrinks():
    gaps = []
    for n in (50, 100, 200, 400):
        m = float(enumerate_heights(WalkEnsembleConfig(1, n)).mean())
        gaps.append(abs(m - (math.sqrt(math.pi * n) - 1.5)))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


@pytest.mark.parametrize("s", [1.0, 2.0])
def test_sampled_scaling_improves(s):
    small, large = scaling_report([100, 1600], [s], n_walkers=2, mode="sample", samples=200000, seed=4)
    assert large.deviation + 3.0 * large.std_error < small.deviation - 3.0 * small.std_error
