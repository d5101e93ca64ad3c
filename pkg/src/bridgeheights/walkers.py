"""Dyck paths and 2-watermelons with a wall: exact counts and uniform sampling.

Conventions
-----------
* One walker: simple walk of ``2n`` steps from 0 to 0 that never goes below 0
  (a Dyck path). Its height is the largest site visited.
* Two walkers: walker ``i`` starts and ends at ``2(i-1)``, both take a +-1
  step at every time, ``0 <= x1(t) < x2(t)`` throughout. The height is the
  maximum of ``x2``.

Counts are Python integers throughout; floats only appear once ratios are
taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CapacityError, DomainError

__all__ = [
    "WalkEnsembleConfig",
    "HeightHistogram",
    "ScalingReport",
    "N_MAX_EXACT",
    "enumerate_heights",
    "sample_heights",
    "scaling_report",
    "capped_counts",
    "capped_counts_closed_form",
    "wall_path_counts",
    "lgv_total",
]

N_MAX_EXACT = {1: 2000, 2: 120}
# Largest n for which the path sampler keeps its suffix-count tables in memory.
N_MAX_PATH = {1: 2000, 2: 120}
_BLOCK = 1 << 16
_START = {1: (0,), 2: (0, 2)}


@dataclass(frozen=True)
class WalkEnsembleConfig:
    """What to count or sample.

    ``engine`` only matters in sample mode: ``path`` walks configurations
    step by step, ``marginal`` draws heights from the exact height law,
    ``auto`` picks ``path`` whenever its tables fit.
    """

    n_walkers: int
    half_length: int
    mode: str = "exact"
    samples: int = 1
    seed: int = 0
    engine: str = "auto"

    def __post_init__(self):
        if self.n_walkers not in (1, 2):
            raise DomainError("n_walkers must be 1 or 2", n_walkers=self.n_walkers)
        if self.half_length < 1:
            raise DomainError("half_length must be >= 1", half_length=self.half_length)
        if self.mode not in ("exact", "sample"):
            raise DomainError("mode must be 'exact' or 'sample'", mode=self.mode)
        if self.samples < 1:
            raise DomainError("samples must be >= 1", samples=self.samples)
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer", seed=self.seed)
        if self.engine not in ("auto", "path", "marginal"):
            raise DomainError("unknown engine", engine=self.engine)
        if self.mode == "exact" and self.half_length > N_MAX_EXACT[self.n_walkers]:
            raise CapacityError(
                "exact enumeration bound exceeded",
                n=self.half_length,
                n_max=N_MAX_EXACT[self.n_walkers],
            )


@dataclass
class HeightHistogram:
    counts: dict
    total: int
    n_walkers: int
    half_length: int
    exact: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if sum(self.counts.values()) != self.total:
            raise ValueError("histogram counts do not add up to total")

    def probabilities(self):
        """Sorted heights and their probabilities as floats."""
        hs = sorted(self.counts)
        return np.array(hs, dtype=float), np.array([self.counts[h] / self.total for h in hs])

    def moment(self, s, scale=1.0):
        """``<(h / scale)^s>``."""
        hs, p = self.probabilities()
        return math.fsum(p * (hs / scale) ** s)

    def mean(self):
        """Exact rational mean for exact histograms, float otherwise."""
        num = sum(h * c for h, c in self.counts.items())
        return Fraction(num, self.total) if self.exact else num / self.total

    def scaled_moment(self, s):
        """``<(h / sqrt(2n))^s>``."""
        return self.moment(s, math.sqrt(2.0 * self.half_length))

    def standard_error(self, s, scale=None):
        """Standard error of the sample mean of ``(h / scale)^s``."""
        scale = math.sqrt(2.0 * self.half_length) if scale is None else scale
        m1 = self.moment(s, scale)
        m2 = self.moment(2 * s, scale)
        return math.sqrt(max(m2 - m1 * m1, 0.0) / self.total)


@dataclass(frozen=True)
class ScalingReport:
    n: int
    s: float
    scaled_moment: float
    continuum_target: float
    deviation: float
    std_error: float = 0.0


# ---------------------------------------------------------------------------
# Exact dynamic programming


def _dp_one(n, cap):
    # In-place parity sweep; index i <-> site i-1, with zero pads at -1 and cap+1.
    w = np.zeros(cap + 3, dtype=object)
    w[1] = 1
    m = 2 * n
    for t in range(1, m + 1):
        p = t & 1
        lim = min(cap, t, m - t)
        if lim < p:
            # Only possible at t = m with p = 0 handled below; keep the loop simple.
            pass
        w[1 + p : lim + 2 : 2] = w[p : lim + 1 : 2] + w[p + 2 : lim + 3 : 2]
    return int(w[1])


def _dp_two(n, cap):
    if cap < 2:
        return 0
    size = cap + 3
    w = np.zeros((size, size), dtype=object)
    w[1, 3] = 1
    m = 2 * n
    for t in range(1, m + 1):
        p = t & 1
        lim = min(cap, t + 2, m + 2 - t)
        dst = slice(1 + p, lim + 2, 2)
        lo = slice(p, lim + 1, 2)
        hi = slice(p + 2, lim + 3, 2)
        block = w[lo, lo] + w[lo, hi] + w[hi, lo] + w[hi, hi]
        # Strict ordering x1 < x2: drop the diagonal and everything below it.
        block[np.tril_indices(block.shape[0])] = 0
        w[dst, dst] = block
    return int(w[1, 3])


def capped_counts(n, n_walkers, caps=None):
    """Number of configurations of half-length ``n`` whose height is ``<= cap``.

    Computed by dynamic programming over positions with a ceiling, one
    sweep per cap.
    """
    top = n if n_walkers == 1 else n + 2
    caps = range(0, top + 1) if caps is None else caps
    dp = _dp_one if n_walkers == 1 else _dp_two
    return {h: (dp(n, h) if h >= 1 else 0) for h in caps}


def _histogram_from_caps(caps, n, n_walkers, **meta):
    hs = sorted(caps)
    counts = {}
    prev = 0
    for h in hs:
        c = caps[h] - prev
        if c:
            counts[h] = c
        prev = caps[h]
    return HeightHistogram(counts, caps[hs[-1]], n_walkers, n, True, dict(meta))


def enumerate_heights(config):
    """Exact height histogram by capped dynamic programming."""
    if config.mode != "exact":
        raise DomainError("enumerate_heights needs mode='exact'", mode=config.mode)
    n = config.half_length
    caps = capped_counts(n, config.n_walkers)
    return _histogram_from_caps(caps, n, config.n_walkers, method="dp")


def wall_path_counts(m, start, cap=None):
    """Counts of ``m``-step walks from ``start`` that stay in ``[0, cap]``, by end site.

    Returns a list indexed by end position.
    """
    top = start + m if cap is None else cap
    w = np.zeros(top + 3, dtype=object)
    w[start + 1] = 1
    for _ in range(m):
        nxt = np.zeros_like(w)
        nxt[1 : top + 2] = w[0 : top + 1] + w[2 : top + 3]
        w = nxt
    return [int(v) for v in w[1 : top + 2]]


def lgv_total(n):
    """2-watermelon total as the 2x2 Lindstrom-Gessel-Viennot determinant."""
    m = 2 * n
    a = wall_path_counts(m, 0)
    b = wall_path_counts(m, 2)
    return a[0] * b[2] - a[2] * b[0]


# ---------------------------------------------------------------------------
# Closed-form counts (reflection principle), used by the marginal sampler


def _binomial_row(m):
    row = [1] * (m + 1)
    for j in range(m):
        row[j + 1] = row[j] * (m - j) // (j + 1)
    return row


def _strip_count(row, m, x, y, cap):
    # Walks x -> y in m steps confined to [0, cap]: images under the reflections at -1 and cap+1.
    period = cap + 2
    direct = (m + y - x) // 2
    mirror = (m + y + x) // 2 + 1
    total = 0
    k_lo = -(m // period) - 2
    k_hi = m // period + 3
    for k in range(k_lo, k_hi):
        a = direct + k * period
        b = mirror + k * period
        if 0 <= a <= m:
            total += row[a]
        if 0 <= b <= m:
            total -= row[b]
    return total


def capped_counts_closed_form(n, n_walkers, caps=None):
    """Same numbers as :func:`capped_counts`, from reflection-principle binomial sums."""
    m = 2 * n
    row = _binomial_row(m)
    top = n if n_walkers == 1 else n + 2
    caps = range(0, top + 1) if caps is None else caps
    out = {}
    for h in caps:
        if n_walkers == 1:
            out[h] = _strip_count(row, m, 0, 0, h) if h >= 0 else 0
        elif h < 2:
            out[h] = 0
        else:
            out[h] = _strip_count(row, m, 0, 0, h) * _strip_count(row, m, 2, 2, h) - _strip_count(
                row, m, 0, 2, h
            ) * _strip_count(row, m, 2, 0, h)
    return out


# ---------------------------------------------------------------------------
# Sampling


def _block_uniforms(seed, block, shape):
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.PCG64(ss)).random(shape)


def _suffix_tables(n, n_walkers):
    """Per-time completion counts, each slice scaled by its own maximum."""
    m = 2 * n
    size = n + 5
    shape = (size,) if n_walkers == 1 else (size, size)
    cur = np.zeros(shape, dtype=object)
    cur[_START[n_walkers]] = 1
    tables = [None] * (m + 1)
    for t in range(m, -1, -1):
        biggest = max(cur.flat)
        tables[t] = np.array([c / biggest for c in cur.flat], dtype=float).reshape(shape)
        if t == 0:
            break
        prev = np.zeros(shape, dtype=object)
        if n_walkers == 1:
            prev[1:] += cur[:-1]
            prev[:-1] += cur[1:]
        else:
            for d1 in (1, -1):
                for d2 in (1, -1):
                    prev[max(0, -d1) : size - max(0, d1), max(0, -d2) : size - max(0, d2)] += cur[
                        max(0, d1) : size - max(0, -d1), max(0, d2) : size - max(0, -d2)
                    ]
            prev[np.tril_indices(size)] = 0
        cur = prev
    return tables


_MOVES_2 = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1)])


def _sample_paths(config, record_time=None):
    n = config.half_length
    m = 2 * n
    nw = config.n_walkers
    tables = _suffix_tables(n, nw)
    heights = np.empty(config.samples, dtype=np.int64)
    recorded = [] if record_time is not None else None
    for b, start in enumerate(range(0, config.samples, _BLOCK)):
        k = min(_BLOCK, config.samples - start)
        u = _block_uniforms(config.seed, b, (m, k))
        if nw == 1:
            x = np.zeros(k, dtype=np.int64)
            top = x.copy()
            for t in range(m):
                nxt = tables[t + 1]
                up = nxt[x + 1]
                down = np.where(x > 0, nxt[np.maximum(x - 1, 0)], 0.0)
                x = np.where(u[t] * (up + down) < up, x + 1, x - 1)
                np.maximum(top, x, out=top)
                if t + 1 == record_time:
                    recorded.append(x.copy())
        else:
            x1 = np.zeros(k, dtype=np.int64)
            x2 = np.full(k, 2, dtype=np.int64)
            top = x2.copy()
            for t in range(m):
                nxt = tables[t + 1]
                c1 = x1[:, None] + _MOVES_2[:, 0]
                c2 = x2[:, None] + _MOVES_2[:, 1]
                ok = (c1 >= 0) & (c1 < c2)
                wgt = np.where(ok, nxt[np.maximum(c1, 0), c2], 0.0)
                cum = np.cumsum(wgt, axis=1)
                pick = (u[t][:, None] * cum[:, -1:] >= cum).sum(axis=1)
                pick = np.minimum(pick, 3)
                x1 = c1[np.arange(k), pick]
                x2 = c2[np.arange(k), pick]
                np.maximum(top, x2, out=top)
                if t + 1 == record_time:
                    recorded.append(np.stack([x1, x2], axis=1))
        heights[start : start + k] = top
    if record_time is not None:
        return heights, np.concatenate(recorded)
    return heights


def _sample_marginal(config):
    n = config.half_length
    caps = capped_counts_closed_form(n, config.n_walkers)
    hs = np.array(sorted(caps), dtype=np.int64)
    total = caps[int(hs[-1])]
    cdf = np.array([caps[int(h)] / total for h in hs])
    heights = np.empty(config.samples, dtype=np.int64)
    for b, start in enumerate(range(0, config.samples, _BLOCK)):
        k = min(_BLOCK, config.samples - start)
        u = _block_uniforms(config.seed, b, (k,))
        heights[start : start + k] = hs[np.searchsorted(cdf, u, side="right")]
    return heights


def _engine(config):
    if config.engine != "auto":
        return config.engine
    return "path" if config.half_length <= N_MAX_PATH[config.n_walkers] else "marginal"


def sample_heights(config):
    """Heights of ``config.samples`` uniformly random configurations.

    Deterministic for fixed ``(seed, samples)``: sample ``i`` always uses the
    random stream of block ``i // 65536``.
    """
    if config.mode != "sample":
        raise DomainError("sample_heights needs mode='sample'", mode=config.mode)
    engine = _engine(config)
    if engine == "path":
        if config.half_length > N_MAX_PATH[config.n_walkers]:
            raise CapacityError(
                "path sampler tables would not fit",
                n=config.half_length,
                n_max=N_MAX_PATH[config.n_walkers],
            )
        heights = _sample_paths(config)
    else:
        heights = _sample_marginal(config)
    vals, cnt = np.unique(heights, return_counts=True)
    counts = {int(h): int(c) for h, c in zip(vals, cnt)}
    return HeightHistogram(
        counts, config.samples, config.n_walkers, config.half_length, False, {"engine": engine}
    )


# ---------------------------------------------------------------------------
# Diffusion scaling


def scaling_report(n_list, s_list, n_walkers=1, mode="exact", samples=10**5, seed=0):
    """Scaled moments ``<(h / sqrt(2n))^s>`` against the continuum moments."""
    from .moments import moment_h1, moment_h2_theta

    target_fn = moment_h1 if n_walkers == 1 else moment_h2_theta
    targets = {s: target_fn(s).value for s in s_list}
    reports = []
    for n in n_list:
        cfg = WalkEnsembleConfig(n_walkers, int(n), mode, samples, seed)
        hist = enumerate_heights(cfg) if mode == "exact" else sample_heights(cfg)
        for s in s_list:
            val = hist.scaled_moment(s)
            se = 0.0 if mode == "exact" else hist.standard_error(s)
            reports.append(ScalingReport(int(n), float(s), val, targets[s], abs(val - targets[s]), se))
    return reports
