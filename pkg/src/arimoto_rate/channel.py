"""Simplex and channel primitives.

A channel is a row-stochastic m x n matrix of conditional probabilities
with no all-zero output column and full row rank. All information
quantities are in nats. Divergence-style sums go through math.fsum, which
is exactly rounded and therefore independent of summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidChannel,
    LengthMismatch,
    NegativeEntry,
    RankDeficient,
    RowNotNormalized,
    UselessOutputColumn,
    ZeroOutputMass,
)

SIMPLEX_TOL = 1e-12        # |sum - 1| allowed for a Distribution
ROW_SUM_TOL = 1e-9         # |sum - 1| accepted by validate_channel before rescaling
RANK_PIVOT_TOL = 1e-10     # scaled-pivot threshold for the rank test


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Distribution:
    """A point of the probability simplex, stored as a float64 vector."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float, copy=True)
        if p.ndim != 1:
            raise InvalidChannel(f"distribution must be a vector, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise InvalidChannel("distribution has non-finite entries")
        if np.any(p < 0.0):
            i = int(np.argmin(p))
            raise NegativeEntry(i, 0, float(p[i]))
        total = math.fsum(p.tolist())
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise RowNotNormalized(0, total)
        object.__setattr__(self, "probs", _readonly(p))

    def __len__(self) -> int:
        return self.probs.shape[0]

    def __getitem__(self, i: int) -> float:
        return float(self.probs[i])

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.nonzero(self.probs > 0.0)[0])

    def is_interior(self) -> bool:
        return bool(np.all(self.probs > 0.0))


def uniform(m: int) -> Distribution:
    return Distribution(np.full(m, 1.0 / m))


def point_mass(m: int, i: int) -> Distribution:
    p = np.zeros(m)
    p[i] = 1.0
    return Distribution(p)


@dataclass(frozen=True, eq=False)
class Channel:
    """Validated row-stochastic matrix; build through validate_channel."""

    matrix: np.ndarray
    m: int
    n: int

    def row(self, i: int) -> np.ndarray:
        return self.matrix[i]

    def row_distribution(self, i: int) -> Distribution:
        return Distribution(self.matrix[i])


def _numerical_rank(a: np.ndarray) -> int:
    """Rank by full-pivot Gaussian elimination with a scaled threshold."""
    work = np.array(a, dtype=float)
    m, n = work.shape
    scale = np.max(np.abs(work))
    if scale == 0.0:
        return 0
    rank = 0
    rows = list(range(m))
    cols = list(range(n))
    while rank < min(m, n):
        sub = np.abs(work[np.ix_(rows[rank:], cols[rank:])])
        piv = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[piv] <= RANK_PIVOT_TOL * scale:
            break
        pr, pc = rank + piv[0], rank + piv[1]
        rows[rank], rows[pr] = rows[pr], rows[rank]
        cols[rank], cols[pc] = cols[pc], cols[rank]
        r0, c0 = rows[rank], cols[rank]
        pivot = work[r0, c0]
        for r in rows[rank + 1:]:
            f = work[r, c0] / pivot
            if f != 0.0:
                work[r, [cols[k] for k in range(rank, n)]] -= \
                    f * work[r0, [cols[k] for k in range(rank, n)]]
        rank += 1
    return rank


def validate_channel(rows) -> Channel:
    """Check and normalize a candidate channel matrix.

    Rows may deviate from unit sum by up to 1e-9 and are rescaled exactly
    afterwards, so every stored row satisfies the Distribution invariant.

    Raises NegativeEntry, RowNotNormalized, UselessOutputColumn or
    RankDeficient, each carrying 0-based indices.
    """
    a = np.array(rows, dtype=float)
    if a.ndim != 2:
        raise InvalidChannel(f"channel matrix must be 2-d, got shape {a.shape}")
    m, n = a.shape
    if m < 2 or n < 2:
        raise InvalidChannel(f"channel needs at least 2 inputs and 2 outputs, got {m}x{n}")
    if not np.all(np.isfinite(a)):
        bad = np.argwhere(~np.isfinite(a))[0]
        raise InvalidChannel(f"entry [{bad[0]}][{bad[1]}] is not finite")
    for i in range(m):
        for j in range(n):
            if a[i, j] < 0.0:
                raise NegativeEntry(i, j, float(a[i, j]))
    for i in range(m):
        total = math.fsum(a[i].tolist())
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise RowNotNormalized(i, total)
        a[i] /= total
    for j in range(n):
        if not np.any(a[:, j] > 0.0):
            raise UselessOutputColumn(j)
    rank = _numerical_rank(a)
    if rank < m:
        raise RankDeficient(rank, m)
    return Channel(matrix=_readonly(a), m=m, n=n)


def stable_sum(terms) -> float:
    """Exactly rounded sum; the result does not depend on term order."""
    return math.fsum(terms)


def kl_divergence(q: Distribution, q_prime: Distribution) -> float:
    """D(q || q') in nats; +inf when q puts mass where q' has none."""
    p = q.probs
    r = q_prime.probs
    if p.shape != r.shape:
        raise LengthMismatch(f"lengths {p.shape[0]} and {r.shape[0]} differ")
    terms = []
    for pj, rj in zip(p.tolist(), r.tolist()):
        if pj == 0.0:
            continue
        if rj == 0.0:
            return math.inf
        terms.append(pj * math.log(pj / rj))
    return stable_sum(terms)


def output_distribution(lam: Distribution, channel: Channel) -> Distribution:
    """The output law lam @ matrix, summed column-by-column with fsum."""
    if len(lam) != channel.m:
        raise LengthMismatch(f"input length {len(lam)} != m = {channel.m}")
    w = lam.probs
    p = channel.matrix
    q = np.array([stable_sum((w * p[:, j]).tolist()) for j in range(channel.n)])
    return Distribution(q)


def row_divergences(lam: Distribution, channel: Channel) -> np.ndarray:
    """Vector of D(row_i || lam @ matrix) for every input symbol.

    Raises ZeroOutputMass when some output symbol has zero probability but
    a row puts positive mass on it (the divergence would be infinite).
    """
    q = output_distribution(lam, channel).probs
    p = channel.matrix
    out = np.empty(channel.m)
    for i in range(channel.m):
        terms = []
        for j in range(channel.n):
            pij = p[i, j]
            if pij == 0.0:
                continue
            if q[j] == 0.0:
                raise ZeroOutputMass(j)
            terms.append(pij * math.log(pij / q[j]))
        out[i] = stable_sum(terms)
    return out


def mutual_information(lam: Distribution, channel: Channel) -> float:
    """I(lam, channel) in nats, computed as the defining double sum."""
    if len(lam) != channel.m:
        raise LengthMismatch(f"input length {len(lam)} != m = {channel.m}")
    q = output_distribution(lam, channel).probs
    p = channel.matrix
    w = lam.probs
    terms = []
    for i in range(channel.m):
        if w[i] == 0.0:
            continue
        for j in range(channel.n):
            pij = p[i, j]
            if pij == 0.0:
                continue
            terms.append(w[i] * pij * math.log(pij / q[j]))
    return stable_sum(terms)


def entropy(lam: Distribution) -> float:
    """Shannon entropy in nats, with 0 log 0 = 0."""
    return -stable_sum(pi * math.log(pi) for pi in lam.probs.tolist() if pi > 0.0)
