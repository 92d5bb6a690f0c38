"""The capacity fixed-point map, trace-recording iteration, and the
per-step capacity estimate with its 1/N error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    Channel,
    Distribution,
    output_distribution,
    stable_sum,
)
from .errors import DomainError, NotInterior, ZeroOutputMass


@dataclass(frozen=True)
class StoppingRule:
    """Stop at max_iterations, or earlier when the max-norm change between
    successive iterates drops to step_tolerance (first rule satisfied wins)."""

    max_iterations: int = 10_000
    step_tolerance: float = 1e-13

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if self.step_tolerance < 0.0:
            raise ValueError("step_tolerance must be nonnegative")


def _support_divergences(channel: Channel, w: np.ndarray, q: np.ndarray) -> np.ndarray:
    """D(row_i || q) for indices with w_i > 0; other entries are 0 and unused."""
    p = channel.matrix
    out = np.zeros(channel.m)
    for i in range(channel.m):
        if w[i] == 0.0:
            continue
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


def arimoto_map(channel: Channel, lam: Distribution) -> Distribution:
    """One step of the capacity iteration: reweight by exp of the row
    divergences and renormalize. Zero coordinates stay exactly zero.

    The exponentials are shifted by the largest divergence on the support;
    the common factor cancels, so peaked channels cannot overflow.
    """
    w = lam.probs
    q = output_distribution(lam, channel).probs
    d = _support_divergences(channel, w, q)
    live = w > 0.0
    shift = float(np.max(d[live]))
    weights = np.where(live, w * np.exp(d - shift), 0.0)
    total = stable_sum(weights.tolist())
    return Distribution(weights / total)


def capacity_estimate(channel: Channel, lam_n: Distribution, lam_next: Distribution) -> float:
    """The per-step capacity estimate built from two consecutive iterates.

    Equals  h(next) + sum_i next_i * sum_j P_ij * log(cur_i P_ij / q_j)
    with q = cur @ matrix; for converged iterates this is the capacity.
    """
    if len(lam_n) != channel.m or len(lam_next) != channel.m:
        raise DomainError("iterate lengths do not match the channel")
    cur = lam_n.probs
    nxt = lam_next.probs
    q = output_distribution(lam_n, channel).probs
    p = channel.matrix
    terms = []
    for i in range(channel.m):
        if nxt[i] == 0.0:
            continue
        if cur[i] <= 0.0:
            raise DomainError(f"current iterate has no mass at {i} but the next does")
        terms.append(-nxt[i] * math.log(nxt[i]))
        for j in range(channel.n):
            pij = p[i, j]
            if pij == 0.0:
                continue
            if q[j] == 0.0:
                raise ZeroOutputMass(j)
            terms.append(nxt[i] * pij * math.log(cur[i] * pij / q[j]))
    return stable_sum(terms)


def estimate_gap_bound(lam_star: Distribution, lam0: Distribution, n: int) -> float:
    """Upper bound D(lam_star || lam0) / n on capacity minus the step-n estimate.

    This is the classic alternating-minimization bound; for a uniform start
    it reduces to (log m - h(lam_star)) / n.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if len(lam_star) != len(lam0):
        raise DomainError("distribution lengths differ")
    terms = []
    for a, b in zip(lam_star.probs.tolist(), lam0.probs.tolist()):
        if a == 0.0:
            continue
        if b == 0.0:
            return math.inf
        terms.append(a * math.log(a / b))
    return stable_sum(terms) / n


@dataclass(frozen=True, eq=False)
class Trace:
    """A recorded run: iterates[k] is the k-th distribution, estimates[k]
    the capacity estimate computed from iterates k and k+1."""

    channel: Channel
    iterates: np.ndarray      # (N+1, m)
    estimates: np.ndarray     # (N,)

    def __len__(self) -> int:
        return self.iterates.shape[0]

    @property
    def steps(self) -> int:
        return self.iterates.shape[0] - 1

    def distribution(self, k: int) -> Distribution:
        return Distribution(self.iterates[k])

    @property
    def final(self) -> Distribution:
        return Distribution(self.iterates[-1])


def iterate(channel: Channel, lam0: Distribution, stop: StoppingRule = StoppingRule()) -> Trace:
    """Run the fixed-point iteration from an interior start, recording every
    iterate and the per-step capacity estimate."""
    if len(lam0) != channel.m:
        raise DomainError(f"start length {len(lam0)} != m = {channel.m}")
    if not lam0.is_interior():
        raise NotInterior("initial distribution must be strictly positive")
    iterates = [np.array(lam0.probs)]
    estimates: list[float] = []
    cur = lam0
    for _ in range(stop.max_iterations):
        nxt = arimoto_map(channel, cur)
        estimates.append(capacity_estimate(channel, cur, nxt))
        iterates.append(np.array(nxt.probs))
        delta = float(np.max(np.abs(nxt.probs - cur.probs)))
        cur = nxt
        if delta <= stop.step_tolerance:
            break
    return Trace(
        channel=channel,
        iterates=np.array(iterates),
        estimates=np.array(estimates),
    )
