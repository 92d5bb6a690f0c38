"""High-precision capacity solver and support/index classification.

Strategy: run the fixed-point iteration from a uniform (or given) interior
start for a burn-in, read off a tentative support, then solve the
equal-divergence optimality equalities on that support with a damped
Newton method. The optimality inequalities are verified off the support;
the support grows by the most violating index (or shrinks when Newton
leaves the simplex) until the check passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    Channel,
    Distribution,
    mutual_information,
    output_distribution,
    stable_sum,
    uniform,
)
from .errors import (
    AmbiguousSupport,
    EmptyTypeI,
    NoConvergence,
    NotInterior,
    ZeroOutputMass,
)


@dataclass(frozen=True)
class SolverOptions:
    burn_in: int = 2000
    tol_support: float = 1e-6
    tol_equal: float = 1e-6
    newton_tol: float = 1e-12
    newton_max_iter: int = 80
    max_halvings: int = 50
    max_support_updates: int = 12
    grow_tol: float = 1e-10
    initial: Distribution | None = None


@dataclass(frozen=True)
class IndexClassification:
    """Partition of the input indices at a solution.

    type_I: support indices (divergence equals the capacity),
    type_II: zero-probability indices whose divergence still equals the
    capacity (the degenerate, slowly converging kind),
    type_III: zero-probability indices with strictly smaller divergence.
    """

    type_I: tuple[int, ...]
    type_II: tuple[int, ...]
    type_III: tuple[int, ...]
    tol_support: float
    tol_equal: float

    @property
    def m1(self) -> int:
        return len(self.type_I)

    @property
    def m2(self) -> int:
        return len(self.type_II)

    @property
    def m3(self) -> int:
        return len(self.type_III)

    @property
    def m(self) -> int:
        return self.m1 + self.m2 + self.m3

    def permutation(self) -> tuple[int, ...]:
        """Original indices listed type I first, then II, then III."""
        return self.type_I + self.type_II + self.type_III


def classify_indices(
    lam_star: Distribution,
    divergences: np.ndarray,
    capacity: float,
    tol_support: float = 1e-6,
    tol_equal: float = 1e-6,
) -> IndexClassification:
    """Classify indices by support membership and divergence equality.

    Raises EmptyTypeI when fewer than two indices land in the support,
    which signals an unconverged or invalid solution.
    """
    m = len(lam_star)
    if divergences.shape != (m,):
        raise EmptyTypeI("divergence vector length does not match the distribution")
    t1, t2, t3 = [], [], []
    for i in range(m):
        if lam_star[i] > tol_support:
            t1.append(i)
        elif divergences[i] >= capacity - tol_equal:
            t2.append(i)
        else:
            t3.append(i)
    if len(t1) < 2:
        raise EmptyTypeI(f"only {len(t1)} support indices at tol_support={tol_support}")
    return IndexClassification(
        type_I=tuple(t1),
        type_II=tuple(t2),
        type_III=tuple(t3),
        tol_support=tol_support,
        tol_equal=tol_equal,
    )


@dataclass(frozen=True, eq=False)
class CapacitySolution:
    """A solved (or externally supplied) evaluation point with its channel,
    capacity, output law, divergence vector, optimality residual and index
    classification."""

    channel: Channel
    lambda_star: Distribution
    capacity: float
    q_star: Distribution
    divergences: np.ndarray
    kkt_residual: float
    classification: IndexClassification


def _divergences_allow_inf(channel: Channel, lam: np.ndarray) -> np.ndarray:
    """Row divergences against lam @ matrix; +inf instead of an error when a
    zero-mass output symbol is hit (possible only for off-support rows)."""
    q = np.array([
        stable_sum((lam * channel.matrix[:, j]).tolist()) for j in range(channel.n)
    ])
    out = np.empty(channel.m)
    for i in range(channel.m):
        terms = []
        infinite = False
        for j in range(channel.n):
            pij = channel.matrix[i, j]
            if pij == 0.0:
                continue
            if q[j] <= 0.0:
                infinite = True
                break
            terms.append(pij * math.log(pij / q[j]))
        out[i] = math.inf if infinite else stable_sum(terms)
    return out


def kkt_residual(channel: Channel, lam: Distribution) -> float:
    """Max deviation from the optimality conditions at lam.

    With C = max over the support of the row divergences: the residual is
    the largest of |D_i - C| on the support and (D_i - C)+ off it. Zero
    exactly at the optimum.
    """
    d = _divergences_allow_inf(channel, lam.probs)
    support = lam.probs > 0.0
    c_tilde = float(np.max(d[support]))
    res = float(np.max(np.abs(d[support] - c_tilde)))
    if not np.all(support):
        off = d[~support] - c_tilde
        res = max(res, float(np.max(np.clip(off, 0.0, None))))
    return res


def _burn_in(channel: Channel, start: np.ndarray, steps: int) -> np.ndarray:
    """Vectorized fixed-point iteration without trace recording."""
    p = channel.matrix
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    c_rows = plogp.sum(axis=1)
    lam = np.array(start, dtype=float)
    for _ in range(steps):
        q = lam @ p
        d = c_rows - p @ np.log(q)
        w = lam * np.exp(d - d.max())
        lam = w / w.sum()
    return lam


def _newton_equalize(channel: Channel, support: tuple[int, ...], x0: np.ndarray,
                     opts: SolverOptions) -> np.ndarray:
    """Solve  D_i(x) equal for i in support,  sum x = 1  by damped Newton.

    x is the support-restricted weight vector; coordinates may pass through
    small negative values while iterating, but every accepted step keeps the
    output law strictly positive. Raises NoConvergence on budget exhaustion.
    """
    p = channel.matrix[list(support), :]
    s = len(support)

    def full_q(x):
        return x @ p

    def divergences(x, q):
        out = np.empty(s)
        for a in range(s):
            terms = []
            for j in range(channel.n):
                paj = p[a, j]
                if paj > 0.0:
                    terms.append(paj * math.log(paj / q[j]))
            out[a] = stable_sum(terms)
        return out

    def residual_of(x):
        q = full_q(x)
        if np.any(q <= 0.0):
            return math.inf, None
        d = divergences(x, q)
        r = np.empty(s)
        r[: s - 1] = d[: s - 1] - d[s - 1]
        r[s - 1] = stable_sum(x.tolist()) - 1.0
        return float(np.max(np.abs(r))), (d, q, r)

    x = np.array(x0, dtype=float)
    res, data = residual_of(x)
    if not math.isfinite(res):
        raise NoConvergence("support mixture has zero-mass output symbols")
    for _ in range(opts.newton_max_iter):
        if res <= opts.newton_tol:
            return x
        d, q, r = data
        # gram[a, b] = sum_j p_a p_b / q  (derivative of D_b wrt x_a is -gram)
        scaled = p / q
        gram = scaled @ p.T
        jac = np.empty((s, s))
        # equation rows: d/dx_b (D_a - D_last) = -gram[b, a] + gram[b, last]
        for a in range(s - 1):
            jac[a, :] = gram[:, s - 1] - gram[:, a]
        jac[s - 1, :] = 1.0
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Newton system on support {support}") from exc
        alpha = 1.0
        for _ in range(opts.max_halvings):
            trial = x + alpha * step
            trial_res, trial_data = residual_of(trial)
            if trial_res < res:
                x, res, data = trial, trial_res, trial_data
                break
            alpha *= 0.5
        else:
            # no improving step; accept only if already essentially converged
            if res <= 100.0 * opts.newton_tol:
                return x
            raise NoConvergence(f"line search stalled at residual {res:.3e}")
    if res <= 100.0 * opts.newton_tol:
        return x
    raise NoConvergence(f"Newton budget exhausted at residual {res:.3e}")


def _cover_all_outputs(channel: Channel, support: tuple[int, ...],
                       lam_burn: np.ndarray) -> tuple[int, ...]:
    """Grow the support until every output column gets positive mass, so the
    Newton phase never divides by a zero output probability."""
    current = set(support)
    while True:
        rows = channel.matrix[sorted(current), :]
        dead = np.nonzero(rows.sum(axis=0) == 0.0)[0]
        if dead.size == 0:
            return tuple(sorted(current))
        j = int(dead[0])
        feeders = [i for i in range(channel.m)
                   if channel.matrix[i, j] > 0.0 and i not in current]
        current.add(max(feeders, key=lambda i: lam_burn[i]))


def solve_capacity(channel: Channel, opts: SolverOptions = SolverOptions()) -> CapacitySolution:
    """Compute the capacity, the unique optimal input law, and its
    classification, to max-norm accuracy far below the classification
    tolerances."""
    start = opts.initial if opts.initial is not None else uniform(channel.m)
    if len(start) != channel.m:
        raise NotInterior("initial distribution length does not match the channel")
    if not start.is_interior():
        raise NotInterior("initial distribution must be strictly positive")

    lam_burn = _burn_in(channel, start.probs, opts.burn_in)
    support = tuple(int(i) for i in np.nonzero(lam_burn > opts.tol_support)[0])
    if len(support) < 2:
        support = tuple(int(i) for i in np.argsort(lam_burn)[-2:])
        support = tuple(sorted(support))

    seen: set[tuple[int, ...]] = set()
    lam_full = None
    for _ in range(opts.max_support_updates):
        support = _cover_all_outputs(channel, support, lam_burn)
        if support in seen:
            raise AmbiguousSupport(sorted(seen))
        seen.add(support)

        x0 = lam_burn[list(support)]
        x0 = np.maximum(x0, 1e-3)
        x0 = x0 / x0.sum()
        x = _newton_equalize(channel, support, x0, opts)

        if np.min(x) < -1e-12:
            drop = support[int(np.argmin(x))]
            support = tuple(i for i in support if i != drop)
            if len(support) < 2:
                raise EmptyTypeI("support shrank below two indices")
            continue

        x = np.clip(x, 0.0, None)
        x = x / stable_sum(x.tolist())
        lam_full = np.zeros(channel.m)
        lam_full[list(support)] = x

        d = _divergences_allow_inf(channel, lam_full)
        c_tilde = float(np.max(d[list(support)]))
        off = [i for i in range(channel.m) if i not in support]
        if not off:
            break
        violations = d[off] - c_tilde
        worst = int(np.argmax(violations))
        if violations[worst] <= opts.grow_tol:
            break
        support = tuple(sorted(support + (off[worst],)))
    else:
        raise NoConvergence("support update budget exhausted")

    lam_star = Distribution(lam_full)
    q_star = output_distribution(lam_star, channel)
    divergences = _divergences_allow_inf(channel, lam_star.probs)
    capacity = mutual_information(lam_star, channel)
    classification = classify_indices(
        lam_star, divergences, capacity, opts.tol_support, opts.tol_equal
    )
    return CapacitySolution(
        channel=channel,
        lambda_star=lam_star,
        capacity=capacity,
        q_star=q_star,
        divergences=divergences,
        kkt_residual=kkt_residual(channel, lam_star),
        classification=classification,
    )


def solution_at(
    channel: Channel,
    lam: Distribution,
    tol_support: float = 1e-6,
    tol_equal: float = 1e-6,
) -> CapacitySolution:
    """Package an arbitrary evaluation point as a CapacitySolution.

    Lets the local analysis be evaluated at externally chosen points
    (rounded or idealized boundary solutions); the stored residual reports
    how far the point is from true optimality.
    """
    q = output_distribution(lam, channel)
    d = _divergences_allow_inf(channel, lam.probs)
    c = mutual_information(lam, channel)
    classification = classify_indices(lam, d, c, tol_support, tol_equal)
    return CapacitySolution(
        channel=channel,
        lambda_star=lam,
        capacity=c,
        q_star=q,
        divergences=d,
        kkt_residual=kkt_residual(channel, lam),
        classification=classification,
    )


def boundary_projection(sol: CapacitySolution, tol_support: float | None = None) -> Distribution:
    """Idealize a solution by zeroing sub-threshold coordinates and
    renormalizing the rest; the default threshold is the classification's."""
    tol = sol.classification.tol_support if tol_support is None else tol_support
    p = np.where(sol.lambda_star.probs > tol, sol.lambda_star.probs, 0.0)
    return Distribution(p / stable_sum(p.tolist()))
