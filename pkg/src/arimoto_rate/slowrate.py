"""Constants of the 1/N regime for three-letter inputs.

Applies when exactly two indices carry mass and the third is degenerate
(zero mass, divergence equal to the capacity). After relabeling to that
canonical order, the error dynamics restricted to the support plane have
eigenvalues {eta1, 1} with eta1 = -first[1,2]; the degenerate coordinate
obeys a scalar quadratic recurrence whose curvature rho fixes the limits
of N * mu_N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import Distribution
from .errors import NonpositiveRho, WrongCase, WrongShape
from .iteration import Trace
from .local import DivergenceDerivatives
from .solver import IndexClassification

RHO_MIN = 1e-12


def _canonical_indices(classification: IndexClassification) -> tuple[int, int, int]:
    if classification.m != 3:
        raise WrongShape(f"slow-rate constants need m = 3, got m = {classification.m}")
    if classification.m1 != 2 or classification.m2 != 1:
        raise WrongCase(
            "slow-rate constants need two support indices and one degenerate index, "
            f"got m1={classification.m1}, m2={classification.m2}, m3={classification.m3}"
        )
    i1, i2 = classification.type_I
    i3 = classification.type_II[0]
    return i1, i2, i3


def reduced_jacobian(dstar: DivergenceDerivatives, lam_star: Distribution,
                     classification: IndexClassification) -> np.ndarray:
    """The 2x2 map governing the support-plane error after eliminating the
    degenerate coordinate; its eigenvalues are {-first[1,2], 1}."""
    i1, i2, i3 = _canonical_indices(classification)
    g = dstar.first
    l1, l2 = lam_star[i1], lam_star[i2]
    return np.array([
        [1.0 + l1 * g[i1, i1] - l1 * g[i1, i3], l2 * g[i1, i2] - l2 * g[i2, i3]],
        [l1 * g[i1, i2] - l1 * g[i1, i3], 1.0 + l2 * g[i2, i2] - l2 * g[i2, i3]],
    ])


@dataclass(frozen=True, eq=False)
class SlowRateConstants:
    eta1: float                       # contraction eigenvalue of the reduced map
    a: tuple[float, float]            # right eigenvector for eta1, a1 - a2 = 1
    tau1: float
    tau2: float
    b1: float
    b2: float
    rho: float                        # curvature of the degenerate coordinate
    limits: tuple[float, float, float]  # lim N*mu, original index order
    canonical: tuple[int, int, int]   # original indices in canonical order


def slow_constants(dstar: DivergenceDerivatives, lam_star: Distribution,
                   classification: IndexClassification) -> SlowRateConstants:
    """Splitting coefficients b1, b2, curvature rho, and the limits of
    N * mu_N, evaluated at the given point.

    b1 and b2 come from the normalized eigenvector condition
    tau1 a1 + tau2 a2 = 0, a1 - a2 = 1, so b1 + b2 = 1 holds exactly even
    when the evaluation point sits slightly off the ideal boundary.
    """
    i1, i2, i3 = _canonical_indices(classification)
    g = dstar.first
    l1, l2 = lam_star[i1], lam_star[i2]
    eta1 = -g[i1, i2]
    tau1 = l1 * (g[i1, i2] - g[i1, i3])
    tau2 = l2 * (g[i1, i2] - g[i2, i3])
    denom = tau1 + tau2
    if denom <= 0.0:
        raise WrongCase(f"tau1 + tau2 = {denom!r} is not positive")
    a1 = tau2 / denom
    a2 = -tau1 / denom
    b1, b2 = -a2, a1
    rho = g[i1, i3] * b1 + g[i2, i3] * b2 - g[i3, i3]
    if rho <= RHO_MIN:
        raise NonpositiveRho(rho)
    limits = np.empty(3)
    limits[i1] = -b1 / rho
    limits[i2] = -b2 / rho
    limits[i3] = 1.0 / rho
    return SlowRateConstants(
        eta1=float(eta1),
        a=(float(a1), float(a2)),
        tau1=float(tau1),
        tau2=float(tau2),
        b1=float(b1),
        b2=float(b2),
        rho=float(rho),
        limits=tuple(float(x) for x in limits),
        canonical=(i1, i2, i3),
    )


def project_mu12(mu3: float, constants: SlowRateConstants, k: float, n: int) -> tuple[float, float]:
    """Support-plane error components implied by the degenerate component:
    (-b1 mu3 + K eta1^N, -b2 mu3 - K eta1^N), in canonical order."""
    decay = k * constants.eta1 ** n
    return (-constants.b1 * mu3 + decay, -constants.b2 * mu3 - decay)


def fit_decay_coefficient(trace: Trace, lam_star: Distribution,
                          constants: SlowRateConstants,
                          window: tuple[int, int] = (10, 50)) -> float:
    """Least-squares fit of K in  a . mu_hat_N = K eta1^N  over a window of
    early-but-post-transient iterates."""
    i1, i2, _ = constants.canonical
    lo, hi = window
    hi = min(hi, trace.steps)
    if hi < lo:
        raise WrongShape(f"trace too short for fit window {window}")
    a1, a2 = constants.a
    num = 0.0
    den = 0.0
    for n in range(lo, hi + 1):
        mu = trace.iterates[n] - lam_star.probs
        y = a1 * mu[i1] + a2 * mu[i2]
        w = constants.eta1 ** n
        num += w * y
        den += w * w
    return num / den
