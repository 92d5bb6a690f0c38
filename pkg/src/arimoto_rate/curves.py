"""Measured convergence curves and comparison against predictions.

For exponential regimes the diagnostic is L(N) = -(1/N) ln ||mu_N||
(Euclidean norm); for 1/N regimes it is the componentwise series N * mu_N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import Distribution
from .errors import ExactConvergence, LengthMismatch, RegimeMismatch, WrongShape
from .iteration import Trace
from .local import EXPONENTIAL, ONE_OVER_N, RatePrediction

L_CURVE = "L"
N_MU_CURVE = "n_mu"


@dataclass(frozen=True, eq=False)
class RateCurve:
    kind: str                 # L_CURVE or N_MU_CURVE
    ns: np.ndarray            # strictly increasing step indices
    values: np.ndarray        # (len,) for L, (len, 3) for N*mu
    skipped: tuple[int, ...] = ()   # steps where mu was exactly zero

    @property
    def terminal(self):
        v = self.values[-1]
        return float(v) if self.kind == L_CURVE else tuple(float(x) for x in v)


def mu_series(trace: Trace, lam_star: Distribution) -> np.ndarray:
    """Errors mu_N = lambda_N - lambda_star for every recorded iterate."""
    if len(lam_star) != trace.iterates.shape[1]:
        raise LengthMismatch("lambda_star length does not match the trace")
    return trace.iterates - lam_star.probs


def exponential_curve(trace: Trace, lam_star: Distribution) -> RateCurve:
    """The L(N) series for N >= 1. Steps with mu exactly zero carry no rate
    information; they are skipped and reported. If every step is zero the
    iteration has converged exactly and ExactConvergence is raised."""
    mu = mu_series(trace, lam_star)
    ns, values, skipped = [], [], []
    for n in range(1, trace.steps + 1):
        norm = float(np.linalg.norm(mu[n]))
        if norm == 0.0:
            skipped.append(n)
            continue
        ns.append(n)
        values.append(-math.log(norm) / n)
    if not ns:
        raise ExactConvergence(skipped[0] if skipped else 1)
    return RateCurve(
        kind=L_CURVE,
        ns=np.array(ns, dtype=int),
        values=np.array(values),
        skipped=tuple(skipped),
    )


def one_over_n_curve(trace: Trace, lam_star: Distribution) -> RateCurve:
    """The componentwise N * mu_N series for a three-letter trace."""
    if trace.iterates.shape[1] != 3:
        raise WrongShape("N*mu curves are defined for m = 3 traces")
    mu = mu_series(trace, lam_star)
    ns = np.arange(1, trace.steps + 1)
    values = mu[1:] * ns[:, None]
    return RateCurve(kind=N_MU_CURVE, ns=ns, values=values)


@dataclass(frozen=True, eq=False)
class RateReport:
    regime: str
    predicted: float | tuple[float, float, float]   # -ln(theta) or limit vector
    ns: np.ndarray
    measured: np.ndarray
    terminal: float | tuple[float, float, float]
    discrepancy: float | tuple[float, float, float]


def compare(prediction: RatePrediction, curve: RateCurve) -> RateReport:
    """Fill a report with the terminal measured value and its distance to
    the prediction. The prediction's regime must match the curve type."""
    if curve.ns.size == 0:
        raise RegimeMismatch("measured curve is empty")
    if prediction.regime == EXPONENTIAL:
        if curve.kind != L_CURVE:
            raise RegimeMismatch("exponential prediction needs an L(N) curve")
        predicted = float(prediction.log_rate)
        terminal = float(curve.values[-1])
        discrepancy = abs(terminal - predicted)
    elif prediction.regime == ONE_OVER_N:
        if curve.kind != N_MU_CURVE:
            raise RegimeMismatch("1/N prediction needs an N*mu curve")
        if prediction.limits is None:
            raise RegimeMismatch("1/N prediction carries no limit constants")
        predicted = tuple(float(x) for x in prediction.limits)
        terminal = tuple(float(x) for x in curve.values[-1])
        discrepancy = tuple(abs(t - p) for t, p in zip(terminal, predicted))
    else:
        raise RegimeMismatch(f"unknown regime {prediction.regime!r}")
    return RateReport(
        regime=prediction.regime,
        predicted=predicted,
        ns=curve.ns,
        measured=curve.values,
        terminal=terminal,
        discrepancy=discrepancy,
    )
