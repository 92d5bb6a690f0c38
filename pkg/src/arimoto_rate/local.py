"""Local analysis of the capacity iteration at a solution point.

Builds the analytic Jacobian and Hessians of the update map from the
first and second derivatives of the row divergences, computes the
spectrum blockwise through a symmetrizing similarity, and predicts the
observable convergence rate from the leading left eigenvector.

Index conventions follow the row-vector calculus used throughout: the
Jacobian entry (i', i) is the derivative of output coordinate i with
respect to input coordinate i', so iteration errors evolve by
right-multiplication, mu' = mu @ J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import Channel, stable_sum
from .errors import ZeroOutputMass
from .jacobi import jacobi_eigh
from .solver import CapacitySolution, IndexClassification

THETA_TIE_TOL = 1e-9        # eigenvalues this close to theta_max merge with it
RIGHT_EIGEN_TOL = 1e-8      # residual for the right-eigenvector test
ORTHOGONALITY_REL_TOL = 1e-10  # |mu0 . nu_max| <= this * ||mu0||


@dataclass(frozen=True, eq=False)
class DivergenceDerivatives:
    """First and second partial derivatives of the row divergences with
    respect to the input probabilities, at a fixed evaluation point.

    first[i', i]       = -sum_j P[i',j] P[i,j] / q[j]
    second[i, i', i''] =  sum_j P[i,j] P[i',j] P[i'',j] / q[j]^2
    """

    first: np.ndarray
    second: np.ndarray
    evaluation_point: np.ndarray


def divergence_derivatives(channel: Channel, sol: CapacitySolution) -> DivergenceDerivatives:
    """Evaluate the divergence derivative arrays at sol's input law."""
    m, n = channel.m, channel.n
    p = channel.matrix
    q = sol.q_star.probs
    if np.any(q <= 0.0):
        raise ZeroOutputMass(int(np.argmin(q)))
    first = np.empty((m, m))
    for a in range(m):
        for b in range(a, m):
            val = -stable_sum((p[a] * p[b] / q).tolist())
            first[a, b] = first[b, a] = val
    second = np.empty((m, m, m))
    qq = q * q
    for i in range(m):
        for a in range(m):
            for b in range(a, m):
                val = stable_sum((p[i] * p[a] * p[b] / qq).tolist())
                second[i, a, b] = second[i, b, a] = val
    return DivergenceDerivatives(
        first=first, second=second, evaluation_point=np.array(sol.lambda_star.probs)
    )


def _effective_terms(sol: CapacitySolution):
    """Weights and exponential factors consistent with the classification.

    Type II and III indices carry zero weight; the exponential of the
    divergence gap is exactly 1 for types I and II (their divergence is the
    capacity by definition) and exp(D_i - C) for type III. Honoring the
    classification keeps idealized evaluation points (for example a rounded
    boundary law) exactly on the degenerate case formulas.
    """
    cls = sol.classification
    m = cls.m
    lam_eff = np.zeros(m)
    for i in cls.type_I:
        lam_eff[i] = sol.lambda_star[i]
    exp_gap = np.ones(m)
    for i in cls.type_III:
        exp_gap[i] = math.exp(sol.divergences[i] - sol.capacity)
    return lam_eff, exp_gap


def jacobian(channel: Channel, sol: CapacitySolution, dstar: DivergenceDerivatives) -> np.ndarray:
    """Analytic Jacobian of the update map at the solution.

    Columns split by index type: support columns are
    delta + lam_i (first[i',i] + 1 - exp_gap[i']); degenerate columns are
    exactly delta; decaying columns are exp(D_i - C) delta.
    """
    cls = sol.classification
    m = cls.m
    lam_eff, exp_gap = _effective_terms(sol)
    jac = np.zeros((m, m))
    for i in cls.type_I:
        for ip in range(m):
            jac[ip, i] = (1.0 if ip == i else 0.0) + lam_eff[i] * (
                dstar.first[ip, i] + 1.0 - exp_gap[ip]
            )
    for i in cls.type_II:
        jac[i, i] = 1.0
    for i in cls.type_III:
        jac[i, i] = exp_gap[i]
    return jac


def hessians(channel: Channel, sol: CapacitySolution, dstar: DivergenceDerivatives) -> np.ndarray:
    """Second-derivative matrices of the update map coordinates, stacked as
    an (m, m, m) array: hessians[i][i', i''].

    Uses the full second-order formula; with the classification honored it
    reduces, for a degenerate index i and no decaying indices, to
    delta_{i,i'} first[i,i''] + delta_{i,i''} first[i,i'].
    """
    cls = sol.classification
    m = cls.m
    g = dstar.first
    t = dstar.second
    lam_eff, exp_gap = _effective_terms(sol)
    support = list(cls.type_I)
    out = np.empty((m, m, m))
    for i in range(m):
        li = lam_eff[i]
        ei = exp_gap[i]
        for a in range(m):
            for b in range(a, m):
                cross = stable_sum(lam_eff[k] * g[k, a] * g[k, b] for k in support)
                bracket = (
                    (1.0 - exp_gap[a] + g[i, a]) * ((1.0 if i == b else 0.0) + li * (1.0 - exp_gap[b]))
                    + (1.0 - exp_gap[b] + g[i, b]) * ((1.0 if i == a else 0.0) + li * (1.0 - exp_gap[a]))
                    + li * (
                        g[i, a] * g[i, b]
                        + t[i, a, b]
                        + g[a, b]
                        - exp_gap[a] * g[a, b]
                        - exp_gap[b] * g[a, b]
                        - cross
                    )
                )
                out[i, a, b] = out[i, b, a] = ei * bracket
    return out


@dataclass(frozen=True, eq=False)
class BlockSpectra:
    """Eigenvalues attributed to the three diagonal blocks, in original
    index coordinates the support block size is m1 and so on."""

    type_I: tuple[float, ...]
    type_II: tuple[float, ...]
    type_III: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray          # ascending
    theta_max: float
    theta_sec: float
    nu_max: np.ndarray               # left eigenvector for theta_max, original order
    nu_max_is_right: bool
    blocks: BlockSpectra
    degenerate_theta_max: bool


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    """Scale to unit 1-norm and make the first significant entry negative,
    matching the reporting convention of the worked solutions."""
    v = v / stable_sum(np.abs(v).tolist())
    scale = float(np.max(np.abs(v)))
    for x in v:
        if abs(x) > 1e-12 * scale:
            return -v if x > 0.0 else v
    return v


def spectrum(jac: np.ndarray, classification: IndexClassification,
             lambda_star) -> SpectrumResult:
    """Blockwise spectrum of the Jacobian plus the leading left eigenvector.

    The support block is diagonalized through the similarity
    sqrt(L) (I - J_I) sqrt(L)^-1, which is symmetric positive definite, so
    a plain Jacobi sweep suffices and the spectrum is provably real. The
    degenerate block contributes ones; the decaying block contributes its
    diagonal directly.
    """
    cls = classification
    m = cls.m
    lam = np.asarray(getattr(lambda_star, "probs", lambda_star), dtype=float)
    perm = list(cls.permutation())
    jperm = jac[np.ix_(perm, perm)]
    m1 = cls.m1

    j_i = jperm[:m1, :m1]
    b = np.eye(m1) - j_i
    sqrt_l = np.sqrt(lam[list(cls.type_I)])
    sym = b * (sqrt_l[:, None] / sqrt_l[None, :])
    betas, vecs = jacobi_eigh(sym, tol=1e-12)
    thetas_i = 1.0 - betas                 # descending beta -> ascending theta
    order = np.argsort(thetas_i, kind="stable")
    thetas_i = thetas_i[order]
    vecs = vecs[:, order]

    entries = [(float(th), "I", k) for k, th in enumerate(thetas_i)]
    entries += [(1.0, "II", k) for k in range(cls.m2)]
    entries += [
        (float(jperm[m1 + cls.m2 + k, m1 + cls.m2 + k]), "III", k)
        for k in range(cls.m3)
    ]
    entries.sort(key=lambda e: e[0])
    eigenvalues = np.array([e[0] for e in entries])

    theta_max = eigenvalues[-1]
    ties = [e for e in entries if e[0] >= theta_max - THETA_TIE_TOL]
    degenerate = len(ties) > 1
    below = eigenvalues[eigenvalues < theta_max - THETA_TIE_TOL]
    theta_sec = float(below[-1]) if below.size else float(theta_max)

    top_block, top_k = ties[-1][1], ties[-1][2]
    nu_perm = np.zeros(m)
    if top_block == "I":
        # left eigenvector of J_I maps through the similarity as u * sqrt(L)
        nu_perm[:m1] = vecs[:, top_k] * sqrt_l
    else:
        row = m1 + (0 if top_block == "II" else cls.m2) + top_k
        nu_perm[row] = 1.0
        # remaining components solve nu_I (J_I - theta) = -nu_row * J[row, :m1]
        a = j_i - theta_max * np.eye(m1)
        rhs = -jperm[row, :m1]
        try:
            nu_perm[:m1] = np.linalg.solve(a.T, rhs)
        except np.linalg.LinAlgError:
            # theta_max collides with a support-block eigenvalue
            nu_perm[:m1] = 0.0
    nu = np.zeros(m)
    for pos, orig in enumerate(perm):
        nu[orig] = nu_perm[pos]
    nu = _canonical_sign(nu)

    resid = float(np.linalg.norm(jac @ nu - theta_max * nu))
    return SpectrumResult(
        eigenvalues=eigenvalues,
        theta_max=float(theta_max),
        theta_sec=float(theta_sec),
        nu_max=nu,
        nu_max_is_right=resid <= RIGHT_EIGEN_TOL,
        blocks=BlockSpectra(
            type_I=tuple(float(x) for x in thetas_i),
            type_II=tuple(1.0 for _ in range(cls.m2)),
            type_III=tuple(e[0] for e in entries if e[1] == "III"),
        ),
        degenerate_theta_max=degenerate,
    )


EXPONENTIAL = "exponential"
ONE_OVER_N = "one_over_n"


@dataclass(frozen=True, eq=False)
class RatePrediction:
    regime: str                      # EXPONENTIAL or ONE_OVER_N
    theta_pred: float | None = None
    log_rate: float | None = None    # -ln(theta_pred) for exponential regimes
    limits: tuple[float, float, float] | None = None  # lim N*mu for 1/N regimes
    constants_available: bool = False
    branch: str = ""                 # which decision path produced the rate


def predict_rate(spec: SpectrumResult, classification: IndexClassification,
                 mu0: np.ndarray) -> RatePrediction:
    """Decide the convergence regime and rate for a given start.

    Degenerate (type II) indices force 1/N convergence. Otherwise the rate
    is theta_sec exactly when the transposed leading left eigenvector is
    also a right eigenvector and the initial error is orthogonal to it;
    in every other case it is theta_max.
    """
    mu0 = np.asarray(mu0, dtype=float)
    if classification.m2 > 0:
        return RatePrediction(
            regime=ONE_OVER_N,
            constants_available=classification.m == 3,
            branch="degenerate index present",
        )
    use_sec = (
        not spec.degenerate_theta_max
        and spec.nu_max_is_right
        and abs(float(mu0 @ spec.nu_max)) <= ORTHOGONALITY_REL_TOL * float(np.linalg.norm(mu0))
    )
    if use_sec:
        theta = spec.theta_sec
        branch = "start orthogonal to leading eigenvector"
    elif spec.nu_max_is_right:
        theta = spec.theta_max
        branch = "start not orthogonal to leading eigenvector"
    else:
        theta = spec.theta_max
        branch = "leading left eigenvector is not a right eigenvector"
    return RatePrediction(
        regime=EXPONENTIAL,
        theta_pred=float(theta),
        log_rate=-math.log(theta) if theta > 0.0 else math.inf,
        branch=branch,
    )
