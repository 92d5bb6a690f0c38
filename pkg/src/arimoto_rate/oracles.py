"""Independent verification engines.

These deliberately avoid the analytic code paths they check: derivatives
come from central differences of the update map extended to free (possibly
off-simplex) coordinates, capacity from an exhaustive barycentric grid
with a provable duality gap, and small-matrix eigenvalues from closed-form
characteristic polynomial roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import Channel, Distribution, mutual_information, stable_sum
from .errors import ComplexSpectrum, TooLarge, ZeroOutputMass

STEP_MIN = 1e-8
STEP_MAX = 1e-3


@dataclass(frozen=True)
class FDSettings:
    """Central-difference step control; 1e-5 balances truncation against
    rounding for first derivatives of order-one quantities."""

    step: float = 1e-5

    def __post_init__(self):
        if not (STEP_MIN <= self.step <= STEP_MAX):
            raise ValueError(f"step must lie in [{STEP_MIN}, {STEP_MAX}]")


def extended_map(channel: Channel, x: np.ndarray) -> np.ndarray:
    """The update map on free coordinates: no simplex constraint, defined
    wherever x @ matrix stays strictly positive."""
    x = np.asarray(x, dtype=float)
    p = channel.matrix
    q = x @ p
    if np.any(q <= 0.0):
        raise ZeroOutputMass(int(np.argmin(q)))
    with np.errstate(divide="ignore"):
        logp = np.where(p > 0.0, np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    d = (p * logp).sum(axis=1) - p @ np.log(q)
    w = x * np.exp(d - d.max())
    return w / w.sum()


def fd_jacobian(channel: Channel, lam, settings: FDSettings = FDSettings()) -> np.ndarray:
    """Jacobian estimate with entry (i', i) = dF_i/dx_i' by central
    differences of the extended map."""
    x = np.asarray(getattr(lam, "probs", lam), dtype=float)
    h = settings.step
    m = channel.m
    out = np.empty((m, m))
    for ip in range(m):
        e = np.zeros(m)
        e[ip] = h
        out[ip, :] = (extended_map(channel, x + e) - extended_map(channel, x - e)) / (2.0 * h)
    return out


def fd_hessian(channel: Channel, lam, settings: FDSettings = FDSettings(step=1e-4)) -> np.ndarray:
    """Second derivatives d2F_i/dx_a dx_b as an (m, m, m) array, by the
    standard central stencils (3-point diagonal, 4-point mixed)."""
    x = np.asarray(getattr(lam, "probs", lam), dtype=float)
    h = settings.step
    m = channel.m
    f0 = extended_map(channel, x)
    out = np.empty((m, m, m))
    for a in range(m):
        ea = np.zeros(m)
        ea[a] = h
        diag = (extended_map(channel, x + ea) - 2.0 * f0 + extended_map(channel, x - ea)) / (h * h)
        out[:, a, a] = diag
        for b in range(a + 1, m):
            eb = np.zeros(m)
            eb[b] = h
            mixed = (
                extended_map(channel, x + ea + eb)
                - extended_map(channel, x + ea - eb)
                - extended_map(channel, x - ea + eb)
                + extended_map(channel, x - ea - eb)
            ) / (4.0 * h * h)
            out[:, a, b] = mixed
            out[:, b, a] = mixed
    return out


@dataclass(frozen=True, eq=False)
class GridCapacityResult:
    """Brute-force scan outcome: the best grid law, its mutual information
    (a certified lower bound), and a certified upper bound from the minimax
    divergence inequality C <= max_i D(row_i || q) for any output law q."""

    lambda_best: Distribution
    c_lower: float
    c_upper: float

    @property
    def gap(self) -> float:
        return self.c_upper - self.c_lower


def _barycentric_grid(m: int, resolution: int) -> np.ndarray:
    if m == 2:
        a = np.arange(resolution + 1)
        pts = np.stack([a, resolution - a], axis=1)
    else:
        pts = []
        for a in range(resolution + 1):
            for b in range(resolution + 1 - a):
                pts.append((a, b, resolution - a - b))
        pts = np.array(pts)
    return pts / float(resolution)


def grid_capacity(channel: Channel, resolution: int) -> GridCapacityResult:
    """Exhaustive scan of the barycentric grid with spacing 1/resolution.

    Ties on the maximum break toward the lexicographically first grid
    point, so partitioned scans reduce deterministically.
    """
    if channel.m > 3:
        raise TooLarge(f"grid scan supports m <= 3, got m = {channel.m}")
    if resolution > 2000:
        raise TooLarge(f"resolution {resolution} exceeds 2000")
    if resolution < 1:
        raise TooLarge("resolution must be at least 1")
    p = channel.matrix
    grid = _barycentric_grid(channel.m, resolution)
    q = grid @ p                                     # (G, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        qlogq = np.where(q > 0.0, q * np.log(np.where(q > 0.0, q, 1.0)), 0.0)
        logq = np.where(q > 0.0, np.log(np.where(q > 0.0, q, 1.0)), -np.inf)
    h_q = -qlogq.sum(axis=1)
    neg_h_rows = np.array([
        stable_sum((p[i][p[i] > 0.0] * np.log(p[i][p[i] > 0.0])).tolist())
        for i in range(channel.m)
    ])
    mi = h_q + grid @ neg_h_rows
    best = int(np.argmax(mi))

    # duality upper bound: for each grid q, C <= max_i D(row_i || q)
    d = neg_h_rows[None, :] - np.einsum("ij,gj->gi", np.where(p > 0.0, p, 0.0),
                                        np.where(np.isfinite(logq), logq, 0.0))
    unreachable = (q == 0.0) @ (p.T > 0.0).astype(float)   # (G, m): hits p>0 at q=0
    d = np.where(unreachable > 0.0, np.inf, d)
    c_upper = float(np.min(d.max(axis=1)))

    lam_best = Distribution(grid[best])
    # re-evaluate the winner with compensated sums for the reported bound
    c_lower = mutual_information(lam_best, channel)
    return GridCapacityResult(lambda_best=lam_best, c_lower=c_lower,
                              c_upper=max(c_upper, c_lower))


CHARPOLY_DISC_TOL = 1e-10


def charpoly_eigen(mat: np.ndarray) -> np.ndarray:
    """Real eigenvalues of a 2x2 or 3x3 matrix by closed-form roots of the
    characteristic polynomial, sorted ascending.

    Raises ComplexSpectrum when the discriminant indicates a conjugate
    pair beyond the numerical tolerance.
    """
    a = np.asarray(mat, dtype=float)
    if a.shape == (2, 2):
        tr = a[0, 0] + a[1, 1]
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        disc = tr * tr - 4.0 * det
        if disc < -CHARPOLY_DISC_TOL:
            raise ComplexSpectrum(f"discriminant {disc!r} < 0")
        s = math.sqrt(max(disc, 0.0))
        return np.sort(np.array([(tr - s) / 2.0, (tr + s) / 2.0]))
    if a.shape != (3, 3):
        raise ComplexSpectrum(f"matrix must be 2x2 or 3x3, got {a.shape}")
    # lam^3 - c2 lam^2 + c1 lam - c0
    c2 = a[0, 0] + a[1, 1] + a[2, 2]
    c1 = (
        a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
        + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    )
    c0 = (
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )
    # depressed cubic x^3 + px + q with lam = x + c2/3
    shift = c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = -c0 + c1 * shift - 2.0 * c2 ** 3 / 27.0
    # roots of x^3 + p x + q = 0; all real requires p <= 0
    if p > CHARPOLY_DISC_TOL:
        raise ComplexSpectrum(f"depressed cubic has p = {p!r} > 0")
    if p >= -1e-14:
        if abs(q) > CHARPOLY_DISC_TOL:
            raise ComplexSpectrum(f"triple-root case with q = {q!r} != 0")
        return np.sort(np.full(3, shift))
    amp = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * amp)
    if abs(arg) > 1.0 + 1e-8:
        raise ComplexSpectrum(f"cosine argument {arg!r} outside [-1, 1]")
    phi = math.acos(min(1.0, max(-1.0, arg))) / 3.0
    roots = [amp * math.cos(phi - 2.0 * math.pi * k / 3.0) + shift for k in range(3)]
    return np.sort(np.array(roots))
