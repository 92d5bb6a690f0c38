"""Cyclic Jacobi rotations for small symmetric eigenproblems.

Deterministic and dependency-free; adequate for the desk-scale matrices
this package produces (a handful of rows).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NoConvergence


def jacobi_eigh(sym: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigenvalues and eigenvectors of a symmetric matrix.

    Sweeps Jacobi rotations until the largest off-diagonal magnitude is at
    most tol. Returns (values ascending, vectors as columns in matching
    order); vectors are orthonormal to working precision.
    """
    a = np.array(sym, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"matrix must be square, got {a.shape}")
    if n > 1 and float(np.max(np.abs(a - a.T))) > 1e-10 * max(1.0, float(np.max(np.abs(a)))):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v

    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(a[p, q]))
        if off <= tol:
            order = np.argsort(a.diagonal(), kind="stable")
            return a.diagonal()[order].copy(), v[:, order].copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol * 1e-3:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                v = v @ rot
    raise NoConvergence(f"Jacobi sweeps did not reduce off-diagonal below {tol}")
