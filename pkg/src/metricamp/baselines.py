"""Reference estimators: orthogonal matching pursuit plus output thresholding."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

__all__ = ["OmpConfig", "omp", "binarize"]


@dataclass(frozen=True)
class OmpConfig:
    """Greedy-selection controls.

    ``max_atoms`` caps the support size (must not exceed M), ``residual_tol``
    stops early once the residual norm falls below it, and ``threshold`` is
    the binarization cut used when scoring against {0,1} signals.
    """

    max_atoms: int
    residual_tol: float = 0.0
    threshold: float = 0.5

    def __post_init__(self):
        if self.max_atoms < 1:
            raise ValueError("max_atoms must be >= 1")
        if self.residual_tol < 0:
            raise ValueError("residual_tol must be nonnegative")


def omp(A, y, config: OmpConfig):
    """Greedy sparse regression of ``y`` on the columns of ``A``.

    Each step selects the unselected column with maximal absolute
    correlation to the current residual, refits all selected coefficients
    by least squares (incremental Cholesky of the selected Gram matrix),
    and updates the residual.  Stops at ``max_atoms`` atoms or when the
    residual norm drops to ``residual_tol``.

    Returns ``(x_hat, support)`` with coefficients scattered into a dense
    length-N vector and the support listed in selection order.  A
    rank-deficient selection falls back to pseudo-inverse refits and warns.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    M, N = A.shape
    if y.shape != (M,):
        raise ValueError(f"y must have length {M}, got {y.shape}")
    if config.max_atoms > M:
        raise ValueError("max_atoms must not exceed the number of measurements")

    support: list[int] = []
    selected = np.zeros(N, dtype=bool)
    residual = y.copy()
    x_hat = np.zeros(N)
    coef = np.zeros(0)
    kmax = config.max_atoms
    L = np.zeros((kmax, kmax))  # Cholesky factor of the selected Gram matrix
    aty = np.zeros(kmax)
    degenerate = False

    if np.linalg.norm(residual) <= config.residual_tol:
        return x_hat, support

    for _ in range(kmax):
        corr = A.T @ residual
        corr[selected] = 0.0
        atom = int(np.argmax(np.abs(corr)))
        if corr[atom] == 0.0:
            break  # residual orthogonal to every remaining column
        support.append(atom)
        selected[atom] = True
        k = len(support)
        aty[k - 1] = A[:, atom] @ y

        if not degenerate:
            gram_new = A[:, support].T @ A[:, atom]
            if k == 1:
                ok = gram_new[0] > 1e-13
                if ok:
                    L[0, 0] = np.sqrt(gram_new[0])
            else:
                v = solve_triangular(L[: k - 1, : k - 1], gram_new[: k - 1], lower=True)
                diag2 = gram_new[k - 1] - v @ v
                ok = diag2 > 1e-13
                if ok:
                    L[k - 1, : k - 1] = v
                    L[k - 1, k - 1] = np.sqrt(diag2)
            if not ok:
                degenerate = True
                warnings.warn(
                    "selected OMP submatrix is rank deficient; switching to "
                    "pseudo-inverse refits")

        if degenerate:
            coef, *_ = np.linalg.lstsq(A[:, support], y, rcond=None)
        else:
            z = solve_triangular(L[:k, :k], aty[:k], lower=True)
            coef = solve_triangular(L[:k, :k].T, z, lower=False)

        residual = y - A[:, support] @ coef
        if np.linalg.norm(residual) <= config.residual_tol:
            break

    x_hat[support] = coef
    return x_hat, support


def binarize(x_hat, threshold):
    """{0,1} decision per entry: 1 iff the entry strictly exceeds the cut."""
    return (np.asarray(x_hat, dtype=float) > threshold).astype(float)
