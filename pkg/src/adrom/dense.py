"""Dense linear-algebra and root-finding kernels.

All matrices are plain ``numpy.ndarray`` objects in row-major (C) order.
Problem sizes in this package are small (N up to a few thousand, reduced
dimensions up to a few dozen), so everything is dense and backed by LAPACK
through numpy/scipy. Kernels reject non-finite input rather than letting
NaN/Inf propagate silently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

__all__ = [
    "SvdResult",
    "NewtonResult",
    "DenseError",
    "thin_svd",
    "pivoted_qr",
    "least_squares",
    "principal_angles",
    "newton_solve",
    "orth",
]

#: relative singular-value cutoff used for every pseudo-inverse in the package
SVD_CUTOFF = 1e-12


class DenseError(RuntimeError):
    """Raised when a dense kernel cannot produce a usable result."""


def _require_finite(name: str, a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise DenseError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class SvdResult:
    """Economy-size SVD, singular values sorted descending.

    ``u`` and ``v`` have orthonormal columns; ``u @ np.diag(s) @ v.T``
    reconstructs the input.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def thin_svd(a: np.ndarray) -> SvdResult:
    """Economy-size singular value decomposition of a dense matrix."""
    a = _require_finite("thin_svd input", a)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DenseError(f"thin_svd expects a non-empty 2-d array, got shape {a.shape}")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        # LAPACK's iterative kernel gave up; it does not expose the sweep
        # count, so report the failure with the matrix shape instead.
        raise DenseError(
            f"SVD did not converge for {a.shape[0]}x{a.shape[1]} input: {exc}"
        ) from exc
    return SvdResult(u=u, s=s, v=vt.T)


def pivoted_qr(a: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Greedy column-pivoted QR; returns the first ``k`` pivot columns.

    At each step the remaining column of largest 2-norm is selected
    (LAPACK ``geqp3``). Fails if the residual columns degenerate before
    ``k`` pivots have been found.
    """
    a = _require_finite("pivoted_qr input", a)
    if k > a.shape[1]:
        raise DenseError(f"requested {k} pivots from a matrix with {a.shape[1]} columns")
    q, r, piv = scipy.linalg.qr(a, mode="economic", pivoting=True)
    rdiag = np.abs(np.diag(r))
    for j in range(min(k, rdiag.size)):
        if rdiag[j] < 1e-14:
            raise DenseError(
                f"pivoted_qr: rank deficient at pivot step {j} "
                f"(residual column norm {rdiag[j]:.3e})"
            )
    if k > rdiag.size:
        raise DenseError(
            f"pivoted_qr: matrix has at most rank {rdiag.size}, cannot select {k} pivots"
        )
    return piv[:k].copy(), q, r


def least_squares(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimizer of ``||a x - b||_2`` for a tall (rows >= cols) matrix.

    Rank-deficient systems get the minimum-norm solution with singular
    values below ``SVD_CUTOFF * s_max`` discarded.
    """
    a = _require_finite("least_squares matrix", a)
    b = _require_finite("least_squares rhs", b)
    if a.shape[0] < a.shape[1]:
        raise DenseError(f"least_squares expects rows >= cols, got shape {a.shape}")
    x, _, _, _ = np.linalg.lstsq(a, b, rcond=SVD_CUTOFF)
    return x


def principal_angles(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Canonical angles (ascending, radians) between two column spans.

    Both inputs must have orthonormal columns and the same row count. The
    angles are the arccosines of the singular values of ``u.T @ v``
    (clamped into [0, 1]); small angles are evaluated through the
    sine-based branch so they are not flattened to sqrt(eps).
    """
    u = _require_finite("principal_angles U", u)
    v = _require_finite("principal_angles V", v)
    if u.shape[0] != v.shape[0]:
        raise DenseError(f"row mismatch: {u.shape} vs {v.shape}")
    return np.sort(scipy.linalg.subspace_angles(u, v))


@dataclass
class NewtonResult:
    """Outcome of a dense Newton solve; ``converged`` is False after
    ``max_iter`` steps without meeting the tolerance."""

    x: np.ndarray
    converged: bool
    iterations: int
    residual_norm: float


def newton_solve(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    tol: float,
    max_iter: int,
) -> NewtonResult:
    """Dense Newton iteration; each step solves ``J d = -r`` by LU with
    partial pivoting. A singular Jacobian raises; running out of
    iterations returns the last iterate flagged as non-converged."""
    if tol <= 0:
        raise DenseError("newton_solve requires tol > 0")
    x = np.asarray(x0, dtype=float).copy()
    r = _require_finite("newton residual", residual(x))
    rnorm = float(np.linalg.norm(r))
    for it in range(max_iter):
        if rnorm <= tol:
            return NewtonResult(x=x, converged=True, iterations=it, residual_norm=rnorm)
        jac = _require_finite("newton jacobian", jacobian(x))
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                lu, piv = scipy.linalg.lu_factor(jac)
        except np.linalg.LinAlgError as exc:
            raise DenseError(f"singular Jacobian at Newton iteration {it}") from exc
        if not np.all(np.isfinite(lu)) or np.any(np.abs(np.diag(lu)) == 0.0):
            raise DenseError(f"singular Jacobian at Newton iteration {it}")
        x = x + scipy.linalg.lu_solve((lu, piv), -r)
        r = _require_finite("newton residual", residual(x))
        rnorm = float(np.linalg.norm(r))
    converged = rnorm <= tol
    return NewtonResult(x=x, converged=converged, iterations=max_iter, residual_norm=rnorm)


def orth(a: np.ndarray) -> np.ndarray:
    """Thin-QR orthonormalization with a deterministic sign convention:
    the largest-magnitude entry of each column is made nonnegative."""
    a = _require_finite("orth input", a)
    q, _ = np.linalg.qr(a)
    return fix_column_signs(q)


def fix_column_signs(q: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude entry of each column is
    nonnegative (deterministic basis representative)."""
    q = np.array(q, dtype=float)
    lead = np.abs(q).argmax(axis=0)
    signs = np.sign(q[lead, np.arange(q.shape[1])])
    signs[signs == 0] = 1.0
    return q * signs


def pinv_cut(a: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with the package-wide singular value
    cutoff ``SVD_CUTOFF * s_max``."""
    res = thin_svd(a)
    smax = res.s[0] if res.s.size else 0.0
    keep = res.s > SVD_CUTOFF * smax
    inv = np.zeros_like(res.s)
    inv[keep] = 1.0 / res.s[keep]
    return (res.v * inv) @ res.u.T
