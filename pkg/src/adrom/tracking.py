"""Online basis-update rules for adaptive reduced-order models.

Six rules operate on preprocessed correction snapshots:

* ``isvd_update``     -- incremental SVD with exponential forgetting; the
  basis and its singular values track the dominant left singular subspace
  of the weighted snapshot history. History-aware.
* ``wsvd_update``     -- batch SVD of a rolling snapshot window. History-aware.
* ``direct_update``   -- least-squares fit of the basis to a rolling
  window. History-aware.
* ``onestep_update``  -- rank-one correction eliminating the projection
  error of the latest estimated state. Instantaneous.
* ``oja_update``      -- stochastic-gradient principal subspace step.
  Instantaneous.
* ``grouse_update``   -- rank-one geodesic step on the Grassmann manifold.
  Instantaneous.

Every rule returns a basis with orthonormal columns. Only the iSVD and
windowed-SVD rules maintain the singular values; the others carry the
previous values through unchanged.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import dense
from .dense import DenseError, least_squares, orth

__all__ = [
    "ReducedBasis",
    "SnapshotWindow",
    "UpdateRule",
    "isvd_update",
    "wsvd_update",
    "direct_update",
    "onestep_update",
    "oja_update",
    "grouse_update",
]

#: residual norms below this (relative) threshold take the degenerate branch
DEGENERATE_TOL = 1e-12
#: absolute threshold below which instantaneous updates are skipped
SKIP_TOL = 1e-14


@dataclass(frozen=True)
class ReducedBasis:
    """Orthonormal basis (N x r) plus its r singular values (descending)."""

    phi: np.ndarray
    sigma: np.ndarray

    @property
    def rank(self) -> int:
        return self.phi.shape[1]

    def orthonormality_defect(self) -> float:
        r = self.rank
        return float(np.linalg.norm(self.phi.T @ self.phi - np.eye(r)))


class SnapshotWindow:
    """Ring buffer of the most recent preprocessed snapshots.

    Initialized from the last ``min(capacity, available)`` offline
    snapshots; if the capacity exceeds what the offline stage provides,
    the window starts short and grows as correction snapshots arrive.
    """

    def __init__(self, capacity: int, initial: list[np.ndarray] | None = None):
        if capacity < 1:
            raise ValueError("window capacity must be at least 1")
        self.capacity = int(capacity)
        self._buf: deque[np.ndarray] = deque(maxlen=self.capacity)
        for y in (initial or [])[-self.capacity:]:
            self._buf.append(np.asarray(y, dtype=float))

    def push(self, y_hat: np.ndarray) -> None:
        self._buf.append(np.asarray(y_hat, dtype=float))

    def __len__(self) -> int:
        return len(self._buf)

    @property
    def matrix(self) -> np.ndarray:
        if not self._buf:
            raise ValueError("snapshot window is empty")
        return np.column_stack(list(self._buf))


@dataclass(frozen=True)
class UpdateRule:
    """Which basis-update rule to run, plus its hyperparameter.

    ``kind`` is one of isvd / wsvd / direct / onestep / oja / grouse.
    ``lam`` is the iSVD forgetting factor, ``window`` the rolling-window
    width for wsvd/direct, ``eta`` the learning rate for oja/grouse.
    """

    kind: str
    lam: float = 1.0
    window: int = 8
    eta: float = 0.01

    HISTORY_AWARE = ("isvd", "wsvd", "direct")
    INSTANTANEOUS = ("onestep", "oja", "grouse")

    def __post_init__(self):
        if self.kind not in self.HISTORY_AWARE + self.INSTANTANEOUS:
            raise ValueError(f"unknown update rule {self.kind!r}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("forgetting factor must lie in [0, 1]")
        if self.eta <= 0.0:
            raise ValueError("learning rate must be positive")
        if self.window < 1:
            raise ValueError("window size must be at least 1")

    @property
    def history_aware(self) -> bool:
        return self.kind in self.HISTORY_AWARE

    @property
    def uses_window(self) -> bool:
        return self.kind in ("wsvd", "direct")

    def label(self) -> str:
        if self.kind == "isvd":
            return f"isvd(lambda={self.lam:g})"
        if self.kind in ("wsvd", "direct"):
            return f"{self.kind}(w={self.window})"
        if self.kind == "onestep":
            return "onestep"
        return f"{self.kind}(eta={self.eta:g})"


def isvd_update(basis: ReducedBasis, y_hat: np.ndarray, lam: float, r: int) -> ReducedBasis:
    """Rank-r incremental SVD update with forgetting factor ``lam``.

    The incoming snapshot is split into its in-span coordinates p and the
    orthogonal residual q. The small core matrix

        K = [[lam * Sigma, p],
             [0,           ||q||]]

    is factorized, the augmented basis [Phi, q/||q||] is rotated by the
    left factor, and the result is truncated back to rank r. When the
    residual is negligible relative to the snapshot the last row of K is
    zeroed and the rotation stays inside the existing columns, so an
    in-span snapshot never injects a spurious direction.
    """
    y_hat = np.asarray(y_hat, dtype=float)
    phi, sigma = basis.phi, basis.sigma
    n, r_cur = phi.shape
    if y_hat.shape != (n,):
        raise ValueError(f"snapshot length {y_hat.shape} does not match basis rows {n}")
    p = least_squares(phi, y_hat)
    q = y_hat - phi @ p
    qnorm = float(np.linalg.norm(q))
    ynorm = float(np.linalg.norm(y_hat))

    k = np.zeros((r_cur + 1, r_cur + 1))
    k[:r_cur, :r_cur] = np.diag(lam * sigma)
    k[:r_cur, r_cur] = p
    if qnorm <= DEGENERATE_TOL * max(ynorm, 1e-300):
        q_unit = np.zeros(n)
    else:
        k[r_cur, r_cur] = qnorm
        q_unit = q / qnorm

    core = dense.thin_svd(k)
    aug = np.column_stack([phi, q_unit])
    phi_new = aug @ core.u[:, :r]
    return ReducedBasis(phi=phi_new, sigma=core.s[:r].copy())


def wsvd_update(window: SnapshotWindow, r: int) -> ReducedBasis:
    """Rebuild the basis from scratch: leading r left singular vectors of
    the current window matrix."""
    from .snapshots import pod  # local import to avoid a module cycle

    return pod(window.matrix, r)


def direct_update(basis: ReducedBasis, window: SnapshotWindow) -> ReducedBasis:
    """Fit the basis directly to the window: Phi' = Y (Phi^+ Y)^+, then
    orthonormalize. Singular values are not maintained by this rule."""
    y = window.matrix
    r = basis.rank
    if y.shape[1] < r:
        raise DenseError(f"direct update needs at least {r} window columns, have {y.shape[1]}")
    z = least_squares(basis.phi, y)  # Phi^+ Y, shape (r, w)
    phi_tilde = y @ dense.pinv_cut(z)
    q, rr = np.linalg.qr(phi_tilde)
    rdiag = np.abs(np.diag(rr))
    if rdiag.min() <= 1e-12 * max(rdiag.max(), 1e-300):
        raise DenseError("direct update produced a rank-deficient basis")
    return ReducedBasis(phi=dense.fix_column_signs(q), sigma=basis.sigma.copy())


def onestep_update(basis: ReducedBasis, y_prev_hat: np.ndarray, a_minus: np.ndarray) -> ReducedBasis:
    """Rank-one correction that eliminates the projection error of the
    previous correction snapshot relative to the predicted reduced state.
    Skipped (input returned) when the reduced state is numerically zero."""
    a_minus = np.asarray(a_minus, dtype=float)
    denom = float(np.dot(a_minus, a_minus))
    if denom < SKIP_TOL**2:
        return basis
    resid = np.asarray(y_prev_hat, dtype=float) - basis.phi @ a_minus
    phi_new = orth(basis.phi + np.outer(resid, a_minus) / denom)
    return ReducedBasis(phi=phi_new, sigma=basis.sigma.copy())


def oja_update(basis: ReducedBasis, y_prev_hat: np.ndarray, eta: float) -> ReducedBasis:
    """Oja's stochastic principal-subspace step followed by
    orthonormalization."""
    y = np.asarray(y_prev_hat, dtype=float)
    phi_new = orth(basis.phi + eta * np.outer(y, y @ basis.phi))
    return ReducedBasis(phi=phi_new, sigma=basis.sigma.copy())


def grouse_update(basis: ReducedBasis, y_prev_hat: np.ndarray, eta: float) -> ReducedBasis:
    """Rank-one geodesic update on the Grassmann manifold.

    The geodesic direction is undefined when the snapshot has no in-span
    component, no residual, or zero coefficients; those cases skip the
    update. The cos/sin form keeps the columns orthonormal without an
    explicit re-orthonormalization pass.
    """
    y = np.asarray(y_prev_hat, dtype=float)
    w = least_squares(basis.phi, y)
    p = basis.phi @ w
    resid = y - p
    pnorm = float(np.linalg.norm(p))
    rnorm = float(np.linalg.norm(resid))
    wnorm = float(np.linalg.norm(w))
    if min(pnorm, rnorm, wnorm) < SKIP_TOL:
        return basis
    alpha = eta * pnorm * rnorm
    step = (np.cos(alpha) - 1.0) * p / pnorm + np.sin(alpha) * resid / rnorm
    phi_new = basis.phi + np.outer(step, w / wnorm)
    return ReducedBasis(phi=phi_new, sigma=basis.sigma.copy())
