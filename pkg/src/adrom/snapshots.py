"""Snapshot preprocessing and batch POD initialization.

States are centered on a reference state (the first snapshot of the
training window, i.e. the initial solution) and scaled by a per-variable
diagonal so that different physical variables have comparable magnitude.
The scale of variable v is the mean over training snapshots and cells of
the squared centered field, applied as a block-diagonal matrix with one
identical diagonal block per cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import DenseError, fix_column_signs, thin_svd
from .tracking import ReducedBasis

__all__ = ["ScalingTransform", "fit_scaling", "pod"]

#: variance floor; variables at the floor scale by exactly one
VAR_FLOOR = 1e-30


@dataclass(frozen=True)
class ScalingTransform:
    """Reference state plus per-variable characteristic magnitudes.

    ``row_scale`` holds the diagonal of the scaling matrix expanded to the
    interleaved state layout, so preprocessing is
    ``y_hat = row_scale * (q - q_ref)`` and lifting inverts it exactly.
    """

    q_ref: np.ndarray
    phi_norm: np.ndarray

    @property
    def n_var(self) -> int:
        return self.phi_norm.size

    @property
    def row_scale(self) -> np.ndarray:
        n_elem = self.q_ref.size // self.n_var
        return np.tile(1.0 / self.phi_norm, n_elem)

    def preprocess(self, q: np.ndarray) -> np.ndarray:
        return self.row_scale * (q - self.q_ref)

    def lift(self, y_hat: np.ndarray) -> np.ndarray:
        return self.q_ref + y_hat / self.row_scale


def fit_scaling(training: list[np.ndarray], n_var: int) -> ScalingTransform:
    """Reference state and per-variable scales from training snapshots.

    The reference is the first snapshot. Degenerate variables whose mean
    squared fluctuation hits the floor scale by one instead of dividing
    by (near) zero.
    """
    if len(training) < 1:
        raise ValueError("need at least one training snapshot")
    q_ref = np.asarray(training[0], dtype=float).copy()
    fluct = np.stack([np.asarray(q, dtype=float) - q_ref for q in training])
    per_var = fluct.reshape(len(training), -1, n_var) ** 2
    phi_norm = per_var.mean(axis=(0, 1))
    phi_norm = np.maximum(phi_norm, VAR_FLOOR)
    phi_norm[phi_norm <= VAR_FLOOR] = 1.0
    return ScalingTransform(q_ref=q_ref, phi_norm=phi_norm)


def pod(snapshots: np.ndarray, r: int) -> ReducedBasis:
    """Leading r left singular vectors/values of a preprocessed snapshot
    matrix (one snapshot per column). Fails if r exceeds the numerical
    rank. Column signs are fixed so the largest-magnitude entry of each
    mode is nonnegative."""
    snapshots = np.asarray(snapshots, dtype=float)
    if snapshots.ndim != 2:
        raise ValueError("snapshot matrix must be 2-d (one column per snapshot)")
    if r > min(snapshots.shape):
        raise DenseError(
            f"cannot extract {r} modes from a {snapshots.shape[0]}x{snapshots.shape[1]} matrix"
        )
    res = thin_svd(snapshots)
    rank = int(np.sum(res.s > 1e-12 * res.s[0])) if res.s[0] > 0 else 0
    if r > rank:
        raise DenseError(f"requested {r} modes but snapshot matrix has numerical rank {rank}")
    phi = fix_column_signs(res.u[:, :r])
    return ReducedBasis(phi=phi, sigma=res.s[:r].copy())
