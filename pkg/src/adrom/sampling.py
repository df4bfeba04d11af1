"""Hyper-reduction sampling: QDEIM, feature-guided sampling, and the gappy
reconstruction operator.

Sampling indices are full-state row indices. The stencil closure is the
superset of rows whose values are needed to evaluate the model rhs at the
sampled rows (one cell of padding, all variables per cell).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dense import DenseError, thin_svd, SVD_CUTOFF
from .fom import FomProblem
from .tracking import ReducedBasis

__all__ = [
    "SamplingSet",
    "FeatureMap",
    "qdeim_sample",
    "fgs_sample",
    "build_deim_operator",
    "stencil_closure",
]


@dataclass(frozen=True)
class SamplingSet:
    """Ordered distinct sampled rows plus their stencil closure."""

    indices: np.ndarray
    closure: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        clo = np.asarray(self.closure, dtype=int)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "closure", clo)
        if len(np.unique(idx)) != idx.size:
            raise ValueError("sampling indices must be distinct")
        if not np.all(np.isin(idx, clo)):
            raise ValueError("closure must contain every sampled index")

    @property
    def n_samples(self) -> int:
        return int(self.indices.size)


@dataclass(frozen=True)
class FeatureMap:
    """Per-cell scalar feature used for physics-guided oversampling.

    ``kind`` selects a built-in extractor ('pressure-gradient' or
    'velocity-gradient') or a callable mapping a full state to one scalar
    per cell. ``n_extra`` is the number of feature-guided rows.
    """

    kind: str | Callable[[np.ndarray], np.ndarray] = "pressure-gradient"
    n_extra: int = 0

    def extract(self, model: FomProblem, q: np.ndarray) -> np.ndarray:
        if callable(self.kind):
            return np.asarray(self.kind(q), dtype=float)
        fields = model.primitive_fields(q)
        if self.kind == "pressure-gradient":
            key = "p" if "p" in fields else model.var_names[0]
        elif self.kind == "velocity-gradient":
            key = "v" if "v" in fields else model.var_names[0]
        else:
            raise ValueError(f"unknown feature map {self.kind!r}")
        return fields[key]


def _pivot_sequence(mat: np.ndarray, count: int) -> list[int]:
    """First ``count`` pivots of a restarted column-pivoted QR.

    One pass of pivoted QR on an r x N matrix yields at most r meaningful
    pivots; if more are requested the already-chosen columns are removed
    and the factorization restarts on the remainder.
    """
    import scipy.linalg

    n_cols = mat.shape[1]
    if count > n_cols:
        raise DenseError(f"cannot select {count} pivots from {n_cols} columns")
    chosen: list[int] = []
    remaining = np.arange(n_cols)
    while len(chosen) < count:
        sub = mat[:, remaining]
        _, r, piv = scipy.linalg.qr(sub, mode="economic", pivoting=True)
        rdiag = np.abs(np.diag(r))
        take = min(count - len(chosen), rdiag.size)
        for j in range(take):
            if rdiag[j] < 1e-14:
                raise DenseError(
                    f"rank deficiency at pivot step {len(chosen) + j} "
                    f"(residual column norm {rdiag[j]:.3e})"
                )
            chosen.append(int(remaining[piv[j]]))
        remaining = np.setdiff1d(remaining, np.array(chosen, dtype=int), assume_unique=False)
    return chosen


def qdeim_sample(basis: ReducedBasis, n_s: int) -> SamplingSet:
    """Sampling rows from column-pivoted QR of the basis transpose.

    The first r pivots are the classical interpolation points; extra
    points beyond r continue the pivoting on the unchosen columns.
    """
    idx = np.array(_pivot_sequence(basis.phi.T, n_s), dtype=int)
    return SamplingSet(indices=idx, closure=np.unique(idx))


def fgs_sample(basis: ReducedBasis, y_corr: np.ndarray, n_s: int,
               feature: FeatureMap, model: FomProblem) -> SamplingSet:
    """QDEIM points augmented with rows where the feature gradient of the
    estimated future state is strongest.

    The first ``n_s - n_extra`` rows come from QDEIM. Cells are then
    ranked by central-difference gradient magnitude of the feature field
    (one-sided at the boundaries, ties broken toward the lowest cell
    index) and each selected cell contributes the rows of all its
    variables, skipping rows already present, until exactly ``n_extra``
    rows have been added.
    """
    if feature.n_extra > n_s:
        raise ValueError("n_extra cannot exceed the total number of sampling points")
    n_base = n_s - feature.n_extra
    base = list(_pivot_sequence(basis.phi.T, n_base)) if n_base > 0 else []

    theta = feature.extract(model, y_corr)
    grad = np.empty_like(theta)
    grad[1:-1] = (theta[2:] - theta[:-2]) / (2.0 * model.dx)
    grad[0] = (theta[1] - theta[0]) / model.dx
    grad[-1] = (theta[-1] - theta[-2]) / model.dx
    order = np.lexsort((np.arange(theta.size), -np.abs(grad)))

    chosen = list(base)
    have = set(chosen)
    budget = feature.n_extra
    for cell in order:
        if budget == 0:
            break
        for v in range(model.n_var):
            row = int(cell) * model.n_var + v
            if row in have:
                continue
            chosen.append(row)
            have.add(row)
            budget -= 1
            if budget == 0:
                break
    if budget > 0:
        raise DenseError("not enough distinct rows to satisfy the sampling budget")
    idx = np.array(chosen, dtype=int)
    return SamplingSet(indices=idx, closure=np.unique(idx))


def build_deim_operator(basis: ReducedBasis, sampling: SamplingSet) -> np.ndarray:
    """Pseudo-inverse of the sampled basis rows, shape (r, n_s).

    Composing with the sampled entries of a scaled nonlinear term gives
    its gappy reconstruction coefficients in the basis.
    """
    sampled = basis.phi[sampling.indices, :]
    res = thin_svd(sampled)
    smax = res.s[0]
    if res.s[-1] <= SVD_CUTOFF * smax:
        raise DenseError(
            f"sampled basis is rank deficient (smallest singular value {res.s[-1]:.3e})"
        )
    return (res.v / res.s) @ res.u.T


def stencil_closure(sampling: SamplingSet, model: FomProblem) -> SamplingSet:
    """Expand a sampling set with the rows needed to evaluate the rhs at
    the sampled rows: every variable at the sampled cells and their
    immediate neighbors (wrapped for periodic models, clamped otherwise).
    """
    nv = model.n_var
    cells = np.unique(sampling.indices // nv)
    left, right = model.neighbor_cells(cells)
    all_cells = np.unique(np.concatenate([left, cells, right]))
    rows = (all_cells[:, None] * nv + np.arange(nv)[None, :]).ravel()
    closure = np.unique(np.concatenate([rows, sampling.indices]))
    return SamplingSet(indices=sampling.indices, closure=closure)
