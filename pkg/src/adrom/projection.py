"""Reduced time stepping: encode/decode between full and reduced
coordinates, a hyper-reduced Galerkin backward-Euler step, and a
hyper-reduced least-squares discrete-residual minimization step.

The operator caches everything needed to advance the reduced state while
touching only the stencil closure of the sampling set, so the per-step
cost scales with the number of sampling points rather than the full
dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fom import FD_EPS, FomProblem, SamplingPlan
from .sampling import SamplingSet, build_deim_operator
from .snapshots import ScalingTransform
from .tracking import ReducedBasis

__all__ = [
    "ReducedState",
    "RomOperator",
    "RomStepResult",
    "RomStepError",
    "build_rom_operator",
    "encode",
    "decode",
    "galerkin_step",
    "lspg_step",
    "rom_step",
    "lspg_objective",
]


class RomStepError(RuntimeError):
    """Raised when a reduced step cannot be computed (degenerate operator)."""


@dataclass(frozen=True)
class ReducedState:
    """Reduced coordinates plus the fine time-step index they belong to."""

    a: np.ndarray
    n: int = 0


@dataclass(frozen=True)
class RomStepResult:
    state: ReducedState
    converged: bool
    iterations: int
    residual_norm: float


class RomOperator:
    """Projection operator bundle: basis, scaling, sampling, and the gappy
    reconstruction matrix, with closure-restricted gather caches."""

    def __init__(self, basis: ReducedBasis, scaling: ScalingTransform,
                 sampling: SamplingSet, model: FomProblem, kind: str):
        if kind not in ("galerkin", "lspg"):
            raise ValueError(f"unknown projection kind {kind!r}")
        self.basis = basis
        self.scaling = scaling
        self.sampling = sampling
        self.kind = kind
        self.deim_pinv = build_deim_operator(basis, sampling)  # (r, n_s)
        self.plan: SamplingPlan = model.sampling_plan(sampling)

        d = scaling.row_scale
        idx = sampling.indices
        clo = sampling.closure
        self.d_sampled = d[idx]
        self.q_ref_closure = scaling.q_ref[clo]
        self.dinv_phi_closure = basis.phi[clo, :] / d[clo][:, None]
        self.phi_sampled = basis.phi[idx, :]
        # positions of the sampled rows inside the closure array
        self.sample_pos = np.searchsorted(clo, idx)

    @property
    def rank(self) -> int:
        return self.basis.rank

    def decode_closure(self, a: np.ndarray) -> np.ndarray:
        return self.q_ref_closure + self.dinv_phi_closure @ a


def build_rom_operator(basis: ReducedBasis, scaling: ScalingTransform,
                       sampling: SamplingSet, model: FomProblem,
                       kind: str) -> RomOperator:
    return RomOperator(basis, scaling, sampling, model, kind)


def encode(q: np.ndarray, op: RomOperator, n: int = 0) -> ReducedState:
    """Project a full state onto the trial subspace in scaled coordinates."""
    y_hat = op.scaling.preprocess(np.asarray(q, dtype=float))
    return ReducedState(a=op.basis.phi.T @ y_hat, n=n)


def decode(state: ReducedState, op: RomOperator) -> np.ndarray:
    """Lift reduced coordinates back to the full state space."""
    return op.scaling.lift(op.basis.phi @ state.a)


def _fd_steps(a: np.ndarray) -> np.ndarray:
    return FD_EPS * np.maximum(1.0, np.abs(a))


def galerkin_step(op: RomOperator, model: FomProblem, state: ReducedState,
                  dt: float, tol: float = 1e-8, max_iter: int = 10) -> RomStepResult:
    """Backward-Euler step of the hyper-reduced Galerkin system.

    Solves a' = a + dt * (P^T Phi)^+ P^T D f(decode(a')) by Newton on the
    r-dimensional residual; the nonlinear term is evaluated only at the
    sampled rows from closure-restricted state values.
    """
    a0 = state.a

    def reduced_rhs(a):
        qc = op.decode_closure(a)
        return op.deim_pinv @ (op.d_sampled * op.plan.evaluate(qc))

    r = op.rank
    a = a0.copy()
    g = a - a0 - dt * reduced_rhs(a)
    gnorm = float(np.linalg.norm(g))
    it = 0
    while gnorm > tol and it < max_iter:
        h = _fd_steps(a)
        jac = np.eye(r)
        f_a = reduced_rhs(a)
        for j in range(r):
            ap = a.copy()
            ap[j] += h[j]
            jac[:, j] -= dt * (reduced_rhs(ap) - f_a) / h[j]
        try:
            delta = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError as exc:
            raise RomStepError(f"singular reduced Jacobian at iteration {it}") from exc
        a = a + delta
        g = a - a0 - dt * reduced_rhs(a)
        gnorm = float(np.linalg.norm(g))
        it += 1
    return RomStepResult(state=ReducedState(a=a, n=state.n + 1),
                         converged=gnorm <= tol, iterations=it, residual_norm=gnorm)


def _sampled_scaled_residual(op: RomOperator, a: np.ndarray,
                             prev_sampled: np.ndarray, dt: float) -> np.ndarray:
    """Sampled rows of D r^n at the trial state with coordinates ``a``."""
    qc = op.decode_closure(a)
    fs = op.plan.evaluate(qc)
    return op.d_sampled * (qc[op.sample_pos] - prev_sampled - dt * fs)


def lspg_step(op: RomOperator, model: FomProblem, state: ReducedState,
              dt: float, tol: float = 1e-8, max_iter: int = 10) -> RomStepResult:
    """Gauss-Newton minimization of the gappy-projected backward-Euler
    residual over the trial manifold.

    The Gauss-Newton Jacobian uses the sampled rows of the state-dependent
    test basis (I - dt D J_f D^-1) Phi, with the directional derivatives
    of the nonlinear term taken by finite differences along the decoded
    basis directions. Converges when the reduced gradient norm drops below
    ``tol`` or after ``max_iter`` iterations.
    """
    a_prev = state.a
    prev_sampled = op.decode_closure(a_prev)[op.sample_pos]
    r = op.rank

    a = a_prev.copy()
    it = 0
    grad_norm = np.inf
    while it < max_iter:
        qc = op.decode_closure(a)
        fs = op.plan.evaluate(qc)
        res_s = op.d_sampled * (qc[op.sample_pos] - prev_sampled - dt * fs)
        rho = op.deim_pinv @ res_s

        h = _fd_steps(a)
        dfs = np.empty((op.sampling.n_samples, r))
        for j in range(r):
            dfs[:, j] = (op.plan.evaluate(qc + h[j] * op.dinv_phi_closure[:, j]) - fs) / h[j]
        test_sampled = op.phi_sampled - dt * (op.d_sampled[:, None] * dfs)
        jac = op.deim_pinv @ test_sampled

        grad = jac.T @ rho
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= tol:
            break
        sv = np.linalg.svd(jac, compute_uv=False)
        if sv[-1] <= 1e-14 * sv[0]:
            raise RomStepError(
                f"rank-deficient sampled Jacobian at iteration {it} "
                f"(condition number {sv[0] / max(sv[-1], 1e-300):.3e})"
            )
        delta, *_ = np.linalg.lstsq(jac, -rho, rcond=1e-12)
        a = a + delta
        it += 1
    return RomStepResult(state=ReducedState(a=a, n=state.n + 1),
                         converged=grad_norm <= tol, iterations=it,
                         residual_norm=grad_norm)


def lspg_objective(op: RomOperator, state_prev: ReducedState, a: np.ndarray,
                   dt: float) -> float:
    """Value of the hyper-reduced least-squares objective at coordinates
    ``a`` given the previous reduced state; the quantity lspg_step
    minimizes."""
    prev_sampled = op.decode_closure(state_prev.a)[op.sample_pos]
    rho = op.deim_pinv @ _sampled_scaled_residual(op, a, prev_sampled, dt)
    return float(rho @ rho)


def rom_step(op: RomOperator, model: FomProblem, state: ReducedState,
             dt: float, tol: float = 1e-8, max_iter: int = 10) -> RomStepResult:
    if op.kind == "galerkin":
        return galerkin_step(op, model, state, dt, tol=tol, max_iter=max_iter)
    return lspg_step(op, model, state, dt, tol=tol, max_iter=max_iter)
