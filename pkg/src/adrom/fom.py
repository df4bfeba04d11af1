"""Full-order models: 1D viscous Burgers and the 1D Euler Sod shock tube.

Both models expose the same surface: a semi-discrete right-hand side
``rhs(q)`` for the state layout ``q[cell * n_var + var]`` (variables
interleaved per cell), a finite-difference Jacobian, and implicit
backward-Euler stepping at a fine step ``dt`` or a coarse step ``z * dt``.

The Burgers convective term uses first-order sign-dependent upwinding in
non-conservative form with a centered second-order diffusive term and
periodic boundaries. The Euler model is a cell-centered finite-volume
scheme with a Rusanov (local Lax-Friedrichs) interface flux and
zero-gradient ghost cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import NewtonResult, newton_solve

__all__ = [
    "TimeStepper",
    "FomProblem",
    "BurgersProblem",
    "SodProblem",
    "rusanov_flux",
    "fd_jacobian",
    "implicit_step",
    "coarse_step",
    "sod_initial_state",
]

#: density/pressure floor enforced during primitive recovery
PRIM_FLOOR = 1e-10

#: finite-difference perturbation scale for Jacobian columns
FD_EPS = 1e-7


@dataclass(frozen=True)
class TimeStepper:
    """Backward-Euler settings (one-step, beta0 = 1 member of the
    linear-multistep family)."""

    dt: float
    newton_tol: float = 1e-8
    newton_max_iter: int = 10

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")


class FomProblem:
    """Common machinery shared by the concrete models.

    Subclasses set ``n_var``, ``boundary`` ('periodic' or 'zero-gradient')
    and implement ``rhs`` plus the gather-based sampled evaluation used by
    hyper-reduced stepping. The stencil radius is one cell for both models.
    """

    n_var: int = 1
    boundary: str = "periodic"
    stencil_radius: int = 1
    var_names: tuple[str, ...] = ()

    def __init__(self, n_elem: int, length: float = 1.0):
        if n_elem < 4:
            raise ValueError("n_elem must be at least 4")
        self.n_elem = int(n_elem)
        self.length = float(length)
        self.dx = self.length / self.n_elem

    @property
    def n_dof(self) -> int:
        return self.n_var * self.n_elem

    @property
    def cell_centers(self) -> np.ndarray:
        return (np.arange(self.n_elem) + 0.5) * self.dx

    def rhs(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def initial_state(self) -> np.ndarray:
        raise NotImplementedError

    # -- stencil topology ------------------------------------------------

    def neighbor_cells(self, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Left/right neighbor cell indices with the model's boundary rule."""
        cells = np.asarray(cells, dtype=int)
        if self.boundary == "periodic":
            return (cells - 1) % self.n_elem, (cells + 1) % self.n_elem
        return np.maximum(cells - 1, 0), np.minimum(cells + 1, self.n_elem - 1)

    def sampling_plan(self, sampling) -> "SamplingPlan":
        """Precompute the gather pattern for evaluating the rhs at the
        sampled rows from closure values only."""
        return SamplingPlan(self, sampling)

    def rhs_at_cells(self, gathered: np.ndarray) -> np.ndarray:
        """Rhs at k cells given gathered stencil values.

        ``gathered`` has shape (k, 3, n_var): state at (left, center,
        right) neighbor cells of each requested cell. Returns (k, n_var).
        """
        raise NotImplementedError

    # -- diagnostics ------------------------------------------------------

    def primitive_fields(self, q: np.ndarray) -> dict[str, np.ndarray]:
        """Named per-cell fields used for error reporting and profiles."""
        raise NotImplementedError


class SamplingPlan:
    """Gather pattern mapping closure-row values to sampled rhs entries.

    The plan depends only on the sampling set and the model topology, so
    the hyper-reduced steps never touch state entries outside the stencil
    closure.
    """

    def __init__(self, model: FomProblem, sampling):
        self.model = model
        self.closure = np.asarray(sampling.closure, dtype=int)
        nv = model.n_var
        cells = np.unique(np.asarray(sampling.indices, dtype=int) // nv)
        left, right = model.neighbor_cells(cells)
        pos = {int(row): i for i, row in enumerate(self.closure)}

        def rows_of(cs):
            try:
                return np.array(
                    [[pos[int(c) * nv + v] for v in range(nv)] for c in cs], dtype=int
                )
            except KeyError as exc:
                raise ValueError(
                    "sampling closure is missing required stencil rows; "
                    "expand it with stencil_closure() first"
                ) from exc

        self._cells = cells
        self._gather = np.stack([rows_of(left), rows_of(cells), rows_of(right)], axis=1)
        # position of each sampled row inside the per-cell rhs block
        cell_pos = {int(c): i for i, c in enumerate(cells)}
        idx = np.asarray(sampling.indices, dtype=int)
        self._out_cell = np.array([cell_pos[int(i) // nv] for i in idx], dtype=int)
        self._out_var = idx % nv

    def evaluate(self, closure_values: np.ndarray) -> np.ndarray:
        """Rhs values at the sampled rows; input is state at closure rows."""
        gathered = closure_values[self._gather]  # (k, 3, n_var)
        per_cell = self.model.rhs_at_cells(gathered)
        return per_cell[self._out_cell, self._out_var]


class BurgersProblem(FomProblem):
    """Viscous Burgers on [0, L] with periodic boundaries."""

    n_var = 1
    boundary = "periodic"
    var_names = ("u",)

    def __init__(self, n_elem: int, nu: float = 0.01, length: float = 1.0,
                 ic_width: float = 0.1):
        super().__init__(n_elem, length)
        if nu <= 0:
            raise ValueError("viscosity must be positive")
        self.nu = float(nu)
        self.ic_width = float(ic_width)

    def initial_state(self) -> np.ndarray:
        x = self.cell_centers
        return np.exp(-0.5 * ((x - 0.5 * self.length) / self.ic_width) ** 2)

    def rhs(self, q: np.ndarray) -> np.ndarray:
        u = q
        um = np.roll(u, 1)
        up = np.roll(u, -1)
        back = (u - um) / self.dx
        fwd = (up - u) / self.dx
        conv = -u * np.where(u > 0.0, back, fwd)
        diff = self.nu * (um - 2.0 * u + up) / self.dx**2
        return conv + diff

    def rhs_at_cells(self, gathered: np.ndarray) -> np.ndarray:
        um = gathered[:, 0, 0]
        u = gathered[:, 1, 0]
        up = gathered[:, 2, 0]
        back = (u - um) / self.dx
        fwd = (up - u) / self.dx
        conv = -u * np.where(u > 0.0, back, fwd)
        diff = self.nu * (um - 2.0 * u + up) / self.dx**2
        return (conv + diff)[:, None]

    def primitive_fields(self, q: np.ndarray) -> dict[str, np.ndarray]:
        return {"u": q}


def _euler_primitives(u_cells: np.ndarray, gamma: float):
    """Primitive recovery with floors on density and pressure."""
    rho = np.maximum(u_cells[..., 0], PRIM_FLOOR)
    vel = u_cells[..., 1] / rho
    p = (gamma - 1.0) * (u_cells[..., 2] - 0.5 * rho * vel**2)
    p = np.maximum(p, PRIM_FLOOR)
    return rho, vel, p


def _euler_flux(u_cells: np.ndarray, gamma: float) -> np.ndarray:
    rho, vel, p = _euler_primitives(u_cells, gamma)
    f = np.empty_like(u_cells)
    f[..., 0] = u_cells[..., 1]
    f[..., 1] = u_cells[..., 1] * vel + p
    f[..., 2] = vel * (u_cells[..., 2] + p)
    return f


def rusanov_flux(ul: np.ndarray, ur: np.ndarray, gamma: float) -> np.ndarray:
    """Local Lax-Friedrichs interface flux for the 1D Euler equations.

    Accepts single conserved triplets or batches with shape (..., 3).
    The dissipation speed is max(|u|+c) over the two sides with
    c = sqrt(gamma p / rho).
    """
    ul = np.asarray(ul, dtype=float)
    ur = np.asarray(ur, dtype=float)
    rho_l, v_l, p_l = _euler_primitives(ul, gamma)
    rho_r, v_r, p_r = _euler_primitives(ur, gamma)
    c_l = np.sqrt(gamma * p_l / rho_l)
    c_r = np.sqrt(gamma * p_r / rho_r)
    s = np.maximum(np.abs(v_l) + c_l, np.abs(v_r) + c_r)
    return 0.5 * (_euler_flux(ul, gamma) + _euler_flux(ur, gamma)) - 0.5 * s[..., None] * (ur - ul)


def sod_initial_state(n_elem: int, gamma: float = 1.4) -> np.ndarray:
    """Standard Sod Riemann data as an interleaved conserved state."""
    x = (np.arange(n_elem) + 0.5) / n_elem
    rho = np.where(x < 0.5, 1.0, 0.125)
    p = np.where(x < 0.5, 1.0, 0.1)
    u = np.zeros(n_elem)
    cons = np.stack([rho, rho * u, p / (gamma - 1.0) + 0.5 * rho * u**2], axis=1)
    return cons.ravel()


class SodProblem(FomProblem):
    """1D Euler equations on [0, 1], Sod shock tube setup."""

    n_var = 3
    boundary = "zero-gradient"
    var_names = ("rho", "v", "p")

    def __init__(self, n_elem: int, gamma: float = 1.4, length: float = 1.0):
        super().__init__(n_elem, length)
        if gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        self.gamma = float(gamma)

    def initial_state(self) -> np.ndarray:
        return sod_initial_state(self.n_elem, self.gamma)

    def rhs(self, q: np.ndarray) -> np.ndarray:
        u = q.reshape(self.n_elem, 3)
        padded = np.concatenate([u[:1], u, u[-1:]], axis=0)  # ghost copies
        fhat = rusanov_flux(padded[:-1], padded[1:], self.gamma)
        return (-(fhat[1:] - fhat[:-1]) / self.dx).ravel()

    def rhs_at_cells(self, gathered: np.ndarray) -> np.ndarray:
        left = gathered[:, 0, :]
        mid = gathered[:, 1, :]
        right = gathered[:, 2, :]
        f_lo = rusanov_flux(left, mid, self.gamma)
        f_hi = rusanov_flux(mid, right, self.gamma)
        return -(f_hi - f_lo) / self.dx

    def primitive_fields(self, q: np.ndarray) -> dict[str, np.ndarray]:
        u = q.reshape(self.n_elem, 3)
        rho, vel, p = _euler_primitives(u, self.gamma)
        return {"rho": rho, "v": vel, "p": p}


def _stencil_phases(model: FomProblem) -> list[np.ndarray]:
    """Cell groups that can be perturbed simultaneously in one FD rhs
    evaluation: same-group cells are at (cyclic) distance > 2 so their
    stencils never overlap. Mod-3 striping plus a tail fix-up for periodic
    grids whose size is not a multiple of three."""
    n = model.n_elem
    phase = np.arange(n) % 3
    if model.boundary == "periodic" and n % 3 != 0:
        if n % 3 == 1:
            phase[n - 1] = 3
        else:  # n % 3 == 2
            phase[n - 2] = 3
            phase[n - 1] = 4
    return [np.nonzero(phase == p)[0] for p in range(int(phase.max()) + 1)]


def fd_jacobian(model: FomProblem, q: np.ndarray, rhs0: np.ndarray | None = None) -> np.ndarray:
    """Dense finite-difference Jacobian of ``model.rhs`` at ``q``.

    Column j uses the one-sided difference (rhs(q + e_j eps_j) - rhs(q)) /
    eps_j with eps_j = 1e-7 * max(1, |q_j|). Columns whose stencils cannot
    interact are evaluated together; the assembled matrix is entry-for-entry
    identical to perturbing one column at a time because the rhs at a given
    row depends only on state within one cell of that row.
    """
    q = np.asarray(q, dtype=float)
    n = model.n_dof
    nv = model.n_var
    f0 = model.rhs(q) if rhs0 is None else rhs0
    jac = np.zeros((n, n))
    all_cells = np.arange(model.n_elem)
    left_all, right_all = model.neighbor_cells(all_cells)
    eps = FD_EPS * np.maximum(1.0, np.abs(q))
    for cells in _stencil_phases(model):
        for v in range(nv):
            cols = cells * nv + v
            qp = q.copy()
            qp[cols] += eps[cols]
            df = model.rhs(qp) - f0
            for c, j in zip(cells, cols):
                local = np.unique([left_all[c], c, right_all[c]])
                rows = (local[:, None] * nv + np.arange(nv)[None, :]).ravel()
                jac[rows, j] = df[rows] / eps[j]
    return jac


def implicit_step(model: FomProblem, q: np.ndarray, dt: float,
                  stepper: TimeStepper | None = None) -> NewtonResult:
    """One backward-Euler step: solve q' - q - dt * rhs(q') = 0 by Newton
    with the finite-difference Jacobian. Non-convergence is flagged on the
    result, not raised; the caller decides whether to accept."""
    if stepper is None:
        stepper = TimeStepper(dt=dt)
    eye = np.eye(model.n_dof)

    def residual(x):
        return x - q - dt * model.rhs(x)

    def jacobian(x):
        return eye - dt * fd_jacobian(model, x)

    return newton_solve(residual, jacobian, q, tol=stepper.newton_tol,
                        max_iter=stepper.newton_max_iter)


def coarse_step(model: FomProblem, y: np.ndarray, z: int, dt: float,
                stepper: TimeStepper | None = None) -> NewtonResult:
    """One backward-Euler step with the enlarged step size z * dt; this is
    the lookahead correction solve."""
    if z < 1:
        raise ValueError("z must be at least 1")
    return implicit_step(model, y, z * dt, stepper)
