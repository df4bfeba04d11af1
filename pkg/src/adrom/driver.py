"""Experiment driver: full-order runs, static ROMs, and the adaptive ROM
loop with its lookahead correction signal.

The adaptive loop follows one fixed recipe: solve the full model over a
short offline window, build the scaling and the initial basis by POD,
then march the reduced model on the fine time grid. Every ``z`` fine
steps an adaptation event fires: the independent coarse trajectory is
advanced one backward-Euler step of size ``z * dt``, the preprocessed
coarse snapshot drives the basis update, the sampling points and reduced
operators are rebuilt, and the reduced state is transferred onto the new
subspace. History-aware rules (isvd, wsvd, direct) consume the freshly
generated lookahead snapshot; instantaneous rules (onestep, oja, grouse)
consume the previously stored snapshot, which approximates the current
time level, and the coarse advance happens at the end of the event.

The coarse trajectory is seeded from the last offline snapshot and never
sees the reduced trajectory, so it is identical across update rules for
fixed (model, z, dt).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .fom import BurgersProblem, FomProblem, SodProblem, TimeStepper, coarse_step, implicit_step
from .projection import build_rom_operator, decode, encode, rom_step
from .sampling import FeatureMap, fgs_sample, qdeim_sample, stencil_closure
from .snapshots import fit_scaling, pod
from .tracking import (
    ReducedBasis,
    SnapshotWindow,
    UpdateRule,
    direct_update,
    grouse_update,
    isvd_update,
    oja_update,
    onestep_update,
    wsvd_update,
)

__all__ = [
    "ExperimentConfig",
    "RunResult",
    "make_problem",
    "run_fom",
    "run_static_rom",
    "run_adaptive_rom",
    "relative_error",
    "acceleration",
]

# History-aware rules consume the freshly advanced lookahead snapshot at an
# adaptation event (advance, then update); instantaneous rules always consume
# the previously stored snapshot and the coarse advance moves to the end of
# the event. Flipping this makes history-aware rules use the stored snapshot
# too; kept as an internal knob for experiments.
CONSUME_LOOKAHEAD = True


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment."""

    model: str = "burgers"          # burgers | sod
    n_elem: int = 1000
    nu: float = 0.01                # Burgers viscosity
    gamma: float = 1.4              # Euler specific-heat ratio
    dt: float = 1e-3
    n_t: int = 500                  # prediction horizon in fine steps
    mode: str = "adaptive"          # fom | static | adaptive
    projection: str = "lspg"        # galerkin | lspg
    sampling: str = "qdeim"         # qdeim | fgs
    feature: str = "pressure-gradient"
    n_extra: int = 0
    r: int = 4
    n_s: int = 4
    w_init: int = 4
    z: int = 10
    rule: UpdateRule = field(default_factory=lambda: UpdateRule("isvd", lam=0.1))
    cadence: str = "every-event"    # every-event | every-step
    seed: int = 0
    save_stride: int = 10
    save_times: tuple[float, ...] = ()
    timing_repeats: int = 1
    newton_tol: float = 1e-8
    newton_max_iter: int = 10
    label: str = ""

    def __post_init__(self):
        if self.model not in ("burgers", "sod"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.mode not in ("fom", "static", "adaptive"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.projection not in ("galerkin", "lspg"):
            raise ValueError(f"unknown projection {self.projection!r}")
        if self.sampling not in ("qdeim", "fgs"):
            raise ValueError(f"unknown sampling {self.sampling!r}")
        if self.cadence not in ("every-event", "every-step"):
            raise ValueError(f"unknown cadence {self.cadence!r}")
        if self.w_init < self.r:
            raise ValueError("w_init must be at least r")
        if self.n_s < self.r:
            raise ValueError("n_s must be at least r")
        if self.z < 1:
            raise ValueError("z must be at least 1")
        if self.n_t < self.w_init:
            raise ValueError("horizon must cover the offline window")
        if self.n_extra > self.n_s:
            raise ValueError("n_extra cannot exceed n_s")

    @property
    def n_events(self) -> int:
        return (self.n_t - self.w_init) // self.z

    def stepper(self) -> TimeStepper:
        return TimeStepper(dt=self.dt, newton_tol=self.newton_tol,
                           newton_max_iter=self.newton_max_iter)


def make_problem(config: ExperimentConfig) -> FomProblem:
    if config.model == "burgers":
        return BurgersProblem(config.n_elem, nu=config.nu)
    return SodProblem(config.n_elem, gamma=config.gamma)


@dataclass
class RunResult:
    """Trajectory, error histories, timings, and the adaptation log of one
    run. Error arrays cover the test interval only (steps w_init+1 .. n_t)
    and hold one column per reported variable."""

    config: ExperimentConfig
    kind: str
    trajectory: np.ndarray
    wall_seconds: float
    var_names: tuple[str, ...]
    newton_failures: list[int] = field(default_factory=list)
    error_steps: np.ndarray | None = None
    errors: np.ndarray | None = None
    event_log: list[dict] = field(default_factory=list)
    signal_steps: np.ndarray | None = None
    signal_errors: np.ndarray | None = None
    acceleration: float | None = None

    def time_averaged_error(self, var: int | str = 0) -> float:
        if self.errors is None or self.errors.size == 0:
            raise ValueError("run carries no error history")
        j = self.var_names.index(var) if isinstance(var, str) else var
        return float(self.errors[:, j].mean())

    def time_averaged_signal_error(self, var: int | str = 0) -> float:
        if self.signal_errors is None or self.signal_errors.size == 0:
            raise ValueError("run carries no signal error history")
        j = self.var_names.index(var) if isinstance(var, str) else var
        return float(self.signal_errors[:, j].mean())

    def saved_steps(self) -> np.ndarray:
        stride = max(1, self.config.save_stride)
        steps = np.arange(0, self.trajectory.shape[0], stride)
        if steps[-1] != self.trajectory.shape[0] - 1:
            steps = np.append(steps, self.trajectory.shape[0] - 1)
        return steps


def relative_error(pred: np.ndarray, truth: np.ndarray) -> float:
    """Euclidean relative error; falls back to the absolute norm when the
    reference vanishes."""
    tn = float(np.linalg.norm(truth))
    dn = float(np.linalg.norm(np.asarray(pred) - np.asarray(truth)))
    if tn == 0.0:
        return dn
    return dn / tn


def acceleration(t_fom: float, t_rom: float) -> float:
    """Wall-clock acceleration factor of a reduced run over the full run."""
    if t_rom <= 0:
        raise ValueError("ROM wall-clock time must be positive")
    return t_fom / t_rom


def _per_variable_errors(model: FomProblem, pred: np.ndarray, truth: np.ndarray) -> np.ndarray:
    pf = model.primitive_fields(pred)
    tf = model.primitive_fields(truth)
    return np.array([relative_error(pf[v], tf[v]) for v in model.var_names])


def _error_history(model: FomProblem, config: ExperimentConfig,
                   trajectory: np.ndarray, truth: np.ndarray | None):
    if truth is None:
        return None, None
    steps = np.arange(config.w_init + 1, config.n_t + 1)
    errs = np.empty((steps.size, model.n_var))
    for i, n in enumerate(steps):
        errs[i] = _per_variable_errors(model, trajectory[n], truth[n])
    return steps, errs


def run_fom(config: ExperimentConfig, keep_every: int = 1) -> RunResult:
    """Fine-step full-order trajectory over the whole horizon; serves as
    ground truth and as the timing baseline."""
    model = make_problem(config)
    stepper = config.stepper()
    n_t = config.n_t

    def one_pass():
        traj = np.empty((n_t + 1, model.n_dof))
        traj[0] = model.initial_state()
        failures = []
        t0 = time.perf_counter()
        q = traj[0]
        for n in range(n_t):
            res = implicit_step(model, q, config.dt, stepper)
            if not res.converged:
                failures.append(n + 1)
            q = res.x
            traj[n + 1] = q
        return time.perf_counter() - t0, traj, failures

    walls = []
    for _ in range(max(1, config.timing_repeats)):
        wall, traj, failures = one_pass()
        walls.append(wall)
    return RunResult(config=config, kind="fom", trajectory=traj,
                     wall_seconds=float(np.mean(walls)),
                     var_names=model.var_names, newton_failures=failures)


def _fit_scaling_for(model: FomProblem, training: np.ndarray):
    """Variable scaling for the ROM pipeline.

    The diagonal scaling exists to bring different physical variables to
    comparable magnitude before the basis is computed. Single-variable
    models have nothing to balance and run unscaled; multi-variable
    models normalize each variable by the mean squared fluctuation of its
    training data. The unit branch matters for the learning-rate update
    rules, whose step sizes couple to the snapshot magnitude.
    """
    from .snapshots import ScalingTransform

    if model.n_var == 1:
        return ScalingTransform(q_ref=np.asarray(training[0], dtype=float).copy(),
                                phi_norm=np.ones(1))
    return fit_scaling(list(training), model.n_var)


def _training_states(config: ExperimentConfig, model: FomProblem,
                     truth: np.ndarray | None) -> np.ndarray:
    """States q^0 .. q^{w_init}; the offline window includes the initial
    solution so that w_init steps span an r-dimensional centered subspace."""
    if truth is not None:
        return np.array(truth[: config.w_init + 1])
    stepper = config.stepper()
    states = np.empty((config.w_init + 1, model.n_dof))
    states[0] = model.initial_state()
    for n in range(config.w_init):
        states[n + 1] = implicit_step(model, states[n], config.dt, stepper).x
    return states


def _build_sampling(config: ExperimentConfig, model: FomProblem,
                    basis: ReducedBasis, y_corr: np.ndarray | None):
    if config.sampling == "fgs":
        if y_corr is None:
            raise ValueError("feature-guided sampling needs a correction state")
        fmap = FeatureMap(kind=config.feature, n_extra=config.n_extra)
        s = fgs_sample(basis, y_corr, config.n_s, fmap, model)
    else:
        s = qdeim_sample(basis, config.n_s)
    return stencil_closure(s, model)


def _apply_rule(rule: UpdateRule, basis: ReducedBasis, window: SnapshotWindow | None,
                y_hat: np.ndarray | None, a_minus: np.ndarray, r: int) -> ReducedBasis:
    if rule.kind == "isvd":
        return isvd_update(basis, y_hat, rule.lam, r)
    if rule.kind == "wsvd":
        return wsvd_update(window, r)
    if rule.kind == "direct":
        return direct_update(basis, window)
    if rule.kind == "onestep":
        return onestep_update(basis, y_hat, a_minus)
    if rule.kind == "oja":
        return oja_update(basis, y_hat, rule.eta)
    return grouse_update(basis, y_hat, rule.eta)


def _run_rom(config: ExperimentConfig, truth: np.ndarray | None,
             adaptive: bool) -> RunResult:
    model = make_problem(config)
    stepper = config.stepper()
    rule = config.rule
    training = _training_states(config, model, truth)
    scaling = _fit_scaling_for(model, training)
    y_train = np.column_stack([scaling.preprocess(q) for q in training])
    basis0 = pod(y_train, config.r)
    q_last = training[config.w_init]

    needs_signal = adaptive or config.sampling == "fgs"

    def one_pass():
        basis = basis0
        traj = np.empty((config.n_t + 1, model.n_dof))
        traj[: config.w_init + 1] = training
        failures: list[int] = []
        events: list[dict] = []
        signal_records: list[tuple[int, np.ndarray]] = []

        window = None
        if adaptive and rule.uses_window:
            init_cols = [y_train[:, j] for j in
                         range(y_train.shape[1] - min(rule.window, config.w_init),
                               y_train.shape[1])]
            window = SnapshotWindow(rule.window, initial=init_cols)

        t0 = time.perf_counter()

        y_corr = None
        prev_signal_hat = None
        if needs_signal:
            res = coarse_step(model, q_last, config.z, config.dt, stepper)
            y_corr = res.x
            signal_records.append((config.w_init + config.z, y_corr.copy()))
            prev_signal_hat = scaling.preprocess(y_corr)

        sampling = _build_sampling(config, model, basis, y_corr)
        op = build_rom_operator(basis, scaling, sampling, model, config.projection)
        state = encode(q_last, op, n=config.w_init)

        def advance_signal(y):
            res = coarse_step(model, y, config.z, config.dt, stepper)
            return res.x, res

        for n in range(config.w_init, config.n_t):
            step = rom_step(op, model, state, config.dt,
                            tol=config.newton_tol, max_iter=config.newton_max_iter)
            if not step.converged:
                failures.append(n + 1)
            state = step.state
            q_tilde = decode(state, op)
            traj[n + 1] = q_tilde

            at_event = adaptive and (n + 1 - config.w_init) % config.z == 0
            refresh = at_event or (adaptive and config.cadence == "every-step")
            if not refresh:
                continue

            event: dict = {"event": len(events) + 1, "step": n + 1}
            consume_lookahead = rule.history_aware and CONSUME_LOOKAHEAD
            try:
                if at_event and consume_lookahead:
                    y_corr, res = advance_signal(y_corr)
                    signal_records.append((n + 1 + config.z, y_corr.copy()))
                    event["coarse_converged"] = res.converged
                    event["coarse_iterations"] = res.iterations
                    y_hat = scaling.preprocess(y_corr)
                    prev_signal_hat = y_hat
                else:
                    y_hat = prev_signal_hat
                if at_event and window is not None:
                    window.push(y_hat)
                basis_new = _apply_rule(rule, basis, window, y_hat, state.a, config.r)
                event["residual_norm"] = float(
                    np.linalg.norm(y_hat - basis.phi @ (basis.phi.T @ y_hat)))

                if at_event:
                    sampling_new = _build_sampling(config, model, basis_new, y_corr)
                else:
                    sampling_new = op.sampling
                op = build_rom_operator(basis_new, scaling, sampling_new, model,
                                        config.projection)
                basis = basis_new
                state = encode(q_tilde, op, n=n + 1)

                if at_event and not consume_lookahead:
                    y_corr, res = advance_signal(y_corr)
                    signal_records.append((n + 1 + config.z, y_corr.copy()))
                    event["coarse_converged"] = res.converged
                    event["coarse_iterations"] = res.iterations
                    prev_signal_hat = scaling.preprocess(y_corr)
            except Exception as exc:  # failed event: keep the previous operator
                event["update_error"] = f"{type(exc).__name__}: {exc}"
            if at_event:
                events.append(event)

        wall = time.perf_counter() - t0
        return wall, traj, failures, events, signal_records

    walls = []
    for _ in range(max(1, config.timing_repeats)):
        wall, traj, failures, events, signal_records = one_pass()
        walls.append(wall)

    error_steps, errors = _error_history(model, config, traj, truth)
    signal_steps = signal_errors = None
    if truth is not None and signal_records:
        in_range = [(s, y) for s, y in signal_records if s <= config.n_t]
        if in_range:
            signal_steps = np.array([s for s, _ in in_range])
            signal_errors = np.stack(
                [_per_variable_errors(model, y, truth[s]) for s, y in in_range])

    return RunResult(config=config, kind="adaptive" if adaptive else "static",
                     trajectory=traj, wall_seconds=float(np.mean(walls)),
                     var_names=model.var_names, newton_failures=failures,
                     error_steps=error_steps, errors=errors, event_log=events,
                     signal_steps=signal_steps, signal_errors=signal_errors)


def run_static_rom(config: ExperimentConfig,
                   truth: np.ndarray | None = None) -> RunResult:
    """POD basis from the offline window, frozen for the whole horizon."""
    return _run_rom(config, truth, adaptive=False)


def run_adaptive_rom(config: ExperimentConfig,
                     truth: np.ndarray | None = None) -> RunResult:
    """Adaptive ROM with lookahead coarse correction and online basis
    updates every ``z`` fine steps."""
    return _run_rom(config, truth, adaptive=True)
