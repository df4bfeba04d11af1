"""Adaptive projection-based reduced-order models with online subspace
tracking, lookahead coarse-solve correction signals, and gappy
hyper-reduction, plus the two finite-difference/finite-volume full-order
models the experiments run on."""

from .dense import (
    NewtonResult,
    SvdResult,
    least_squares,
    newton_solve,
    orth,
    pivoted_qr,
    principal_angles,
    thin_svd,
)
from .driver import (
    ExperimentConfig,
    RunResult,
    acceleration,
    make_problem,
    relative_error,
    run_adaptive_rom,
    run_fom,
    run_static_rom,
)
from .fom import (
    BurgersProblem,
    SodProblem,
    TimeStepper,
    coarse_step,
    fd_jacobian,
    implicit_step,
    rusanov_flux,
    sod_initial_state,
)
from .projection import (
    ReducedState,
    RomOperator,
    build_rom_operator,
    decode,
    encode,
    galerkin_step,
    lspg_objective,
    lspg_step,
    rom_step,
)
from .sampling import (
    FeatureMap,
    SamplingSet,
    build_deim_operator,
    fgs_sample,
    qdeim_sample,
    stencil_closure,
)
from .snapshots import ScalingTransform, fit_scaling, pod
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

__version__ = "0.1.0"
