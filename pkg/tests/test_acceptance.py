"""Acceptance gate: every criterion runs at its stated tolerance and
prints one pass/fail line. Paper-scale configurations are shared through
session fixtures so the full-order references are computed once."""

import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from adrom.dense import principal_angles, thin_svd
from adrom.driver import ExperimentConfig, run_adaptive_rom, run_fom, run_static_rom
from adrom.fom import BurgersProblem, SodProblem, implicit_step
from adrom.projection import ReducedState, build_rom_operator, lspg_step, galerkin_step
from adrom.sampling import SamplingSet, build_deim_operator, qdeim_sample, stencil_closure
from adrom.snapshots import ScalingTransform
from adrom.tracking import (
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

pytestmark = pytest.mark.acceptance


def report(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def burgers_config(**kw):
    base = dict(model="burgers", n_elem=1000, nu=0.01, dt=1e-3, n_t=500,
                r=4, n_s=4, w_init=4, z=10, projection="lspg", sampling="qdeim")
    base.update(kw)
    return ExperimentConfig(**base)


def sod_config(**kw):
    base = dict(model="sod", n_elem=256, gamma=1.4, dt=2.5e-4, n_t=500,
                r=4, n_s=4, w_init=4, z=10, projection="lspg", sampling="qdeim")
    base.update(kw)
    return ExperimentConfig(**base)


BURGERS_RULES = {
    "isvd": UpdateRule("isvd", lam=0.1),
    "wsvd": UpdateRule("wsvd", window=32),
    "direct": UpdateRule("direct", window=8),
    "onestep": UpdateRule("onestep"),
    "oja": UpdateRule("oja", eta=0.01),
    "grouse": UpdateRule("grouse", eta=0.01),
}

SOD_TUNED = {5: (0.25, 32), 10: (0.01, 8), 15: (1e-8, 32), 20: (1e-8, 16)}


@pytest.fixture(scope="session")
def burgers_truth():
    return run_fom(burgers_config(mode="fom"))


@pytest.fixture(scope="session")
def burgers_static(burgers_truth):
    return run_static_rom(burgers_config(mode="static"),
                          truth=burgers_truth.trajectory)


@pytest.fixture(scope="session")
def burgers_adaptive(burgers_truth):
    return {
        name: run_adaptive_rom(burgers_config(rule=rule),
                               truth=burgers_truth.trajectory)
        for name, rule in BURGERS_RULES.items()
    }


@pytest.fixture(scope="session")
def sod_truth():
    return run_fom(sod_config(mode="fom"))


@pytest.fixture(scope="session")
def sod_static(sod_truth):
    return run_static_rom(sod_config(mode="static"), truth=sod_truth.trajectory)


@pytest.fixture(scope="session")
def sod_adaptive(sod_truth):
    runs = {}
    for z, (lam, w) in SOD_TUNED.items():
        runs[z] = {
            "isvd": run_adaptive_rom(sod_config(z=z, rule=UpdateRule("isvd", lam=lam)),
                                     truth=sod_truth.trajectory),
            "direct": run_adaptive_rom(sod_config(z=z, rule=UpdateRule("direct", window=w)),
                                       truth=sod_truth.trajectory),
            "onestep": run_adaptive_rom(sod_config(z=z, rule=UpdateRule("onestep")),
                                        truth=sod_truth.trajectory),
        }
    return runs


def weighted_matrix(snaps, lam):
    k = len(snaps)
    return np.column_stack([lam ** (k - 1 - i) * y for i, y in enumerate(snaps)])


def test_criterion_01_isvd_matches_weighted_batch_svd():
    rng = np.random.default_rng(2024)
    lams = [1.0, 0.7, 0.1]
    worst = 0.0
    for i in range(100):
        lam = lams[i % 3]
        n = int(rng.integers(10, 51))
        # strong forgetting compresses old columns; keep the weighted
        # matrix numerically rank-revealing by bounding r with lambda
        r = int(rng.integers(2, 6 if lam < 0.5 else 9))
        modes, _ = np.linalg.qr(rng.standard_normal((n, r)))
        snaps = [modes @ rng.standard_normal(r) for _ in range(r + 12)]
        init = thin_svd(weighted_matrix(snaps[:r], lam))
        basis = ReducedBasis(phi=init.u[:, :r], sigma=init.s[:r].copy())
        for k, y in enumerate(snaps[r:], start=r + 1):
            basis = isvd_update(basis, y, lam, r)
            batch = thin_svd(weighted_matrix(snaps[:k], lam))
            gap = principal_angles(basis.phi, batch.u[:, :r]).max()
            worst = max(worst, gap)
    report(1, worst <= 1e-8,
           f"iSVD vs batch weighted SVD: worst principal angle {worst:.2e} over "
           f"100 rank-limited streams (tolerance 1e-8)")


def test_criterion_02_orthonormality_endurance():
    rng = np.random.default_rng(7)
    n, r = 40, 6
    defects = {}
    for kind in ("isvd", "wsvd", "direct", "onestep", "oja", "grouse"):
        phi, _ = np.linalg.qr(rng.standard_normal((n, r)))
        basis = ReducedBasis(phi=phi, sigma=np.linspace(2.0, 1.0, r))
        window = SnapshotWindow(10, initial=[rng.standard_normal(n) for _ in range(r)])
        for _ in range(1000):
            y = rng.standard_normal(n)
            if kind == "isvd":
                basis = isvd_update(basis, y, lam=0.9, r=r)
            elif kind == "wsvd":
                window.push(y)
                basis = wsvd_update(window, r)
            elif kind == "direct":
                window.push(y)
                basis = direct_update(basis, window)
            elif kind == "onestep":
                basis = onestep_update(basis, y, basis.phi.T @ y + 0.05)
            elif kind == "oja":
                basis = oja_update(basis, y, eta=0.05)
            else:
                basis = grouse_update(basis, y, eta=0.05)
        defects[kind] = basis.orthonormality_defect()
    worst = max(defects.values())
    report(2, worst <= 1e-8,
           "after 1000 updates per rule, worst orthonormality defect "
           f"{worst:.2e} ({max(defects, key=defects.get)}; tolerance 1e-8)")


def test_criterion_03_full_rank_consistency():
    n, n_t, dt = 32, 100, 1e-3
    model = BurgersProblem(n, nu=0.01)
    basis = ReducedBasis(phi=np.eye(n), sigma=np.ones(n))
    scaling = ScalingTransform(q_ref=np.zeros(n), phi_norm=np.ones(1))
    sampling = stencil_closure(
        SamplingSet(indices=np.arange(n), closure=np.arange(n)), model)
    worst = 0.0
    for kind, step_fn in (("galerkin", galerkin_step), ("lspg", lspg_step)):
        op = build_rom_operator(basis, scaling, sampling, model, kind)
        q = model.initial_state()
        state = ReducedState(a=q.copy())
        for _ in range(n_t):
            state = step_fn(op, model, state, dt).state
            q = implicit_step(model, q, dt).x
            worst = max(worst, np.linalg.norm(state.a - q) / np.linalg.norm(q))
    report(3, worst <= 1e-6,
           f"full-rank Galerkin and LSPG track the FOM to {worst:.2e} "
           f"relative over {n_t} steps (tolerance 1e-6)")


def test_criterion_04_static_failure(burgers_static):
    errs = burgers_static.errors[:, 0]
    early = errs[9]  # step w_init + 10
    final = errs[-1]
    ratio = final / early
    report(4, ratio >= 10.0,
           f"static LSPG-QDEIM error grows from {early:.2e} (step 14) to "
           f"{final:.2e} (step 500), factor {ratio:.1f} (needs >= 10)")


def test_criterion_05_burgers_method_ordering(burgers_adaptive, burgers_static):
    avg = {name: run.time_averaged_error("u")
           for name, run in burgers_adaptive.items()}
    avg["static"] = burgers_static.time_averaged_error("u")
    history = ("isvd", "wsvd", "direct")
    instant = ("onestep", "oja", "grouse")
    ok = (avg["isvd"] == min(avg.values())
          and avg["isvd"] < min(avg["wsvd"], avg["direct"])
          and max(avg[m] for m in history) < min(avg[m] for m in instant)
          and max(avg[m] for m in instant) < avg["static"])
    detail = "  ".join(f"{k}={avg[k]:.3e}" for k in
                       ("isvd", "wsvd", "direct", "onestep", "oja", "grouse", "static"))
    report(5, ok, f"time-averaged ordering isvd < (wsvd,direct) < "
                  f"(onestep,oja,grouse) < static: {detail}")


def test_criterion_06_forgetting_factor_sweep(burgers_truth, burgers_adaptive):
    errs = {0.1: burgers_adaptive["isvd"].time_averaged_error("u")}
    for lam in (0.25, 0.75, 1.0):
        run = run_adaptive_rom(burgers_config(rule=UpdateRule("isvd", lam=lam)),
                               truth=burgers_truth.trajectory)
        errs[lam] = run.time_averaged_error("u")
    best = min(errs, key=errs.get)
    detail = "  ".join(f"lam={k:g}:{v:.3e}" for k, v in errs.items())
    report(6, best == 0.1, f"lambda=0.1 attains the smallest error: {detail}")


def test_criterion_07_signal_vs_rom(burgers_truth, burgers_adaptive):
    tuned = {5: 0.5, 10: 0.1, 25: 1e-7, 50: 1e-7}
    pairs = {}
    for z, lam in tuned.items():
        if z == 10:
            run = burgers_adaptive["isvd"]
        else:
            run = run_adaptive_rom(burgers_config(z=z, rule=UpdateRule("isvd", lam=lam)),
                                   truth=burgers_truth.trajectory)
        pairs[z] = (run.time_averaged_error("u"), run.time_averaged_signal_error("u"))
    ok = all(rom < sig for rom, sig in pairs.values())
    detail = "  ".join(f"z={z}: rom={rom:.3e} signal={sig:.3e}"
                       for z, (rom, sig) in pairs.items())
    report(7, ok, f"adaptive iSVD beats its own correction signal: {detail}")


def test_criterion_08_sod_method_ordering(sod_adaptive, sod_static):
    static_avg = sod_static.time_averaged_error("rho")
    lines = []
    ok = True
    for z in (10, 5, 15, 20):
        runs = sod_adaptive[z]
        a = {name: run.time_averaged_error("rho") for name, run in runs.items()}
        ordered = a["isvd"] < a["direct"] < a["onestep"] < static_avg
        ok = ok and ordered
        lines.append(f"z={z}: isvd={a['isvd']:.3e} direct={a['direct']:.3e} "
                     f"onestep={a['onestep']:.3e} static={static_avg:.3e}"
                     f"{'' if ordered else ' (violated)'}")
    report(8, ok, "density-error ordering isvd < direct < onestep < static; "
                  + "  ".join(lines))


def test_supplementary_sod_sweep_tuned_isvd_beats_direct(sod_truth, sod_adaptive):
    """Companion evidence for criterion 8's z=15 leg, which pins the
    original study's sweep winner lambda=1e-8 and fails here: tuned within
    THIS implementation (lambda=0.25 at z=15), iSVD beats Direct at every
    adaptation window, reproducing the study's claim even where its tuned
    value does not transfer. Criterion 8 remains the binding check."""
    runs = dict(sod_adaptive[15])
    runs["isvd"] = run_adaptive_rom(
        sod_config(z=15, rule=UpdateRule("isvd", lam=0.25)),
        truth=sod_truth.trajectory)
    retuned = runs["isvd"].time_averaged_error("rho")
    direct = runs["direct"].time_averaged_error("rho")
    ok = retuned < direct
    for z in (5, 10, 20):
        a = {k: r.time_averaged_error("rho") for k, r in sod_adaptive[z].items()}
        ok = ok and a["isvd"] < a["direct"]
    print(f"supplementary: z=15 re-tuned isvd {retuned:.3e} < direct {direct:.3e}; "
          "isvd < direct at z=5,10,20 with Table-pinned values")
    assert ok


def test_criterion_09_acceleration(burgers_truth, burgers_adaptive, burgers_static,
                                   sod_truth, sod_adaptive, sod_static):
    acc_b = burgers_truth.wall_seconds / burgers_adaptive["isvd"].wall_seconds
    acc_s = sod_truth.wall_seconds / sod_adaptive[10]["isvd"].wall_seconds
    static_fastest_b = all(burgers_static.wall_seconds < r.wall_seconds
                           for r in burgers_adaptive.values())
    static_fastest_s = all(sod_static.wall_seconds < r.wall_seconds
                           for r in sod_adaptive[10].values())
    ok = acc_b >= 2.0 and acc_s >= 2.0 and static_fastest_b and static_fastest_s
    report(9, ok,
           f"adaptive iSVD acceleration: Burgers {acc_b:.2f}x, Sod {acc_s:.2f}x "
           f"(needs >= 2); static ROM fastest: {static_fastest_b and static_fastest_s}")


def test_criterion_10_fom_fixed_points_and_grid_convergence():
    burgers = BurgersProblem(64, nu=0.01)
    drift_b = np.abs(implicit_step(burgers, np.full(64, 0.8), 1e-3).x - 0.8).max()
    sod = SodProblem(64)
    cell = np.array([1.0, 0.3, 2.2])
    uniform = np.tile(cell, 64)
    drift_s = np.abs(implicit_step(sod, uniform, 2.5e-4).x - uniform).max()

    # Sod spatial convergence: L2 difference against a fine reference drops
    # when the grid is refined 128 -> 256
    dt, steps = 5e-4, 16

    def solve(n):
        model = SodProblem(n)
        q = model.initial_state()
        for _ in range(steps):
            q = implicit_step(model, q, dt).x
        return q.reshape(n, 3)

    ref = solve(1024)

    def restrict(fine, factor):
        n = fine.shape[0] // factor
        return fine.reshape(n, factor, 3).mean(axis=1)

    diffs = {}
    for n in (128, 256):
        sol = solve(n)
        diffs[n] = np.linalg.norm(sol - restrict(ref, 1024 // n)) / np.sqrt(n)
    ok = drift_b <= 1e-12 and drift_s <= 1e-12 and diffs[256] < diffs[128]
    report(10, ok,
           f"uniform-state drift burgers={drift_b:.1e} sod={drift_s:.1e} "
           f"(<=1e-12); Sod L2 vs 1024-cell reference: 128 cells {diffs[128]:.3e} "
           f"-> 256 cells {diffs[256]:.3e}")


def test_criterion_11_deim_exactness():
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(20, 80))
        r = int(rng.integers(2, 9))
        phi, _ = np.linalg.qr(rng.standard_normal((n, r)))
        basis = ReducedBasis(phi=phi, sigma=np.ones(r))
        for n_s in (r, 2 * r):
            s = qdeim_sample(basis, n_s)
            op = build_deim_operator(basis, s)
            v = phi @ rng.standard_normal(r)
            err = np.linalg.norm(phi @ (op @ v[s.indices]) - v) / np.linalg.norm(v)
            worst = max(worst, err)
    report(11, worst <= 1e-9,
           f"gappy reconstruction exact on basis range: worst relative error "
           f"{worst:.2e} over 100 bases x two sampling widths (tolerance 1e-9)")


FRONTEND = Path(__file__).resolve().parent.parent / "frontend"


@pytest.mark.skipif(not (FRONTEND / "dist" / "main.js").exists()
                    or shutil.which("node") is None,
                    reason="secondary component not built")
def test_criterion_12_plotting_smoke(tmp_path, burgers_adaptive, burgers_static,
                                     burgers_truth):
    import json

    from adrom.io import write_error_history, write_profiles

    write_error_history(tmp_path / "isvd.csv", burgers_adaptive["isvd"])
    write_error_history(tmp_path / "static.csv", burgers_static)
    write_profiles(tmp_path / "isvd_profiles.csv", burgers_adaptive["isvd"])
    write_profiles(tmp_path / "fom_profiles.csv", burgers_truth)

    (tmp_path / "err_spec.json").write_text(json.dumps({
        "kind": "error-history", "output": "err.svg",
        "curves": [{"csv": "isvd.csv", "label": "adaptive", "column": "u_rel_err"},
                   {"csv": "static.csv", "label": "static", "column": "u_rel_err"}],
    }))
    (tmp_path / "prof_spec.json").write_text(json.dumps({
        "kind": "profiles", "output": "prof.svg",
        "curves": [{"csv": "fom_profiles.csv", "label": "FOM"},
                   {"csv": "isvd_profiles.csv", "label": "adaptive"}],
    }))

    def render():
        out = subprocess.run(
            ["node", str(FRONTEND / "dist" / "main.js"),
             str(tmp_path / "err_spec.json"), str(tmp_path / "prof_spec.json")],
            capture_output=True, text=True)
        assert out.returncode == 0, out.stderr
        return ((tmp_path / "err.svg").read_bytes(),
                (tmp_path / "prof.svg").read_bytes())

    first = render()
    second = render()
    ok = first == second and all(b.startswith(b"<svg") for b in first)
    report(12, ok, "error-history and profile figures render and are "
                   "byte-identical across two invocations")
