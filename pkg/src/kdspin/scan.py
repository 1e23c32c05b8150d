"""(theta, t) scans of the diffracted channel and figure reproduction."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
import os
from pathlib import Path

import numpy as np

from . import io
from .core import (Envelope, EnvelopeKind, canonical_params, frequencies,
                   CANONICAL_TAU, CANONICAL_DELTA_TAU, AMPLITUDE_CONVENTION)
from .dirac import CoefficientState, evolve
from .pauli import propagator_two_photon, propagator_accurate
from .spin import BlochState, bloch_spinor, bloch_z, eta_of_time, eta_pair


class Solver(str, Enum):
    ANALYTIC_TWO_PHOTON = "AnalyticTwoPhoton"
    ANALYTIC_ACCURATE = "AnalyticAccurate"
    DIRAC_NUMERIC = "DiracNumeric"
    ETA_FORM = "EtaForm"


class NotApplicableError(ValueError):
    pass


@dataclass
class ScanGrid:
    theta: np.ndarray
    times: np.ndarray
    solver: Solver
    p_plus: np.ndarray
    bloch_z: np.ndarray
    valid: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def bloch_valid(self):
        return self.valid & np.isfinite(self.bloch_z)


@dataclass
class ComparisonReport:
    max_deviation: float
    mean_deviation: float
    fitted_retardation: float
    predicted_retardation: object
    n_points: int


def scan_threads():
    """Worker count: CPU count, capped by KDSPIN_THREADS when set."""
    n = os.cpu_count() or 1
    cap = os.environ.get("KDSPIN_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"KDSPIN_THREADS must be an integer, got {cap!r}")
    return n


def _analytic_columns(solver, t, freqs):
    # columns: c_+1(t) for c_-1(0) = up and = down
    if solver is Solver.ANALYTIC_TWO_PHOTON:
        R = propagator_two_photon(t, freqs).R
    elif solver is Solver.ANALYTIC_ACCURATE:
        R = propagator_accurate(t, freqs).R
    else:
        R = eta_pair(eta_of_time(t, freqs).eta).R
    return R, True


# ramps of a few cycles need a few steps per cycle; flat stretches are fused
SCAN_DIRAC_STEPS = 4.0


def _dirac_columns(params, env, t, steps_per_cycle, n0):
    N = params.truncation_n
    steps_per_cycle = SCAN_DIRAC_STEPS if steps_per_cycle is None else steps_per_cycle
    env_t = env.with_tau(t)
    cols = np.zeros((2, 2), dtype=complex)
    ok = True
    for j, spin in enumerate(("up", "down")):
        tr = evolve(CoefficientState.basis(n0, spin, N), params, env_t, steps_per_cycle, stride=None)
        ok &= tr.metadata["converged"]
        cols[:, j] = tr.final.spinor(-n0)
    return cols, ok


def run_scan(solver, params, env, theta_list, time_list, *, phi=0.0,
             steps_per_cycle=None, workers=None, n0=-1):
    """p_+ and normalized Bloch z of the reversed channel -n0 for c_n0(0) = Bloch spinor.

    Analytic solvers use the flat-amplitude propagators at each time.  For
    DiracNumeric each time is a separate pulse with ``tau`` equal to that
    time and the window shape of ``env``; linearity lets two runs (spin up
    and down) serve every theta.
    """
    solver = Solver(solver)
    theta = np.atleast_1d(np.asarray(theta_list, dtype=float))
    times = np.atleast_1d(np.asarray(time_list, dtype=float))
    if theta.size == 0 or times.size == 0:
        raise ValueError("theta_list and time_list must be nonempty")
    if np.any(times <= 0):
        raise ValueError("scan times must be positive")
    if n0 not in (-1, 1):
        raise ValueError("n0 must be -1 or +1")
    if solver is Solver.DIRAC_NUMERIC and env is None:
        raise ValueError("DiracNumeric scans need an envelope")
    freqs = frequencies(params)

    def point(t):
        try:
            if solver is Solver.DIRAC_NUMERIC:
                return _dirac_columns(params, env, t, steps_per_cycle, n0)
            return _analytic_columns(solver, t, freqs)
        except (ValueError, FloatingPointError, np.linalg.LinAlgError):
            return np.full((2, 2), np.nan + 0j), False

    n_workers = workers or scan_threads()
    if solver is Solver.DIRAC_NUMERIC and n_workers > 1 and times.size > 1:
        with ThreadPoolExecutor(n_workers) as ex:
            results = list(ex.map(point, times))
    else:
        results = [point(t) for t in times]

    spinors = np.array([bloch_spinor(BlochState(th, phi)) for th in theta])
    cols = np.array([r[0] for r in results])          # (t, 2, 2)
    ok = np.array([r[1] for r in results], dtype=bool)
    c_plus = np.einsum("tij,aj->ati", cols, spinors)  # (theta, t, 2)
    p = np.sum(np.abs(c_plus) ** 2, axis=-1)
    z = bloch_z(c_plus)
    valid = np.broadcast_to(ok, p.shape) & np.isfinite(p)
    meta = {"solver": solver.value, "params": _params_dict(params),
            "envelope": env.to_dict() if env is not None else None, "phi": phi, "n0": n0,
            "steps_per_cycle": (steps_per_cycle or SCAN_DIRAC_STEPS)
            if solver is Solver.DIRAC_NUMERIC else None}
    return ScanGrid(theta, times, solver, p, z, valid.copy(), meta)


def _params_dict(params):
    f = frequencies(params)
    return {"kappa": params.kappa, "amp": params.amp, "truncation_n": params.truncation_n,
            "omega_r": f.omega_r, "omega_s": f.omega_s, "omega_k": f.omega_k,
            "delta": f.delta, "eps0": f.eps0}


def retardation_prediction(env):
    """Warped-time deficit 5/4 delta_tau of a plateau window, in cycles."""
    if env.kind is not EnvelopeKind.PLATEAU:
        raise NotApplicableError("retardation prediction needs a plateau window")
    return 1.25 * env.delta_tau


def _shift_cost(a, b, s):
    t = a.times
    lo, hi = t[0], t[-1]
    m = (t + s >= lo - 1e-12) & (t + s <= hi + 1e-12)
    if m.sum() < 2:
        return np.inf, None
    # invalid points become nan and drop out of the fit
    pa = np.where(a.valid, a.p_plus, np.nan)[:, m]
    pb = np.where(b.valid, b.p_plus, np.nan)
    bs = np.array([np.interp(t[m] + s, t, row) for row in pb])
    d = np.abs(pa - bs)
    if not np.isfinite(d).any():
        return np.inf, d
    return np.nanmean(d ** 2), d


def compare_grids(a, b, align=True, max_shift=20.0, resolution=0.1):
    """Deviation of p_+ between grids on identical axes.

    With ``align`` the time axis of ``b`` is shifted by the least-squares
    retardation s (b(t + s) vs a(t)); s > 0 means b lags a.
    """
    if not (np.array_equal(a.theta, b.theta) and np.array_equal(a.times, b.times)):
        raise ValueError("grids must share theta and time axes")
    if align and len(a.times) > 1:
        if np.any(np.diff(a.times) <= 0):
            raise ValueError("alignment needs increasing times")
        ks = np.arange(-int(round(max_shift / resolution)), int(round(max_shift / resolution)) + 1)
        costs = [_shift_cost(a, b, k * resolution)[0] for k in ks]
        s = float(ks[int(np.argmin(costs))] * resolution)
    else:
        s = 0.0
    _, d = _shift_cost(a, b, s)
    pred = None
    env = b.metadata.get("envelope")
    if env and b.solver is Solver.DIRAC_NUMERIC and env["kind"] == EnvelopeKind.PLATEAU.value:
        pred = 1.25 * env["delta_tau_cycles"]
    return ComparisonReport(float(np.nanmax(d)), float(np.nanmean(d)), s, pred,
                            int(np.isfinite(d).sum()))


# --- figures -------------------------------------------------------------

FIGURE_WINDOW = (2250.0, 2550.0)
FIGURE_POINTS = 300
FIGURE_THETAS = np.linspace(0.0, np.pi, 13)

TRAJECTORY_FIGURES = {"fig1a": (-1, "up"), "fig1b": (1, "up"),
                      "fig1c": (-1, "down"), "fig1d": (1, "down")}
GRID_FIGURES = {
    "fig3a": (Solver.ANALYTIC_TWO_PHOTON, "prob"),
    "fig3b": (Solver.ANALYTIC_ACCURATE, "prob"),
    "fig3c": (Solver.DIRAC_NUMERIC, "prob"),
    "fig5a": (Solver.ANALYTIC_TWO_PHOTON, "blochz"),
    "fig5b": (Solver.ANALYTIC_ACCURATE, "blochz"),
    "fig5c": (Solver.DIRAC_NUMERIC, "blochz"),
}
FIGURE_IDS = tuple(TRAJECTORY_FIGURES) + tuple(GRID_FIGURES)


def figure_config(figure_id, params=None, n_times=FIGURE_POINTS, thetas=None):
    fid = figure_id.lower()
    if fid not in FIGURE_IDS:
        raise KeyError(f"unknown figure {figure_id!r}; valid: {', '.join(FIGURE_IDS)}")
    params = params or canonical_params()
    base = {"figure_id": fid, "params": _params_dict(params),
            "amplitude_convention": AMPLITUDE_CONVENTION}
    if fid in TRAJECTORY_FIGURES:
        n0, spin = TRAJECTORY_FIGURES[fid]
        env = Envelope.sin2(CANONICAL_TAU)
        base.update(kind="trajectory", solver=Solver.DIRAC_NUMERIC.value, n0=n0, spin=spin,
                    envelope=env.to_dict(), steps_per_cycle=1.0)
        return base, params, env
    solver, quantity = GRID_FIGURES[fid]
    env = Envelope.plateau(FIGURE_WINDOW[0], CANONICAL_DELTA_TAU)
    th = FIGURE_THETAS if thetas is None else np.asarray(thetas, dtype=float)
    base.update(kind="grid", solver=solver.value, quantity=quantity,
                envelope=env.to_dict() if solver is Solver.DIRAC_NUMERIC else None,
                times=[FIGURE_WINDOW[0], FIGURE_WINDOW[1], int(n_times)],
                thetas=th.tolist(), steps_per_cycle=SCAN_DIRAC_STEPS if solver is Solver.DIRAC_NUMERIC else None)
    return base, params, env


def reproduce_figure(figure_id, out_dir=None, *, params=None, n_times=FIGURE_POINTS,
                     thetas=None, workers=None):
    """Compute a figure's data; with ``out_dir`` also write CSVs and a JSON sidecar.

    Returns a dict with the config, its hash and the Trajectory or ScanGrid.
    """
    cfg, params, env = figure_config(figure_id, params, n_times, thetas)
    fid = cfg["figure_id"]
    if cfg["kind"] == "trajectory":
        init = CoefficientState.basis(cfg["n0"], cfg["spin"], params.truncation_n)
        data = evolve(init, params, env, cfg["steps_per_cycle"])
        ok = data.metadata["converged"]
    else:
        t0, t1, n = cfg["times"]
        times = np.linspace(t0, t1, n)
        data = run_scan(cfg["solver"], params, env, cfg["thetas"], times,
                        steps_per_cycle=cfg["steps_per_cycle"], workers=workers)
        ok = bool(data.valid.all())
    h = io.config_hash(cfg)
    result = {"config": cfg, "config_hash": h, "data": data, "converged": ok, "files": []}
    if out_dir is not None:
        d = Path(out_dir) / fid
        d.mkdir(parents=True, exist_ok=True)
        if cfg["kind"] == "trajectory":
            io.write_trajectory_csv(d / "trajectory.csv", data)
            io.write_occupations_csv(d / "occupations.csv", data)
            files = ["trajectory.csv", "occupations.csv"]
            extra = data.metadata
        else:
            name = "scan_prob.csv" if cfg["quantity"] == "prob" else "scan_blochz.csv"
            io.write_grid_csv(d / name, data, cfg["quantity"])
            files = [name]
            extra = {"n_invalid": int((~data.valid).sum())}
        meta = {"figure_id": fid, "params": cfg["params"], "envelope": cfg["envelope"],
                "solver": cfg["solver"], "steps_per_cycle": cfg["steps_per_cycle"],
                "code_version": io.code_version(), "config_hash": h, "config": cfg,
                "converged": ok, "run": extra, "files": files}
        io.write_metadata(d / "metadata.json", meta)
        result["files"] = [str(d / f) for f in files] + [str(d / "metadata.json")]
    return result
