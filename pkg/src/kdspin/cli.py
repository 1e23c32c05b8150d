"""Command-line front end: ``kdspin simulate | scan | analytic | reproduce``.

Exit codes: 0 success, 1 numerical failure, 2 usage or config error.
"""
import argparse
import copy
from dataclasses import dataclass
import json
from pathlib import Path
import sys

import numpy as np

from . import io
from .core import (PhysicalParams, Envelope, frequencies, AMPLITUDE_CONVENTION,
                   CANONICAL_KAPPA, CANONICAL_OMEGA_R, CANONICAL_TAU, CYCLE)
from .dirac import CoefficientState, evolve
from .pauli import propagator_two_photon, propagator_accurate
from .scan import (Solver, run_scan, reproduce_figure, FIGURE_IDS, FIGURE_WINDOW,
                   FIGURE_POINTS)
from .spin import (fit_su2, eta_of_time, eta_pair, time_of_eta, validity_window, bloch_spinor,
                   BlochState, DegenerateMatrixError)

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class ConfigError(Exception):
    pass


CANONICAL_CONFIG = {
    "physics": {"kappa": CANONICAL_KAPPA, "omega_r_per_omega": CANONICAL_OMEGA_R,
                "truncation_n": 10},
    "envelope": {"kind": "sin2", "tau_cycles": CANONICAL_TAU, "delta_tau_cycles": 0.0},
    "integrator": {"method": "magnus4", "steps_per_cycle": None, "interaction_picture": False},
    "initial": {"n0": -1, "spin": "up"},
    "outputs": {"directory": "kdspin_out", "stride": 1.0},
}

_SECTIONS = {
    "physics": {"kappa", "amp", "omega_r_per_omega", "truncation_n"},
    "envelope": {"kind", "tau_cycles", "delta_tau_cycles"},
    "integrator": {"method", "steps_per_cycle", "interaction_picture"},
    "initial": {"n0", "spin"},
    "outputs": {"directory", "stride"},
}


@dataclass
class RunConfig:
    params: PhysicalParams
    envelope: Envelope
    method: str
    steps_per_cycle: object
    interaction_picture: bool
    n0: int
    spinor: np.ndarray
    spin_spec: object
    directory: Path
    stride: object
    raw: dict


def load_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: malformed JSON: {e.msg}")


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k].update(v)
        else:
            out[k] = v
    return out


def _num(d, sec, key, kind=float, required=True):
    if key not in d or d[key] is None:
        if required:
            raise ConfigError(f"{sec}.{key}: missing")
        return None
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{sec}.{key}: expected a number, got {v!r}")
    if kind is int and int(v) != v:
        raise ConfigError(f"{sec}.{key}: expected an integer, got {v!r}")
    return kind(v)


def parse_config(raw):
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    for sec, val in raw.items():
        if sec not in _SECTIONS:
            raise ConfigError(f"{sec}: unknown section (expected {', '.join(_SECTIONS)})")
        if not isinstance(val, dict):
            raise ConfigError(f"{sec}: expected an object")
        bad = set(val) - _SECTIONS[sec]
        if bad:
            raise ConfigError(f"{sec}.{sorted(bad)[0]}: unknown field")
    ph = raw.get("physics", {})
    kappa = _num(ph, "physics", "kappa")
    amp = _num(ph, "physics", "amp", required=False)
    om = _num(ph, "physics", "omega_r_per_omega", required=False)
    if (amp is None) == (om is None):
        raise ConfigError("physics: give exactly one of amp / omega_r_per_omega")
    ntr = _num(ph, "physics", "truncation_n", int, required=False) or 10
    try:
        params = PhysicalParams(kappa, amp, ntr) if amp is not None else \
            PhysicalParams.from_rabi(kappa, om, ntr)
    except ValueError as e:
        raise ConfigError(f"physics: {e}")

    ev = raw.get("envelope", {})
    kind = ev.get("kind", "sin2")
    tau = _num(ev, "envelope", "tau_cycles")
    dtau = _num(ev, "envelope", "delta_tau_cycles", required=False) or 0.0
    try:
        env = Envelope(kind, tau, dtau if kind == "plateau" else 0.0)
    except ValueError as e:
        raise ConfigError(f"envelope: {e}")

    ig = raw.get("integrator", {})
    method = ig.get("method", "magnus4")
    if method not in ("magnus4", "rk4"):
        raise ConfigError(f"integrator.method: expected 'magnus4' or 'rk4', got {method!r}")
    spc = _num(ig, "integrator", "steps_per_cycle", required=False)
    if spc is not None and spc <= 0:
        raise ConfigError("integrator.steps_per_cycle: must be positive")
    ip = ig.get("interaction_picture", False)
    if not isinstance(ip, bool):
        raise ConfigError("integrator.interaction_picture: expected true/false")

    ini = raw.get("initial", {})
    n0 = _num(ini, "initial", "n0", int, required=False)
    n0 = -1 if n0 is None else n0
    if abs(n0) > params.truncation_n:
        raise ConfigError("initial.n0: outside the momentum truncation")
    spin = ini.get("spin", "up")
    if spin == "up":
        spinor = np.array([1, 0], dtype=complex)
    elif spin in ("down", "dn"):
        spinor = np.array([0, 1], dtype=complex)
    elif isinstance(spin, dict) and set(spin) == {"bloch"} and isinstance(spin["bloch"], list) \
            and len(spin["bloch"]) == 2:
        th, phi = spin["bloch"]
        spinor = bloch_spinor(BlochState(float(th), float(phi)))
    else:
        raise ConfigError('initial.spin: expected "up", "down" or {"bloch": [theta, phi]}')

    out = raw.get("outputs", {})
    stride = out.get("stride", 1.0)
    if stride is not None and (isinstance(stride, bool) or not isinstance(stride, (int, float))
                               or stride <= 0):
        raise ConfigError("outputs.stride: expected a positive number or null")
    return RunConfig(params, env, method, spc, ip, n0, spinor, spin,
                     Path(out.get("directory", "kdspin_out")), stride, raw)


def _overrides(args):
    o = {}

    def put(sec, key, val):
        if val is not None:
            o.setdefault(sec, {})[key] = val

    put("physics", "kappa", getattr(args, "kappa", None))
    if getattr(args, "amp", None) is not None:
        put("physics", "amp", args.amp)
        o["physics"]["omega_r_per_omega"] = None
    if getattr(args, "omega_r", None) is not None:
        put("physics", "omega_r_per_omega", args.omega_r)
        o["physics"]["amp"] = None
    put("physics", "truncation_n", getattr(args, "truncation_n", None))
    put("envelope", "kind", getattr(args, "envelope", None))
    put("envelope", "tau_cycles", getattr(args, "tau", None))
    put("envelope", "delta_tau_cycles", getattr(args, "delta_tau", None))
    put("integrator", "method", getattr(args, "method", None))
    put("integrator", "steps_per_cycle", getattr(args, "steps_per_cycle", None))
    if getattr(args, "interaction_picture", False):
        put("integrator", "interaction_picture", True)
    put("initial", "n0", getattr(args, "n0", None))
    put("initial", "spin", getattr(args, "spin", None))
    put("outputs", "directory", getattr(args, "out", None))
    put("outputs", "stride", getattr(args, "stride", None))
    return o


def resolve_config(args):
    raw = copy.deepcopy(CANONICAL_CONFIG) if (args.preset or not args.config) else {}
    if args.config:
        raw = _merge(raw, load_json(args.config))
    raw = _merge(raw, _overrides(args))
    for sec in list(raw.get("physics", {})):
        if raw["physics"][sec] is None:
            del raw["physics"][sec]
    return parse_config(raw)


def _meta_common(cfg):
    f = frequencies(cfg.params)
    return {"params": {"kappa": cfg.params.kappa, "amp": cfg.params.amp,
                       "truncation_n": cfg.params.truncation_n, "omega_r": f.omega_r,
                       "omega_s": f.omega_s, "omega_k": f.omega_k, "delta": f.delta,
                       "eps0": f.eps0},
            "envelope": cfg.envelope.to_dict(), "config": cfg.raw,
            "config_hash": io.config_hash(io.to_jsonable(cfg.raw)),
            "amplitude_convention": AMPLITUDE_CONVENTION, "code_version": io.code_version()}


def cmd_simulate(args):
    cfg = resolve_config(args)
    init = CoefficientState.from_spinor(cfg.n0, cfg.spinor, cfg.params.truncation_n)
    tr = evolve(init, cfg.params, cfg.envelope, cfg.steps_per_cycle, method=cfg.method,
                interaction_picture=cfg.interaction_picture, stride=cfg.stride)
    d = cfg.directory
    d.mkdir(parents=True, exist_ok=True)
    io.write_trajectory_csv(d / "trajectory.csv", tr)
    io.write_occupations_csv(d / "occupations.csv", tr)
    meta = _meta_common(cfg)
    meta.update(solver=Solver.DIRAC_NUMERIC.value, steps_per_cycle=tr.settings["steps_per_cycle"],
                integrator=tr.settings, run=tr.metadata, converged=tr.metadata["converged"],
                partial=not tr.metadata["converged"])
    io.write_metadata(d / "metadata.json", meta)
    final = tr.final
    print(f"wrote {d / 'trajectory.csv'} ({len(tr)} samples), norm drift {tr.metadata['norm_drift']:.2e}")
    print(f"final occupations: n=-1 {final_occ(final, -1):.6f}  n=+1 {final_occ(final, 1):.6f}")
    if not tr.metadata["converged"]:
        print("error: norm drift exceeds tolerance; output flagged as not converged",
              file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def final_occ(state, n):
    return float(np.sum(np.abs(state.spinor(n)) ** 2))


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--theta: cannot parse {text!r}")


def cmd_scan(args):
    cfg = resolve_config(args)
    if args.theta_range:
        a, b, n = args.theta_range
        theta = np.linspace(a, b, int(n))
    else:
        theta = np.array(_float_list(args.theta))
    if theta.size == 0:
        raise ConfigError("--theta: empty list")
    if cfg.n0 not in (-1, 1):
        raise ConfigError("initial.n0: scans need n0 = -1 or +1")
    t0, t1, n = args.t_range
    if int(n) != n or n < 1:
        raise ConfigError("--t-range: count must be a positive integer")
    if t1 < t0 or (t1 == t0 and n > 1):
        raise ConfigError("--t-range: stop must exceed start")
    times = np.linspace(t0, t1, int(n)) if n > 1 else np.array([t0])
    grid = run_scan(args.solver, cfg.params, cfg.envelope, theta, times, phi=args.phi,
                    steps_per_cycle=cfg.steps_per_cycle, n0=cfg.n0)
    d = cfg.directory
    d.mkdir(parents=True, exist_ok=True)
    io.write_grid_csv(d / "scan_prob.csv", grid, "prob")
    io.write_grid_csv(d / "scan_blochz.csv", grid, "blochz")
    meta = _meta_common(cfg)
    meta.update(solver=grid.solver.value, steps_per_cycle=grid.metadata["steps_per_cycle"],
                theta=theta, t_range=[t0, t1, int(n)], phi=args.phi,
                n_invalid=int((~grid.valid).sum()))
    io.write_metadata(d / "metadata.json", meta)
    print(f"wrote {d / 'scan_prob.csv'} and {d / 'scan_blochz.csv'} "
          f"({theta.size} x {times.size} points)")
    if not grid.valid.all():
        print(f"error: {int((~grid.valid).sum())} grid points failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _fit_report(M):
    try:
        p, cls = fit_su2(M)
    except DegenerateMatrixError:
        return {"classification": "Degenerate"}
    s = np.linalg.svd(M, compute_uv=False)
    return {"classification": cls.value, "P": p.P, "chi": p.chi, "xi": p.xi,
            "axis": [[z.real, z.imag] for z in p.axis], "singular_values": s.tolist()}


def analytic_report(params, t):
    f = frequencies(params)
    rep = {"t_cycles": t,
           "frequencies": {"omega_k": f.omega_k, "omega_r": f.omega_r, "omega_s": f.omega_s,
                           "delta": f.delta, "eps0": f.eps0},
           "propagators": {}}
    if f.omega_s > 0:
        e = eta_of_time(t, f)
        rep["eta"] = {"eta": e.eta, "t_shifted_cycles": e.t_shifted, "valid": e.valid,
                      "validity_window_cycles": validity_window(f)}
    pairs = [propagator_two_photon(t, f), propagator_accurate(t, f)]
    if f.omega_s > 0:
        pairs.append(eta_pair(rep["eta"]["eta"]))
    for pair in pairs:
        rep["propagators"][pair.provenance.value] = {
            "T": io.to_jsonable(pair.T), "R": io.to_jsonable(pair.R),
            "fit_T": _fit_report(pair.T), "fit_R": _fit_report(pair.R)}
    return rep


def _print_report(rep):
    f = rep["frequencies"]
    print(f"t = {rep['t_cycles']:.6f} cycles")
    print("frequencies (units of omega): " +
          ", ".join(f"{k}={v:.6e}" for k, v in f.items()))
    if "eta" in rep:
        e = rep["eta"]
        print(f"eta = {e['eta']:.10f} rad (eta/2pi = {e['eta'] / CYCLE:.6f}), "
              f"t'' = {e['t_shifted_cycles']:.4f} cycles, "
              f"valid = {e['valid']} (|t''| < {e['validity_window_cycles']:.1f})")
    for name, p in rep["propagators"].items():
        print(f"[{name}]")
        for key in ("T", "R"):
            m = np.array(p[key])
            z = m[..., 0] + 1j * m[..., 1]
            print(f"  {key} = diag({z[0, 0]:.6f}, {z[1, 1]:.6f})")
            fit = p["fit_" + key]
            if fit["classification"] == "Degenerate":
                print(f"    {key}: Degenerate (zero matrix)")
            else:
                ax = ", ".join(f"{a:.3f}{b:+.3f}j" for a, b in fit["axis"])
                print(f"    {key}: {fit['classification']}  P={fit['P']:.6f} chi={fit['chi']:.6f} "
                      f"xi={fit['xi']:.6f} axis=({ax})")


def cmd_analytic(args):
    cfg = resolve_config(args)
    f = frequencies(cfg.params)
    if args.eta_multiple is not None:
        if f.omega_r == 0:
            raise ConfigError("--eta-multiple needs a nonzero field")
        t = time_of_eta(args.eta_multiple * CYCLE, f)
    elif args.t is not None:
        t = args.t
    else:
        raise ConfigError("give --t or --eta-multiple")
    rep = analytic_report(cfg.params, t)
    if args.json:
        print(json.dumps(rep, indent=2))
    else:
        _print_report(rep)
    return EXIT_OK


def cmd_reproduce(args):
    fid = args.figure.lower()
    if fid not in FIGURE_IDS:
        print(f"error: unknown figure {args.figure!r}; valid ids: {', '.join(FIGURE_IDS)}",
              file=sys.stderr)
        return EXIT_USAGE
    res = reproduce_figure(fid, args.out, n_times=args.n_times)
    for p in res["files"]:
        print(f"wrote {p}")
    return EXIT_OK if res["converged"] else EXIT_NUMERIC


def _common(p):
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--preset", choices=["canonical"],
                   help="start from the canonical parameter set (default without --config)")
    p.add_argument("--kappa", type=float)
    p.add_argument("--amp", type=float)
    p.add_argument("--omega-r", type=float, dest="omega_r", help="Rabi frequency in units of omega")
    p.add_argument("--truncation-n", type=int)
    p.add_argument("--out", help="output directory")


def build_parser():
    ap = argparse.ArgumentParser(prog="kdspin", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the Dirac solver and write a trajectory")
    _common(s)
    s.add_argument("--envelope", choices=["sin2", "plateau", "constant"])
    s.add_argument("--tau", type=float, help="interaction time (cycles)")
    s.add_argument("--delta-tau", type=float, help="plateau ramp time (cycles)")
    s.add_argument("--method", choices=["magnus4", "rk4"])
    s.add_argument("--steps-per-cycle", type=float)
    s.add_argument("--interaction-picture", action="store_true")
    s.add_argument("--n0", type=int)
    s.add_argument("--spin", choices=["up", "down"])
    s.add_argument("--stride", type=float, help="output spacing (cycles)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("scan", help="theta x t grid of the diffracted channel")
    _common(s)
    s.add_argument("--solver", required=True, choices=[x.value for x in Solver])
    g = s.add_mutually_exclusive_group()
    g.add_argument("--theta", default="0", help="comma-separated polar angles (rad)")
    g.add_argument("--theta-range", type=float, nargs=3, metavar=("START", "STOP", "NUM"))
    s.add_argument("--phi", type=float, default=0.0)
    s.add_argument("--t-range", type=float, nargs=3, metavar=("START", "STOP", "NUM"),
                   default=[FIGURE_WINDOW[0], FIGURE_WINDOW[1], FIGURE_POINTS])
    s.add_argument("--envelope", choices=["sin2", "plateau", "constant"])
    s.add_argument("--delta-tau", type=float)
    s.add_argument("--steps-per-cycle", type=float)
    s.add_argument("--n0", type=int)
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("analytic", help="frequencies, propagators, SU(2) fits and eta")
    _common(s)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--t", type=float, help="time (cycles)")
    g.add_argument("--eta-multiple", type=float, help="evaluate at eta = K * 2pi")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_analytic)

    s = sub.add_parser("reproduce", help="write the data behind a figure")
    s.add_argument("figure", help=", ".join(FIGURE_IDS))
    s.add_argument("--out", default="figures")
    s.add_argument("--n-times", type=int, default=FIGURE_POINTS)
    s.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FloatingPointError, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
