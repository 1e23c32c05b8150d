"""CSV and JSON emission with lossless float formatting."""
import csv
import datetime
import hashlib
import json
from importlib import metadata as _md

import numpy as np

from .dirac import CHANNELS


def fmt(x):
    """17 significant digits, enough for an exact double round trip."""
    return format(float(x), ".16e")


def code_version():
    try:
        return _md.version("artifact")
    except _md.PackageNotFoundError:
        return "0+unknown"


def config_hash(config):
    """Git blob hash of the canonical JSON form of ``config``."""
    body = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


def write_trajectory_csv(path, traj):
    N = traj.params.truncation_n
    amps = traj.amplitudes
    with open(path, "w", newline="") as fh:
        fh.write("t_cycles,n,ch,re,im,prob\n")
        for i, t in enumerate(traj.times):
            ts = fmt(t)
            for n in range(-N, N + 1):
                base = (n + N) * 4
                for k, ch in enumerate(CHANNELS):
                    z = amps[i, base + k]
                    fh.write(f"{ts},{n},{ch},{fmt(z.real)},{fmt(z.imag)},{fmt(abs(z) ** 2)}\n")


def write_occupations_csv(path, traj):
    N = traj.params.truncation_n
    occ = {n: traj.occupation(n) for n in range(-N, N + 1)}
    with open(path, "w", newline="") as fh:
        fh.write("t_cycles,n,prob\n")
        for i, t in enumerate(traj.times):
            ts = fmt(t)
            for n in range(-N, N + 1):
                fh.write(f"{ts},{n},{fmt(occ[n][i])}\n")


def write_grid_csv(path, grid, quantity):
    vals = grid.p_plus if quantity == "prob" else grid.bloch_z
    valid = grid.valid if quantity == "prob" else grid.bloch_valid
    with open(path, "w", newline="") as fh:
        fh.write("theta,t_cycles,value,valid\n")
        for i, th in enumerate(grid.theta):
            for j, t in enumerate(grid.times):
                fh.write(f"{fmt(th)},{fmt(t)},{fmt(vals[i, j])},{int(valid[i, j])}\n")


def read_csv(path):
    """Rows as dicts of floats (or strings for non-numeric fields)."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rec = {}
            for k, v in row.items():
                try:
                    rec[k] = int(v) if k in ("n", "valid") else float(v)
                except ValueError:
                    rec[k] = v
            out.append(rec)
    return out


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.generic):
        return x.item()
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


def write_metadata(path, meta):
    meta = dict(_jsonable(meta))
    meta["created_utc"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


to_jsonable = _jsonable
