"""Analytic Bragg ladder: two-photon propagators and the +-3 hbar k refinement.

Times are in laser cycles at the interface; frequencies in units of omega.
Spinor order is (up, down); eight-state order is
(c_-3, c_-1, c_+1, c_+3), each an (up, down) pair.
"""
from dataclasses import dataclass, field
from enum import Enum
import warnings

import numpy as np

from .core import CYCLE
from .integrators import rk4


class Provenance(str, Enum):
    TWO_PHOTON = "TwoPhoton"
    ACCURATE = "Accurate"
    EIGENSYSTEM = "Eigensystem"
    ETA_FORM = "EtaForm"


@dataclass
class SpinPropagatorPair:
    """c_{+-1}(t) = T c_{+-1}(0) + R c_{-+1}(0).

    ``omitted_phase_rate`` is the frequency of the global phase removed by
    the gauge choice (e.g. eps0), so phase-sensitive uses can restore it.
    """
    T: np.ndarray
    R: np.ndarray
    time: float
    provenance: Provenance
    omitted_phase_rate: float = 0.0

    def residuals(self):
        """Max deviations from T^dag T + R^dag R = 1 and T^dag R + R^dag T = 0."""
        T, R = self.T, self.R
        a = T.conj().T @ T + R.conj().T @ R - np.eye(2)
        b = T.conj().T @ R + R.conj().T @ T
        return float(np.abs(a).max()), float(np.abs(b).max())

    def block(self):
        return np.block([[self.T, self.R], [self.R, self.T]])


class ApproximationDomainWarning(UserWarning):
    pass


def _phases(t, freqs):
    tr = CYCLE * np.asarray(t, dtype=float)
    return (freqs.omega_r + freqs.omega_s) * tr, (freqs.omega_r - freqs.omega_s) * tr, tr


def propagator_two_photon(t, freqs):
    x, y, _ = _phases(t, freqs)
    T = np.diag([np.cos(x), np.cos(y)]).astype(complex)
    R = -1j * np.diag([np.sin(x), np.sin(y)])
    return SpinPropagatorPair(T, R, float(t), Provenance.TWO_PHOTON)


def propagator_accurate(t, freqs):
    """Two-photon pair with the e^{+-i Delta t} phases of the +-3 hbar k refinement."""
    x, y, tr = _phases(t, freqs)
    ph = np.array([np.exp(1j * freqs.delta * tr), np.exp(-1j * freqs.delta * tr)])
    T = np.diag(ph * np.array([np.cos(x), np.cos(y)]))
    R = np.diag(-1j * ph * np.array([np.sin(x), np.sin(y)]))
    return SpinPropagatorPair(T, R, float(t), Provenance.ACCURATE, freqs.eps0)


def evolve_two_photon(c_plus, c_minus, t, freqs):
    """Closed-form two-photon evolution; returns (c_+1(t), c_-1(t))."""
    c_plus = np.asarray(c_plus, dtype=complex)
    c_minus = np.asarray(c_minus, dtype=complex)
    nrm = np.vdot(c_plus, c_plus).real + np.vdot(c_minus, c_minus).real
    if abs(nrm - 1) > 1e-10:
        raise ValueError(f"input not normalized (norm {nrm})")
    p = propagator_two_photon(t, freqs)
    return p.T @ c_plus + p.R @ c_minus, p.T @ c_minus + p.R @ c_plus


# --- eight-state system ---------------------------------------------------

def eight_state_matrix(freqs, ponderomotive=False):
    """Generator of the (c_-3, c_-1, c_+1, c_+3) system; optional 2*Omega_R gauge constant."""
    M = np.diag([freqs.omega_r + freqs.omega_s, freqs.omega_r - freqs.omega_s])
    I = np.eye(2)
    Z = np.zeros((2, 2))
    k = freqs.omega_k
    H = np.block([[9 * k * I, M, Z, Z],
                  [M, k * I, M, Z],
                  [Z, M, k * I, M],
                  [Z, Z, M, 9 * k * I]])
    if ponderomotive:
        H = H + 2 * freqs.omega_r * np.eye(8)
    return H


@dataclass
class EightState:
    amplitudes: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(8)

    @classmethod
    def from_spinors(cls, c_m3=(0, 0), c_m1=(0, 0), c_p1=(0, 0), c_p3=(0, 0)):
        return cls(np.concatenate([c_m3, c_m1, c_p1, c_p3]))

    def spinor(self, n):
        i = {-3: 0, -1: 2, 1: 4, 3: 6}[n]
        return self.amplitudes[i:i + 2]


@dataclass
class EightStateTrajectory:
    times: np.ndarray
    states: np.ndarray
    norm_drift: float
    flagged: bool

    def spinor(self, n):
        i = {-3: 0, -1: 2, 1: 4, 3: 6}[n]
        return self.states[:, i:i + 2]

    def occupation(self, n):
        return np.sum(np.abs(self.spinor(n)) ** 2, axis=1)


def evolve_eight_state(initial, t_grid, freqs, steps_per_cycle=16, ponderomotive=False,
                       norm_tol=1e-8):
    """RK4 integration of the eight-state system through ``t_grid`` (cycles).

    The diagonal is rotated out exactly (interaction picture), so RK4 only
    resolves the slow couplings and gauge constants act as exact global
    phases.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0 or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be a nondecreasing 1-d array")
    y0 = np.asarray(initial.amplitudes, dtype=complex)
    if abs(np.vdot(y0, y0).real - 1) > 1e-10:
        raise ValueError("initial state not normalized")
    H = eight_state_matrix(freqs, ponderomotive)
    d = np.diag(H).copy()
    off = H - np.diag(d)

    def f(t, y):
        p = np.exp(-1j * d * t)
        return -1j * np.conj(p) * (off @ (p * y))

    tr = CYCLE * np.concatenate([[initial.t], t_grid]) if t_grid[0] != initial.t \
        else CYCLE * t_grid
    ys = rk4(f, y0 * np.exp(1j * d * tr[0]), tr, steps_per_cycle / CYCLE)
    ys = ys * np.exp(-1j * d[None, :] * tr[:, None])
    if t_grid[0] != initial.t:
        ys = ys[1:]
    drift = float(np.max(np.abs(np.sum(np.abs(ys) ** 2, axis=1) - 1)))
    return EightStateTrajectory(t_grid, ys, drift, drift > norm_tol)


# --- approximate eigensystem ------------------------------------------------

class Limit(str, Enum):
    GENERAL = "General"
    DEEP_BRAGG = "DeepBragg"


@dataclass
class EigenSystem:
    """Approximate eigenpairs of the eight-state generator.

    ``raw_vectors`` (columns) are the closed-form, unnormalized vectors;
    ``vectors`` the normalized ones.  ``notes`` lists corrections applied to
    the closed forms.
    """
    values: np.ndarray
    raw_vectors: np.ndarray
    vectors: np.ndarray
    limit: Limit
    eps0: float
    notes: list = field(default_factory=list)


def eigenvalues_approx(freqs):
    e0, R, S, D, k8 = freqs.eps0, freqs.omega_r, freqs.omega_s, freqs.delta, 8 * freqs.omega_k
    return np.array([e0 + R + S - D, e0 - R + S + D, e0 + R - S + D, e0 - R - S - D,
                     e0 + k8 - D, e0 + k8 + D, e0 + k8 + D, e0 + k8 - D])


def _general_vectors(freqs):
    R, S, k8 = freqs.omega_r, freqs.omega_s, 8 * freqs.omega_k
    p, m = R + S, -R + S
    a = -k8 / p + 1 - p / k8
    b = k8 / (R - S) + 1 - m / k8
    c = -k8 / (R - S) + 1 + m / k8
    d = k8 / p + 1 + p / k8
    v = np.array([
        [1, 0, a, 0, a, 0, 1, 0],
        [0, -1, 0, b, 0, -b, 0, 1],
        [0, 1, 0, c, 0, c, 0, 1],
        [-1, 0, d, 0, -d, 0, 1, 0],
        [1, 0, p / k8, 0, p / k8, 0, 1, 0],
        [0, -1, 0, m / k8, 0, -m / k8, 0, 1],
        [0, 1, 0, -m / k8, 0, -m / k8, 0, 1],
        # the closed form lists +p/k8, -p/k8 for the c_-1, c_+1 entries; the
        # dense eigensolver favours the signs below (overlap 0.999995 vs 0.994)
        [-1, 0, -p / k8, 0, p / k8, 0, 1, 0],
    ], dtype=float)
    return v.T


DEEP_BRAGG_VECTORS = np.array([
    [0, 0, 0, 0, 1, 0, 0, 1],
    [0, 0, 0, 0, 0, 1, 1, 0],
    [1, 0, 0, 1, 0, 0, 0, 0],
    [0, 1, 1, 0, 0, 0, 0, 0],
    [1, 0, 0, -1, 0, 0, 0, 0],
    [0, -1, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, -1],
    [0, 0, 0, 0, 0, -1, 1, 0],
], dtype=float) / np.sqrt(2)


def eigensystem_approx(freqs, limit=Limit.GENERAL):
    if not freqs.omega_k > 0:
        raise ValueError("omega_k must be positive")
    limit = Limit(limit)
    if freqs.omega_r >= freqs.omega_k:
        warnings.warn("omega_r >= omega_k: expansion in omega_r/omega_k is not small",
                      ApproximationDomainWarning, stacklevel=2)
    vals = eigenvalues_approx(freqs)
    if limit is Limit.DEEP_BRAGG:
        return EigenSystem(vals, DEEP_BRAGG_VECTORS.copy(), DEEP_BRAGG_VECTORS.copy(),
                           limit, freqs.eps0)
    raw = _general_vectors(freqs)
    vec = raw / np.linalg.norm(raw, axis=0)
    notes = ["v8: signs of the c_-1 and c_+1 entries reversed relative to the "
             "closed form; the dense eigenproblem favours the reversed signs"]
    return EigenSystem(vals, raw, vec, limit, freqs.eps0, notes)


SUBSPACE_V = np.array([[1, 0, 0, 1],
                       [0, 1, 1, 0],
                       [1, 0, 0, -1],
                       [0, -1, 1, 0]], dtype=float) / np.sqrt(2)


def propagator_from_eigensystem(t, freqs):
    """4x4 U(t) = V exp(-i D t) V^T on (c_-1, c_+1), eps0 omitted."""
    D = eigenvalues_approx(freqs)[:4] - freqs.eps0
    tr = CYCLE * float(t)
    return SUBSPACE_V @ np.diag(np.exp(-1j * D * tr)) @ SUBSPACE_V.T


def pair_from_block(U, t):
    """Split a [[T, R], [R, T]] propagator into a SpinPropagatorPair."""
    return SpinPropagatorPair(U[:2, :2].copy(), U[:2, 2:].copy(), float(t),
                              Provenance.EIGENSYSTEM)
