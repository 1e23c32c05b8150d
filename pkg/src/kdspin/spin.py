"""Spin observables and classification of 2x2 spin propagators."""
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .core import CYCLE
from .pauli import SpinPropagatorPair, Provenance

SIGMA = np.array([[[0, 1], [1, 0]],
                  [[0, -1j], [1j, 0]],
                  [[1, 0], [0, -1]]], dtype=complex)

# |t''| below this fraction of the spin period 2*pi/Omega_S counts as valid
ETA_VALIDITY_FRACTION = 0.05
SINGULAR_TOL = 1e-9
DEGENERATE_TOL = 1e-12


class Classification(str, Enum):
    UNITARY_LIKE = "UnitaryLike"
    PROJECTION_LIKE = "ProjectionLike"
    GENERAL = "General"


class DegenerateMatrixError(ValueError):
    pass


@dataclass(frozen=True)
class SU2Params:
    """sqrt(P) e^{i chi} [cos(xi/2) 1 - i sin(xi/2) axis.sigma].

    ``axis`` is a complex 3-vector of unit Hermitian length; it is real
    (up to sign) exactly when the matrix is a multiple of a unitary.
    """
    P: float
    chi: float
    xi: float
    axis: tuple

    @property
    def axis_array(self):
        return np.asarray(self.axis, dtype=complex)


def su2_matrix(p):
    n = p.axis_array
    ns = np.einsum("k,kij->ij", n, SIGMA)
    return np.sqrt(p.P) * np.exp(1j * p.chi) * (np.cos(p.xi / 2) * np.eye(2) - 1j * np.sin(p.xi / 2) * ns)


def _leading_negative(n, tol=1e-12):
    # canonical axis: first nonzero component with positive real part, or
    # with negative imaginary part when the real part vanishes
    for z in n:
        if abs(z) > tol:
            if abs(z.real) > tol:
                return z.real < 0
            return z.imag > 0
    return False


def canonicalize(p):
    """Representative of the gauge class (chi, xi, n) ~ (chi+pi, 2pi-xi, -n) ~ (chi+pi, xi+2pi, n)."""
    chi, xi, n = p.chi, np.mod(p.xi, 4 * np.pi), p.axis_array
    if xi >= 2 * np.pi:
        chi, xi = chi + np.pi, xi - 2 * np.pi
    if _leading_negative(n):
        chi, xi, n = chi + np.pi, np.mod(2 * np.pi - xi, 2 * np.pi), -n
    return SU2Params(float(p.P), float(np.mod(chi, 2 * np.pi)), float(xi), tuple(complex(z) for z in n))


def classify(M):
    s = np.linalg.svd(np.asarray(M, dtype=complex), compute_uv=False)
    if s[0] < DEGENERATE_TOL:
        raise DegenerateMatrixError("zero matrix has no spin-propagator form")
    if s[0] - s[1] < SINGULAR_TOL:
        return Classification.UNITARY_LIKE, s
    if s[1] < SINGULAR_TOL:
        return Classification.PROJECTION_LIKE, s
    return Classification.GENERAL, s


def fit_su2(M):
    """Pauli-expansion fit M = a0 1 + a.sigma; returns (SU2Params, Classification)."""
    M = np.asarray(M, dtype=complex)
    cls, _ = classify(M)
    a0 = np.trace(M) / 2
    a = np.einsum("kji,ij->k", SIGMA, M) / 2
    P = abs(a0) ** 2 + np.vdot(a, a).real
    na = np.sqrt(np.vdot(a, a).real)
    r = np.sqrt(P)
    chi = np.angle(a0) if abs(a0) > DEGENERATE_TOL * r else 0.0
    if na <= DEGENERATE_TOL * r:
        xi, n = 0.0, np.array([0, 0, 1], dtype=complex)
    else:
        xi = 2 * np.arctan2(na, abs(a0))
        n = 1j * a * np.exp(-1j * chi) / na
    return canonicalize(SU2Params(P, chi, xi, tuple(n))), cls


@dataclass(frozen=True)
class BlochState:
    theta: float
    phi: float = 0.0


def bloch_spinor(b):
    return np.array([np.cos(b.theta / 2), np.sin(b.theta / 2) * np.exp(1j * b.phi)])


class BlochVector(NamedTuple):
    vector: np.ndarray
    weight: float
    defined: bool


def bloch_vector(c):
    """Normalized <sigma> of a spinor with its weight |c|^2."""
    c = np.asarray(c, dtype=complex)
    wgt = float(np.vdot(c, c).real)
    if wgt < DEGENERATE_TOL:
        return BlochVector(np.full(3, np.nan), wgt, False)
    v = np.einsum("i,kij,j->k", c.conj(), SIGMA, c).real / wgt
    return BlochVector(v, wgt, True)


def bloch_z(c):
    """Vectorized normalized z-component over the last axis; nan if weight < 1e-12."""
    c = np.asarray(c, dtype=complex)
    up, dn = np.abs(c[..., 0]) ** 2, np.abs(c[..., 1]) ** 2
    w = up + dn
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(w >= DEGENERATE_TOL, (up - dn) / w, np.nan)


def reduce_angle(x):
    """x mod 2*pi, computed in extended precision."""
    two_pi = 2 * np.arccos(np.longdouble(-1))
    return np.asarray(np.fmod(np.asarray(x, dtype=np.longdouble), two_pi), dtype=float)


class EtaResult(NamedTuple):
    eta: float
    t_shifted: float
    valid: bool


def phi0(freqs):
    return np.pi / 4 * freqs.omega_r / freqs.omega_s


def validity_window(freqs):
    """Largest |t''| (cycles) for which the eta form is trusted."""
    return ETA_VALIDITY_FRACTION / freqs.omega_s


def eta_of_time(t, freqs):
    """eta = Omega_R t'' + phi0 with t'' = t - pi/(4 Omega_R) - pi/(4 Omega_S); t, t'' in cycles."""
    if not (freqs.omega_r > 0 and freqs.omega_s > 0):
        raise ValueError("eta needs nonzero Rabi and spin frequencies")
    t_pp = t - (np.pi / (4 * freqs.omega_r) + np.pi / (4 * freqs.omega_s)) / CYCLE
    eta = freqs.omega_r * CYCLE * t_pp + phi0(freqs)
    return EtaResult(float(eta), float(t_pp), bool(abs(t_pp) < validity_window(freqs)))


def time_of_eta(eta, freqs):
    """Inverse of eta_of_time, in cycles."""
    return (eta + np.pi / 4) / (freqs.omega_r * CYCLE)


def diffraction_probability(b, eta):
    """Probabilities (p_+, p_-) = (1 +- cos(theta) cos(2 eta)) / 2 of the reversed and kept momentum."""
    c2 = np.cos(2 * reduce_angle(eta))
    x = np.cos(b.theta) * c2
    return 0.5 * (1 + x), 0.5 * (1 - x)


def eta_pair(eta):
    """T = diag(-sin eta, cos eta), R = -i diag(cos eta, sin eta)."""
    e = reduce_angle(eta)
    T = np.diag([-np.sin(e), np.cos(e)]).astype(complex)
    R = -1j * np.diag([np.cos(e), np.sin(e)])
    return SpinPropagatorPair(T, R, float("nan"), Provenance.ETA_FORM)


def diffracted_state(b, eta):
    return eta_pair(eta).R @ bloch_spinor(b)


def rotating_state(b, eta):
    """Real-axis counterpart of the diffracted state: a pure rotation about z,
    (cos(theta/2) e^{i xi/2}, sin(theta/2) e^{i(phi - xi/2)}) / sqrt(2) with xi = 2 eta - pi/2."""
    xi = 2 * reduce_angle(eta) - np.pi / 2
    return np.array([np.cos(b.theta / 2) * np.exp(0.5j * xi),
                     np.sin(b.theta / 2) * np.exp(1j * (b.phi - 0.5 * xi))]) / np.sqrt(2)


def quarter_period_pair(t, freqs):
    """T, R for |t'| << 2 pi / Omega_S with t' = t - pi/(4 Omega_S); t in cycles."""
    tp = CYCLE * t - np.pi / (4 * freqs.omega_s)
    x = reduce_angle(freqs.omega_r * tp + phi0(freqs))
    c, s = np.cos(x), np.sin(x)
    T = np.diag([c - s, c + s]).astype(complex) / np.sqrt(2)
    R = -1j * np.diag([s + c, s - c]) / np.sqrt(2)
    return SpinPropagatorPair(T, R, float(t), Provenance.ETA_FORM)


class SeparationReport(NamedTuple):
    pair: SpinPropagatorPair
    distance: float
    nearest: float
    reflected: str


def distinct_separation(eta):
    """eta-form pair plus distance to the nearest perfect spin filter (multiple of pi/2).

    ``reflected`` names the spin that is diffracted with certainty at the
    nearest filter point.
    """
    e = float(eta)
    k = np.round(e / (np.pi / 2))
    nearest = k * np.pi / 2
    return SeparationReport(eta_pair(e), abs(e - nearest), float(nearest),
                            "up" if int(k) % 2 == 0 else "down")
