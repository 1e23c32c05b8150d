"""Units, parameters, temporal windows and the squared-envelope time warp.

Internal units are natural (hbar = m = c = 1) with the laser frequency as the
time scale, so internal time is the laser phase omega*t in radians.  Every
user-facing time is in laser cycles; ``CYCLE = 2*pi`` converts.
"""
from dataclasses import dataclass
from enum import Enum
import math

import numpy as np
from scipy import constants as sc

CYCLE = 2.0 * np.pi

ELECTRON_REST_KEV = sc.physical_constants["electron mass energy equivalent in MeV"][0] * 1e3

AMPLITUDE_CONVENTION = (
    "per-beam circular polarization: I = eps0*c*omega^2*A^2 "
    "(two field components of amplitude omega*A), a = e*A/(m*c)"
)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensionless photon momentum ``kappa = hbar*k/(m*c)`` and field
    amplitude ``amp = q*A/(m*c^2)``; ``truncation_n`` bounds |n|."""
    kappa: float
    amp: float
    truncation_n: int = 10

    def __post_init__(self):
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not (self.amp >= 0 and math.isfinite(self.amp)):
            raise ValueError(f"amp must be non-negative, got {self.amp}")
        if int(self.truncation_n) != self.truncation_n or self.truncation_n < 3:
            raise ValueError(f"truncation_n must be an integer >= 3, got {self.truncation_n}")

    @classmethod
    def from_rabi(cls, kappa, omega_r, truncation_n=10):
        """Parameters whose two-photon Rabi frequency is ``omega_r`` (units of omega)."""
        if omega_r < 0:
            raise ValueError("omega_r must be non-negative")
        return cls(kappa, math.sqrt(2.0 * kappa * omega_r), truncation_n)

    def replace(self, **kw):
        d = dict(kappa=self.kappa, amp=self.amp, truncation_n=self.truncation_n)
        d.update(kw)
        return PhysicalParams(**d)


@dataclass(frozen=True)
class Frequencies:
    """Angular frequencies in units of the laser frequency."""
    omega_k: float
    omega_r: float
    omega_s: float
    delta: float
    eps0: float


def frequencies(params):
    k = params.kappa
    om_k = 0.5 * k
    om_r = params.amp ** 2 / (2.0 * k)
    om_s = om_r * k
    delta = om_r * om_s / (4.0 * om_k)
    eps0 = om_k - (om_r ** 2 + om_s ** 2) / (8.0 * om_k)
    return Frequencies(om_k, om_r, om_s, delta, eps0)


# canonical set: 7.8 keV photons, and the Rabi frequency for which
# eta = 8*2pi falls on t = 2401 cycles, i.e. Omega_R * 2401 * 2pi = 16pi + pi/4
CANONICAL_PHOTON_KEV = 7.8
CANONICAL_DISTINCT_CYCLES = 2401.0
CANONICAL_KAPPA = CANONICAL_PHOTON_KEV / ELECTRON_REST_KEV
CANONICAL_OMEGA_R = (16.0 * np.pi + np.pi / 4) / (CANONICAL_DISTINCT_CYCLES * CYCLE)
CANONICAL_TAU = 6399.0
CANONICAL_DELTA_TAU = 5.0


def canonical_params(truncation_n=10):
    return PhysicalParams.from_rabi(CANONICAL_KAPPA, CANONICAL_OMEGA_R, truncation_n)


def photon_energy_kev(wavelength_nm):
    return sc.h * sc.c / (wavelength_nm * 1e-9) / sc.e / 1e3


def kappa_from_wavelength(wavelength_nm):
    return photon_energy_kev(wavelength_nm) / ELECTRON_REST_KEV


def intensity_to_amplitude(intensity, wavelength):
    """Amplitude ``a`` for a per-beam peak intensity (W/cm^2) and wavelength (nm).

    See ``AMPLITUDE_CONVENTION`` for the field convention.
    """
    if intensity < 0 or wavelength <= 0:
        raise ValueError("intensity must be >= 0 and wavelength > 0")
    omega = CYCLE * sc.c / (wavelength * 1e-9)
    e_field = math.sqrt(intensity * 1e4 / (sc.epsilon_0 * sc.c))
    vec_pot = e_field / omega
    return sc.e * vec_pot / (sc.m_e * sc.c)


def cycles_to_fs(t_cycles, wavelength_nm):
    return t_cycles * wavelength_nm * 1e-9 / sc.c * 1e15


class EnvelopeKind(str, Enum):
    SIN2 = "sin2"
    PLATEAU = "plateau"
    CONSTANT = "constant"


@dataclass(frozen=True)
class Envelope:
    """Temporal window; ``tau`` and ``delta_tau`` in laser cycles."""
    kind: EnvelopeKind
    tau: float
    delta_tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", EnvelopeKind(self.kind))
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.kind is EnvelopeKind.PLATEAU:
            if self.delta_tau < 0 or 2 * self.delta_tau > self.tau:
                raise ValueError("plateau window needs 0 <= 2*delta_tau <= tau")
        elif self.delta_tau != 0:
            raise ValueError("delta_tau only applies to the plateau window")

    @classmethod
    def sin2(cls, tau):
        return cls(EnvelopeKind.SIN2, tau)

    @classmethod
    def plateau(cls, tau, delta_tau):
        return cls(EnvelopeKind.PLATEAU, tau, delta_tau)

    @classmethod
    def constant(cls, tau):
        return cls(EnvelopeKind.CONSTANT, tau)

    def with_tau(self, tau):
        return Envelope(self.kind, tau, self.delta_tau)

    def to_dict(self):
        return {"kind": self.kind.value, "tau_cycles": self.tau,
                "delta_tau_cycles": self.delta_tau}


def _check_domain(env, t):
    t = np.asarray(t, dtype=float)
    slack = 1e-12 * env.tau
    if np.any(t < -slack) or np.any(t > env.tau + slack):
        raise ValueError(f"time outside [0, {env.tau}] cycles")
    return np.clip(t, 0.0, env.tau)


def window(env, t):
    """Vectorized w(t) without the domain check; t in cycles."""
    t = np.asarray(t, dtype=float)
    if env.kind is EnvelopeKind.CONSTANT:
        return np.ones_like(t)
    if env.kind is EnvelopeKind.SIN2:
        return np.sin(np.pi * t / env.tau) ** 2
    d = env.delta_tau
    if d == 0:
        return np.ones_like(t)
    w = np.ones_like(t)
    up = t < d
    down = t > env.tau - d
    w[up] = np.sin(0.5 * np.pi * t[up] / d) ** 2
    w[down] = np.sin(0.5 * np.pi * (env.tau - t[down]) / d) ** 2
    return w


def envelope_value(env, t):
    """Window weight in [0, 1] at time t (cycles)."""
    t = _check_domain(env, t)
    w = window(env, t)
    return float(w) if w.ndim == 0 else w


_SIN4_SERIES_X = 0.5
# Taylor coefficients of int_0^x sin^4(u) du = sum_j c_j x^(2j+1), j >= 2
_SIN4_COEF = np.array([(-1) ** j * (4.0 ** (2 * j) - 4 * 4.0 ** j)
                       / (8 * math.factorial(2 * j) * (2 * j + 1)) for j in range(2, 16)])


def _sin4_integral(x):
    # int_0^x sin^4(u) du; the series avoids cancellation at small x
    x = np.asarray(x, dtype=float)
    out = 3 * x / 8 - np.sin(2 * x) / 4 + np.sin(4 * x) / 32
    small = np.abs(x) < _SIN4_SERIES_X
    if np.any(small):
        xs = x[small]
        powers = xs[:, None] ** (2 * np.arange(2, 16) + 1)
        out[small] = powers @ _SIN4_COEF
    return out


def _ramp_integral(t, d):
    # int_0^t sin^4(pi s / (2d)) ds for 0 <= t <= d
    return 2 * d / np.pi * _sin4_integral(np.pi * t / (2 * d))


def _warped_exact(env, t):
    tau = env.tau
    if env.kind is EnvelopeKind.CONSTANT:
        return t.copy()
    if env.kind is EnvelopeKind.SIN2:
        return tau / np.pi * _sin4_integral(np.pi * t / tau)
    d = env.delta_tau
    if d == 0:
        return t.copy()
    out = np.empty_like(t)
    up = t <= d
    down = t >= tau - d
    mid = ~(up | down)
    out[up] = _ramp_integral(t[up], d)
    out[mid] = 3 * d / 8 + (t[mid] - d)
    out[down] = (tau - 5 * d / 4) - _ramp_integral(tau - t[down], d)
    return out


SIMPSON_POINTS_PER_CYCLE = 64


def _warped_simpson(env, t):
    out = np.empty_like(t)
    for i, ti in np.ndenumerate(t):
        m = max(2, int(math.ceil(ti * SIMPSON_POINTS_PER_CYCLE)))
        m += m % 2
        s = np.linspace(0.0, ti, m + 1)
        f = window(env, s) ** 2
        h = ti / m
        out[i] = h / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum())
    return out


def warped_time(env, t, method="exact"):
    """Scaled time int_0^t w(s)^2 ds in cycles.

    ``method="exact"`` uses the closed forms; ``"simpson"`` uses composite
    Simpson with ``SIMPSON_POINTS_PER_CYCLE`` points per cycle.
    """
    t = _check_domain(env, t)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if method == "exact":
        out = _warped_exact(env, t)
    elif method == "simpson":
        out = _warped_simpson(env, t)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out[0]) if scalar else out
