"""Momentum-space Dirac equation in a standing circularly polarized wave.

The state is expanded in free bispinors u_n^{gamma,spin} with momentum
n*hbar*k along z.  Amplitudes are stored densely with
index = ((n + N)*2 + energy_sign)*2 + spin, where energy_sign is 0 for the
positive (c) and 1 for the negative (d) branch and spin is 0 for up.

Energies, couplings and generators are in units of hbar*omega; time is the
laser phase in radians internally and laser cycles at the interface.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .core import CYCLE, Envelope, window, envelope_value
from .integrators import rk4, SymmetricExpm, cf4_node_weights, cf4_propagate

CHANNELS = ("c_up", "c_dn", "d_up", "d_dn")


def _sign_index(sign):
    if sign in ("+", 1, "c", "pos"):
        return 0
    if sign in ("-", -1, "d", "neg"):
        return 1
    raise ValueError(f"energy sign must be '+' or '-', got {sign!r}")


def _spin_index(spin):
    if spin in ("up", "u", 0, "↑"):
        return 0
    if spin in ("down", "dn", "d", 1, "↓"):
        return 1
    raise ValueError(f"spin must be 'up' or 'down', got {spin!r}")


def state_index(n, sign, spin, truncation_n):
    if abs(n) > truncation_n:
        raise IndexError(f"|n| = {abs(n)} exceeds truncation {truncation_n}")
    return ((n + truncation_n) * 2 + _sign_index(sign)) * 2 + _spin_index(spin)


def rel_energy(n, params):
    """Free energy sqrt(1 + (n*kappa)^2) in units of m*c^2."""
    return np.sqrt(1.0 + (np.asarray(n) * params.kappa) ** 2)


def _norm_slope(n, params):
    e = rel_energy(n, params)
    return np.sqrt((e + 1) / (2 * e)), n * params.kappa / (e + 1)


def bispinor(n, sign, spin, params):
    """Free bispinor; real, and an eigenvector of Sigma_z."""
    g, r = _sign_index(sign), _spin_index(spin)
    norm, s = _norm_slope(n, params)
    chi = np.array([1.0, 0.0]) if r == 0 else np.array([0.0, 1.0])
    sz = 1.0 if r == 0 else -1.0
    if g == 0:
        return norm * np.concatenate([chi, s * sz * chi])
    return norm * np.concatenate([-s * sz * chi, chi])


# chi_r^dag X chi_r' for X in (sigma_1, sigma_2, sigma_1 sigma_z, sigma_2 sigma_z)
_S1 = np.array([[0, 1], [1, 0]], dtype=complex)
_S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.diag([1.0, -1.0]).astype(complex)
_S1Z = _S1 @ _SZ
_S2Z = _S2 @ _SZ


def _vertex(n, n2, g, r, g2, r2, params):
    """Coefficients (of sin t, of cos t) of u_n^dag (alpha_1 sin t - alpha_2 cos t) u_n2."""
    N1, s1 = _norm_slope(n, params)
    N2, s2 = _norm_slope(n2, params)
    if g == g2:
        f = (s2 - s1) if g == 0 else (s1 - s2)
        return N1 * N2 * f * _S1Z[r, r2], -N1 * N2 * f * _S2Z[r, r2]
    f = 1 + s1 * s2
    return N1 * N2 * f * _S1[r, r2], -N1 * N2 * f * _S2[r, r2]


def interaction_element(n, n2, left, right, t, params, env=None):
    """Coupling <n, left| V(t) |n2, right> in units of hbar*omega.

    ``left`` and ``right`` are (energy_sign, spin) pairs, ``t`` is in laser
    cycles and ``env`` the temporal window (None for constant amplitude).
    """
    N = params.truncation_n
    if abs(n) > N or abs(n2) > N:
        raise IndexError("momentum index outside truncation")
    if abs(n - n2) != 1 or params.amp == 0:
        return 0j
    g, r = _sign_index(left[0]), _spin_index(left[1])
    g2, r2 = _sign_index(right[0]), _spin_index(right[1])
    w = 1.0 if env is None else envelope_value(env, t)
    cs, cc = _vertex(n, n2, g, r, g2, r2, params)
    ph = CYCLE * t
    return complex(params.amp / params.kappa * w * (cs * math.sin(ph) + cc * math.cos(ph)))


class DiracSystem:
    """Time-independent skeleton of the generator for one parameter set.

    H(t) = diag(energy) + w(t) (sin(t) v_sin + cos(t) v_cos).  In the frame
    co-rotating with S_z = Sigma_z/2 the field term is static,
    H' = diag(energy - s_z) + w(t) v_cos, and becomes real symmetric after
    multiplying spin-down basis states by i.  The field always flips spin and
    shifts n by one, so the parity of (n + spin index) splits the space into
    two decoupled sectors.
    """

    def __init__(self, params):
        self.params = params
        N = params.truncation_n
        self.truncation_n = N
        self.dim = dim = 4 * (2 * N + 1)
        k = np.arange(dim)
        self.spin = k % 2
        self.sign = (k // 2) % 2
        self.n = k // 4 - N
        e = rel_energy(self.n, params) / params.kappa
        self.energy = np.where(self.sign == 0, e, -e)
        self.s_z = np.where(self.spin == 0, 0.5, -0.5)
        fac = params.amp / params.kappa
        self.v_sin = np.zeros((dim, dim), dtype=complex)
        self.v_cos = np.zeros((dim, dim), dtype=complex)
        if fac != 0:
            for i in range(dim):
                for j in range(dim):
                    if abs(self.n[i] - self.n[j]) != 1:
                        continue
                    cs, cc = _vertex(self.n[i], self.n[j], self.sign[i], self.spin[i],
                                     self.sign[j], self.spin[j], params)
                    self.v_sin[i, j] = fac * cs
                    self.v_cos[i, j] = fac * cc
        self.gauge = np.where(self.spin == 0, 1.0 + 0j, 1j)
        v_real = np.conj(self.gauge)[:, None] * self.v_cos * self.gauge[None, :]
        assert np.abs(v_real.imag).max(initial=0.0) < 1e-14
        self.h_rot = self.energy - self.s_z
        self.v_rot = v_real.real
        parity = (self.n + self.spin) % 2
        self.sectors = [np.flatnonzero(parity == p) for p in (1, 0)]

    def hamiltonian(self, t, w=1.0):
        """Lab-frame H at laser phase t (radians) and window weight w."""
        return np.diag(self.energy).astype(complex) + w * (
            math.sin(t) * self.v_sin + math.cos(t) * self.v_cos)

    def rotating_exponentiators(self):
        h = np.diag(self.h_rot)
        return [SymmetricExpm(h[np.ix_(s, s)], self.v_rot[np.ix_(s, s)]) for s in self.sectors]


@lru_cache(maxsize=8)
def dirac_system(params):
    return DiracSystem(params)


@dataclass
class CoefficientState:
    """Amplitudes c_n^up, c_n^dn, d_n^up, d_n^dn for |n| <= N at time t (cycles)."""
    amplitudes: np.ndarray
    truncation_n: int
    t: float = 0.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (4 * (2 * self.truncation_n + 1),):
            raise ValueError("amplitude vector does not match truncation")

    @classmethod
    def zeros(cls, truncation_n, t=0.0):
        return cls(np.zeros(4 * (2 * truncation_n + 1), dtype=complex), truncation_n, t)

    @classmethod
    def basis(cls, n, spin, truncation_n, sign="+"):
        st = cls.zeros(truncation_n)
        st.amplitudes[state_index(n, sign, spin, truncation_n)] = 1.0
        return st

    @classmethod
    def from_spinor(cls, n, spinor, truncation_n):
        """Positive-energy state at momentum n with spin amplitudes (up, down)."""
        st = cls.zeros(truncation_n)
        st.amplitudes[state_index(n, "+", "up", truncation_n)] = spinor[0]
        st.amplitudes[state_index(n, "+", "down", truncation_n)] = spinor[1]
        return st

    def amplitude(self, n, sign, spin):
        return self.amplitudes[state_index(n, sign, spin, self.truncation_n)]

    def spinor(self, n, sign="+"):
        return np.array([self.amplitude(n, sign, "up"), self.amplitude(n, sign, "down")])

    def norm(self):
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


def occupation(state, n):
    """Positive-energy probability |c_n^up|^2 + |c_n^dn|^2."""
    return float(np.sum(np.abs(state.spinor(n, "+")) ** 2))


def generator(t, params, env=None):
    """Hermitian H(t) in units of hbar*omega, t in cycles."""
    w = 1.0 if env is None else envelope_value(env, t)
    return dirac_system(params).hamiltonian(CYCLE * t, w)


def rhs(state, t, params, env=None):
    """Time derivative of the amplitudes with respect to the laser phase."""
    if state.truncation_n != params.truncation_n:
        raise ValueError("state truncation differs from params")
    d = -1j * (generator(t, params, env) @ state.amplitudes)
    return CoefficientState(d, state.truncation_n, t)


@dataclass
class Trajectory:
    times: np.ndarray
    amplitudes: np.ndarray
    params: object
    envelope: Envelope
    settings: dict
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def state(self, i):
        return CoefficientState(self.amplitudes[i], self.params.truncation_n, float(self.times[i]))

    @property
    def final(self):
        return self.state(-1)

    def _block(self, n):
        N = self.params.truncation_n
        i = state_index(n, "+", "up", N)
        return self.amplitudes[:, i:i + 4]

    def occupation(self, n):
        b = self._block(n)
        return np.abs(b[:, 0]) ** 2 + np.abs(b[:, 1]) ** 2

    def norms(self):
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def negative_energy(self):
        sys = dirac_system(self.params)
        return np.sum(np.abs(self.amplitudes[:, sys.sign == 1]) ** 2, axis=1)

    def spin_weight(self, spin):
        sys = dirac_system(self.params)
        return np.sum(np.abs(self.amplitudes[:, sys.spin == _spin_index(spin)]) ** 2, axis=1)


DEFAULT_STEPS = {"magnus4": 1.0, "rk4": 4096.0}
NORM_TOL = 1e-6


def _sample_plan(tau, n_steps, stride):
    if stride is None:
        return None
    return max(1, int(round(stride * n_steps / tau)))


def _evolve_magnus(sys, env, psi0, n_steps, every):
    h = CYCLE * env.tau / n_steps

    wa, wb = cf4_node_weights(lambda t: window(env, t / CYCLE), 0.0, n_steps, h)
    x0 = np.conj(sys.gauge) * psi0
    n_samp = (n_steps // every) if every else 0
    out = np.zeros((n_samp + 1, sys.dim), dtype=complex)
    final = np.zeros(sys.dim, dtype=complex)
    for sec, ex in zip(sys.sectors, sys.rotating_exponentiators()):
        xs = x0[sec]
        if not np.any(xs):
            continue
        xf, samples = cf4_propagate(ex, wa, wb, h, xs, every)
        for i, s in enumerate(samples):
            out[i + 1, sec] = s
        final[sec] = xf
    steps = [0] + [every * (i + 1) for i in range(n_samp)]
    if steps[-1] != n_steps:
        steps.append(n_steps)
        out = np.vstack([out, final[None, :]])
    t = np.array(steps) * h
    out[0] = x0
    # back to the lab frame: psi = exp(-i t S_z) G x
    out = out * sys.gauge[None, :] * np.exp(-1j * t[:, None] * sys.s_z[None, :])
    return t / CYCLE, out


def _evolve_rk4(sys, env, psi0, n_steps, every, interaction_picture):
    h = CYCLE * env.tau / n_steps
    E = sys.energy

    def field(t, y):
        w = float(window(env, t / CYCLE))
        return w * (math.sin(t) * (sys.v_sin @ y) + math.cos(t) * (sys.v_cos @ y))

    if interaction_picture:
        def f(t, y):
            p = np.exp(-1j * E * t)
            return -1j * np.conj(p) * field(t, p * y)
    else:
        def f(t, y):
            return -1j * (E * y + field(t, y))

    steps = list(range(0, n_steps + 1, every)) if every else [0]
    if steps[-1] != n_steps:
        steps.append(n_steps)
    t = np.array(steps) * h
    out = rk4(f, psi0, t, 1.0 / h)
    if interaction_picture:
        out = out * np.exp(-1j * E[None, :] * t[:, None])
    return t / CYCLE, out


def evolve(initial, params, env, steps_per_cycle=None, *, method="magnus4",
           interaction_picture=False, stride=1.0, norm_tol=NORM_TOL):
    """Propagate ``initial`` from t = 0 through the window ``env``.

    method="magnus4" (default) uses a fourth-order commutator-free Magnus
    scheme in the spin co-rotating frame, where the generator only depends on
    time through w(t); one step per cycle resolves the envelope and the slow
    Rabi dynamics while the fast rest-energy phases are exponentiated exactly.
    method="rk4" integrates the literal lab-frame equations with classical
    RK4, optionally in the interaction picture of the free energies.

    ``stride`` is the output spacing in cycles (None keeps only the first and
    last states).  A norm drift above ``norm_tol`` marks the run as not
    converged in ``metadata``.
    """
    if initial.truncation_n != params.truncation_n:
        raise ValueError("state truncation differs from params")
    if initial.t != 0:
        raise ValueError("initial state must be given at t = 0")
    if abs(initial.norm() - 1) > 1e-10:
        raise ValueError(f"initial state not normalized (norm {initial.norm()})")
    if method not in DEFAULT_STEPS:
        raise ValueError(f"unknown method {method!r}")
    spc = DEFAULT_STEPS[method] if steps_per_cycle is None else float(steps_per_cycle)
    if not spc > 0:
        raise ValueError("steps_per_cycle must be positive")
    n_steps = max(1, int(math.ceil(env.tau * spc - 1e-9)))
    every = _sample_plan(env.tau, n_steps, stride)
    sys = dirac_system(params)
    if method == "magnus4":
        times, amps = _evolve_magnus(sys, env, initial.amplitudes, n_steps, every)
    else:
        times, amps = _evolve_rk4(sys, env, initial.amplitudes, n_steps, every,
                                  interaction_picture)
    with np.errstate(all="ignore"):
        drift = float(np.max(np.abs(np.sum(np.abs(amps) ** 2, axis=1) - 1)))
    if not np.isfinite(drift):
        drift = math.inf
    settings = {"method": method, "steps_per_cycle": spc, "n_steps": n_steps,
                "interaction_picture": bool(interaction_picture), "stride": stride}
    meta = {"norm_drift": drift, "converged": bool(drift <= norm_tol and np.all(np.isfinite(amps)))}
    return Trajectory(times, amps, params, env, settings, meta)
