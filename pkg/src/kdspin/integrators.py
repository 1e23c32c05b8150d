"""Fixed-step integrators shared by the Dirac and eight-state solvers."""
import numpy as np


def rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4(f, y0, t_samples, steps_per_unit):
    """Integrate y' = f(t, y) through the sample times.

    Each interval between consecutive samples is split into
    ceil(length * steps_per_unit) equal steps.  Returns an array of states,
    one row per sample (the first row is y0 at t_samples[0]).
    """
    t_samples = np.asarray(t_samples, dtype=float)
    out = np.empty((len(t_samples),) + np.shape(y0), dtype=complex)
    y = np.array(y0, dtype=complex)
    out[0] = y
    for i in range(1, len(t_samples)):
        t0, t1 = t_samples[i - 1], t_samples[i]
        n = max(1, int(np.ceil((t1 - t0) * steps_per_unit - 1e-9)))
        h = (t1 - t0) / n
        for k in range(n):
            y = rk4_step(f, t0 + k * h, y, h)
        out[i] = y
    return out


# two-exponential commutator-free Magnus scheme of order four
CF4_NODES = (0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6)
CF4_A1 = (3 - 2 * np.sqrt(3)) / 12
CF4_A2 = (3 + 2 * np.sqrt(3)) / 12


def cf4_weights(w1, w2):
    """Effective field weights of the two exponentials (applied in order)
    for H(t) = H0 + w(t) V given w at the two Gauss nodes."""
    return 2 * (CF4_A2 * w1 + CF4_A1 * w2), 2 * (CF4_A1 * w1 + CF4_A2 * w2)


class SymmetricExpm:
    """exp(-i dt (H0 + w V)) for real symmetric H0, V, cached by w."""

    def __init__(self, h0, v, maxsize=512):
        self.h0 = np.asarray(h0, dtype=float)
        self.v = np.asarray(v, dtype=float)
        self.maxsize = maxsize
        self._cache = {}

    def eig(self, w):
        hit = self._cache.get(w)
        if hit is None:
            if len(self._cache) >= self.maxsize:
                self._cache.clear()
            hit = np.linalg.eigh(self.h0 + w * self.v)
            self._cache[w] = hit
        return hit

    def apply(self, w, dt, x):
        e, u = self.eig(w)
        return u @ (np.exp(-1j * dt * e) * (u.T @ x))


def cf4_node_weights(weight, t0, n_steps, h):
    """Vectorized weights of the two exponentials of every step."""
    ta = t0 + h * np.arange(n_steps)
    w1 = weight(ta + CF4_NODES[0] * h)
    w2 = weight(ta + CF4_NODES[1] * h)
    return cf4_weights(np.asarray(w1, dtype=float), np.asarray(w2, dtype=float))


def cf4_propagate(expm, wa, wb, h, x, sample_every=None):
    """Advance x through len(wa) CF4 steps of H0 + w V.

    ``wa``, ``wb`` are the exponential weights per step (see
    ``cf4_node_weights``).  Consecutive exponentials with identical weights
    are fused, so constant stretches of the window cost one
    diagonalization.  Returns the final state and, if ``sample_every`` is
    given, the list of states after every ``sample_every`` steps.
    """
    samples = []
    pend_w, pend_dt = None, 0.0
    half = 0.5 * h
    for k, (a, b) in enumerate(zip(wa.tolist(), wb.tolist())):
        for w in (a, b):
            if w == pend_w:
                pend_dt += half
            else:
                if pend_w is not None:
                    x = expm.apply(pend_w, pend_dt, x)
                pend_w, pend_dt = w, half
        if sample_every and (k + 1) % sample_every == 0:
            x = expm.apply(pend_w, pend_dt, x)
            pend_w, pend_dt = None, 0.0
            samples.append(x)
    if pend_w is not None:
        x = expm.apply(pend_w, pend_dt, x)
    return x, samples
