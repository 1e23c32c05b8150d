import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from kdspin.integrators import (SymmetricExpm, cf4_node_weights, cf4_propagate,
                                cf4_weights, rk4, CF4_A1, CF4_A2)


def test_rk4_scalar_exact():
    # y' = -i t y, y = exp(-i t^2 / 2)
    f = lambda t, y: -1j * t * y
    ts = np.linspace(0, 3, 7)
    y = rk4(f, np.array([1.0]), ts, 200)
    assert np.max(np.abs(y[:, 0] - np.exp(-0.5j * ts ** 2))) < 1e-9


def test_rk4_fourth_order():
    f = lambda t, y: np.array([y[1], -y[0] * (1 + 0.5 * np.sin(t))])
    ref = solve_ivp(f, (0, 5), [1.0, 0.0], rtol=1e-13, atol=1e-14).y[:, -1]
    errs = [np.max(np.abs(rk4(f, np.array([1.0, 0.0]), [0, 5], s)[-1] - ref))
            for s in (4, 8, 16)]
    assert 13 < errs[0] / errs[1] < 19
    assert 13 < errs[1] / errs[2] < 19


def test_cf4_coefficients():
    assert CF4_A1 + CF4_A2 == pytest.approx(0.5, rel=1e-15)
    a, b = cf4_weights(1.0, 1.0)
    assert a == pytest.approx(1.0, rel=1e-15) and b == pytest.approx(1.0, rel=1e-15)


def _two_level():
    rng = np.random.default_rng(3)
    h0 = rng.normal(size=(4, 4)); h0 = h0 + h0.T
    v = rng.normal(size=(4, 4)); v = v + v.T
    return h0, v


def test_cf4_static_is_exact():
    h0, v = _two_level()
    ex = SymmetricExpm(h0, v)
    x0 = np.array([1, 0, 0, 0], dtype=complex)
    wa = np.full(10, 0.7); wb = np.full(10, 0.7)
    x, _ = cf4_propagate(ex, wa, wb, 0.3, x0)
    ref = expm(-1j * 3.0 * (h0 + 0.7 * v)) @ x0
    assert np.max(np.abs(x - ref)) < 1e-12


def test_cf4_fourth_order_time_dependent():
    h0, v = _two_level()
    w = lambda t: np.sin(1.3 * t) ** 2
    f = lambda t, y: -1j * (h0 + w(t) * v) @ y
    x0 = np.array([1, 0, 0, 0], dtype=complex)
    ref = solve_ivp(f, (0, 2), x0, rtol=1e-13, atol=1e-14, method="DOP853").y[:, -1]
    errs = []
    for n in (20, 40, 80):
        h = 2 / n
        wa, wb = cf4_node_weights(w, 0.0, n, h)
        x, _ = cf4_propagate(SymmetricExpm(h0, v), wa, wb, h, x0)
        errs.append(np.max(np.abs(x - ref)))
    assert 13 < errs[0] / errs[1] < 19
    assert 13 < errs[1] / errs[2] < 19


def test_cf4_fusion_matches_unfused():
    h0, v = _two_level()
    ex = SymmetricExpm(h0, v)
    wa = np.array([0.1, 1.0, 1.0, 1.0, 0.4]); wb = np.array([1.0, 1.0, 1.0, 0.2, 0.4])
    x0 = np.array([0, 1, 0, 0], dtype=complex)
    x, samples = cf4_propagate(ex, wa, wb, 0.25, x0, sample_every=1)
    y = x0
    for a, b in zip(wa, wb):
        y = ex.apply(b, 0.125, ex.apply(a, 0.125, y))
    assert np.max(np.abs(x - y)) < 1e-13
    assert len(samples) == 5 and np.allclose(samples[-1], x, atol=1e-15)
