import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from kdspin.core import CYCLE, Frequencies, PhysicalParams, frequencies
from kdspin.pauli import (ApproximationDomainWarning, DEEP_BRAGG_VECTORS, EightState,
                          Limit, Provenance, eigensystem_approx, eigenvalues_approx,
                          eight_state_matrix, evolve_eight_state, evolve_two_photon,
                          pair_from_block, propagator_accurate, propagator_from_eigensystem,
                          propagator_two_photon)


def dense_eight(f):
    # independent construction from Kronecker blocks
    M = np.diag([f.omega_r + f.omega_s, f.omega_r - f.omega_s])
    ladder = np.diag(np.ones(3), 1) + np.diag(np.ones(3), -1)
    return np.kron(np.diag([9, 1, 1, 9]) * f.omega_k, np.eye(2)) + np.kron(ladder, M)


def test_two_photon_examples(freqs):
    p = propagator_two_photon(0.0, freqs)
    assert np.array_equal(p.T, np.eye(2)) and not np.any(p.R)
    t = 0.25 / (freqs.omega_r + freqs.omega_s)
    cp, cm = evolve_two_photon([0, 0], [1, 0], t, freqs)
    assert abs(cp[0]) ** 2 == pytest.approx(1, abs=1e-15) and abs(cm[0]) < 1e-15
    f0 = Frequencies(freqs.omega_k, freqs.omega_r, 0.0, 0.0, freqs.eps0)
    p = propagator_two_photon(123.4, f0)
    assert p.T[0, 0] == p.T[1, 1] and p.R[0, 0] == p.R[1, 1]
    with pytest.raises(ValueError):
        evolve_two_photon([1, 0], [1, 0], 1.0, freqs)


def test_two_photon_distinct_point(freqs):
    # at eta = 8*2pi the dropped spin phase leaves T_up = cos((R+S)t) ~ 6e-3
    p = propagator_two_photon(2401.0, freqs)
    assert np.allclose(p.T, np.diag([0, 1]), atol=1e-2)
    assert np.allclose(p.R, np.diag([-1j, 0]), atol=1e-2)


@pytest.mark.parametrize("prop", [propagator_two_photon, propagator_accurate])
def test_pair_identities_random(prop, freqs):
    rng = np.random.default_rng(4)
    for t in rng.uniform(0, 2e4, 1000):
        p = prop(t, freqs)
        a, b = p.residuals()
        assert a < 1e-12 and b < 1e-12
        assert np.count_nonzero(p.T - np.diag(np.diag(p.T))) == 0
        assert np.count_nonzero(p.R - np.diag(np.diag(p.R))) == 0


def test_evolve_two_photon_vs_ode(freqs):
    M = np.diag([freqs.omega_r + freqs.omega_s, freqs.omega_r - freqs.omega_s])
    H = np.block([[np.zeros((2, 2)), M], [M, np.zeros((2, 2))]])
    rng = np.random.default_rng(8)
    y0 = rng.normal(size=4) + 1j * rng.normal(size=4)
    y0 /= np.linalg.norm(y0)
    ts = np.sort(rng.uniform(0, 400, 100))
    sol = solve_ivp(lambda t, y: -1j * H @ y, (0, CYCLE * ts[-1]), y0, t_eval=CYCLE * ts,
                    method="DOP853", rtol=1e-13, atol=1e-14)
    for k, t in enumerate(ts):
        cp, cm = evolve_two_photon(y0[:2], y0[2:], t, freqs)
        assert np.max(np.abs(np.concatenate([cp, cm]) - sol.y[:, k])) < 1e-10


def test_accurate_reduces(freqs):
    f0 = Frequencies(freqs.omega_k, freqs.omega_r, freqs.omega_s, 0.0, freqs.eps0)
    for t in (0.0, 17.0, 3000.0):
        a, b = propagator_accurate(t, f0), propagator_two_photon(t, f0)
        assert np.array_equal(a.T, b.T) and np.array_equal(a.R, b.R)
    for t in (1.0, 100.0, 1000.0):
        a, b = propagator_accurate(t, freqs), propagator_two_photon(t, freqs)
        dt = freqs.delta * CYCLE * t
        assert np.abs(a.T - b.T).max() <= dt + dt ** 2
        assert np.abs(a.R - b.R).max() <= dt + dt ** 2
    assert propagator_accurate(5.0, freqs).provenance is Provenance.ACCURATE


def test_splitting_zero_crossings(freqs):
    # the (1,1) channel empties after pi/(R+S), the (2,2) channel after pi/(R-S)
    t_up = 0.5 / (freqs.omega_r + freqs.omega_s)
    t_dn = 0.5 / (freqs.omega_r - freqs.omega_s)
    assert abs(propagator_two_photon(t_up, freqs).R[0, 0]) < 1e-12
    assert abs(propagator_two_photon(t_dn, freqs).R[1, 1]) < 1e-12
    assert abs(propagator_two_photon(t_up, freqs).R[1, 1]) > 1e-2
    # first crossings of |R|^2 = 1/2 on a fine grid
    ts = np.linspace(0, 300, 300001)
    r = np.abs(np.sin(CYCLE * (freqs.omega_r + freqs.omega_s) * ts)) ** 2 - 0.5
    cross = ts[1:][np.diff(np.sign(r)) != 0]
    assert cross[1] - cross[0] == pytest.approx(0.25 / (freqs.omega_r + freqs.omega_s), abs=2e-3)


def test_eight_state_matrix_vs_kron(freqs):
    assert np.array_equal(eight_state_matrix(freqs), dense_eight(freqs))
    Hp = eight_state_matrix(freqs, ponderomotive=True)
    assert np.allclose(Hp - dense_eight(freqs), 2 * freqs.omega_r * np.eye(8), atol=0)


def test_eigen_splitting(freqs):
    e = eigenvalues_approx(freqs)
    e1 = e[0] - freqs.eps0 + freqs.delta
    e4 = e[3] - freqs.eps0 + freqs.delta
    assert e1 - e4 == pytest.approx(2 * (freqs.omega_r + freqs.omega_s), rel=1e-14)


def test_deep_bragg_orthogonal(freqs):
    V = eigensystem_approx(freqs, Limit.DEEP_BRAGG).vectors
    assert np.allclose(V.T @ V, np.eye(8), atol=1e-15)
    assert np.array_equal(V, DEEP_BRAGG_VECTORS)


def test_general_eigen_residuals(freqs):
    es = eigensystem_approx(freqs)
    H = dense_eight(freqs)
    tol = 5 * (freqs.omega_r / freqs.omega_k) ** 2 * freqs.omega_k
    for i in range(8):
        v = es.raw_vectors[:, i]
        res = np.linalg.norm(H @ v - es.values[i] * v) / np.linalg.norm(v)
        assert res < tol
    assert np.allclose(np.linalg.norm(es.vectors, axis=0), 1)
    # each approximate value lies near one exact eigenvalue
    exact, V = np.linalg.eigh(H)
    assert max(np.min(np.abs(exact - e)) for e in es.values) < tol
    # every normalized vector is close to one exact eigenvector
    assert np.abs(V.T @ es.vectors).max(axis=0).min() > 0.9999


def test_eigen_domain_warning():
    f = frequencies(PhysicalParams(0.01, 0.5))
    with pytest.warns(ApproximationDomainWarning):
        eigensystem_approx(f)
    with pytest.raises(ValueError):
        eigensystem_approx(Frequencies(0.0, 0.0, 0.0, 0.0, 0.0))


def test_subspace_propagator(freqs):
    assert np.allclose(propagator_from_eigensystem(0.0, freqs), np.eye(4), atol=1e-15)
    rng = np.random.default_rng(9)
    for t in rng.uniform(0, 2e4, 200):
        U = propagator_from_eigensystem(t, freqs)
        assert np.abs(U.conj().T @ U - np.eye(4)).max() < 1e-12
        assert np.abs(U[:2, :2] - U[2:, 2:]).max() < 1e-15
        assert np.abs(U[:2, 2:] - U[2:, :2]).max() < 1e-15
        pair = pair_from_block(U, t)
        acc = propagator_accurate(t, freqs)
        assert np.abs(pair.T - acc.T).max() < 1e-12
        assert np.abs(pair.R - acc.R).max() < 1e-12
        assert pair.provenance is Provenance.EIGENSYSTEM


def test_eight_state_detuned_return(freqs):
    # c_-3 couples to c_-1 with detuning 8 Omega_k: detuned Rabi oracle
    ts = np.linspace(0, 20, 81)
    tr = evolve_eight_state(EightState.from_spinors(c_m3=(1, 0)), ts, freqs)
    g = freqs.omega_r + freqs.omega_s
    w = np.hypot(g, 4 * freqs.omega_k)
    ref = 1 - (g / w) ** 2 * np.sin(w * CYCLE * ts) ** 2
    assert np.max(np.abs(tr.occupation(-3) - ref)) < 1e-3
    assert tr.occupation(-3).min() > 0.97
    assert tr.occupation(-3)[np.argmin(np.abs(ts - 0.5 / w))] > 0.999


def test_eight_state_tracks_two_photon_short_times(freqs):
    ts = np.linspace(0, 10, 201)
    tr = evolve_eight_state(EightState.from_spinors(c_m1=(1, 0)), ts, freqs)
    ref = np.sin(CYCLE * (freqs.omega_r + freqs.omega_s) * ts) ** 2
    assert np.max(np.abs(np.abs(tr.spinor(1)[:, 0]) ** 2 - ref)) < 1e-3
    assert not tr.flagged


def test_eight_state_ponderomotive_gauge(freqs):
    ts = np.linspace(0, 300, 61)
    rng = np.random.default_rng(1)
    a = rng.normal(size=8) + 1j * rng.normal(size=8)
    st = EightState(a / np.linalg.norm(a))
    p = evolve_eight_state(st, ts, freqs)
    q = evolve_eight_state(st, ts, freqs, ponderomotive=True)
    for n in (-3, -1, 1, 3):
        assert np.max(np.abs(p.occupation(n) - q.occupation(n))) < 1e-12
    phase = q.states / p.states
    assert np.allclose(phase, np.exp(-2j * freqs.omega_r * CYCLE * ts)[:, None], atol=1e-9)


def test_eight_state_vs_expm(freqs):
    H = dense_eight(freqs)
    st = EightState.from_spinors(c_m1=(0.6, 0.8j))
    tr = evolve_eight_state(st, [0.0, 50.0], freqs)
    ref = expm(-1j * CYCLE * 50 * H) @ st.amplitudes
    assert np.max(np.abs(tr.states[-1] - ref)) < 1e-9
    assert tr.norm_drift < 1e-8


def test_eight_state_flag_and_errors(freqs):
    st = EightState.from_spinors(c_m1=(1, 0))
    tr = evolve_eight_state(st, [0, 200], freqs, steps_per_cycle=0.05)
    assert tr.flagged
    with pytest.raises(ValueError):
        evolve_eight_state(EightState.from_spinors(c_m1=(1, 1)), [0, 1], freqs)
    with pytest.raises(ValueError):
        evolve_eight_state(st, [2, 1], freqs)
