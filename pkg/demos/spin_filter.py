"""Analytic picture: the diffraction channels act as spin filters.

At eta = 8 * 2pi the reflection and transmission matrices are projections,
so only spin-up is diffracted; half a Rabi period later only spin-down is.
The diffracted electron's spin then points up (or down) whatever the
initial polarization.

    python3 demos/spin_filter.py
"""
import numpy as np

from kdspin import (BlochState, bloch_spinor, canonical_params, diffraction_probability,
                    distinct_separation, eta_of_time, fit_su2, frequencies,
                    propagator_two_photon)
from kdspin.core import cycles_to_fs
from kdspin.spin import bloch_z, diffracted_state, time_of_eta

f = frequencies(canonical_params())
eta = 16 * np.pi
t = time_of_eta(eta, f)
r = eta_of_time(t, f)
print(f"eta = 8*2pi at t = {t:.2f} cycles = {cycles_to_fs(t, 0.159):.3f} fs; "
      f"t'' = {r.t_shifted:.2f} cycles = {r.t_shifted * f.omega_r:.3f} Rabi periods, valid = {r.valid}")

for label, e in (("eta = 8*2pi", eta), ("eta = 8*2pi + pi/2", eta + np.pi / 2)):
    rep = distinct_separation(e)
    print(f"\n{label}: spin {rep.reflected} is diffracted with certainty")
    for name, M in (("T", rep.pair.T), ("R", rep.pair.R)):
        p, cls = fit_su2(M)
        print(f"  {name} = diag({M[0, 0]:.3f}, {M[1, 1]:.3f})  {cls.value}, "
              f"P = {p.P:.3f}, xi = {p.xi:.4f}, axis = {np.round(p.axis_array, 3)}")
    for th in (np.pi / 4, np.pi / 2, 3 * np.pi / 4):
        b = BlochState(th, 0.7)
        pp, _ = diffraction_probability(b, e)
        print(f"  theta = {th:.3f}: p_+ = {pp:.3f}, diffracted spin z = {bloch_z(diffracted_state(b, e)):+.6f}")

# the exact two-photon propagator keeps the Omega_S phase the eta form drops
pair = propagator_two_photon(t, f)
print(f"\ntwo-photon T at the same time: diag({pair.T[0, 0].real:.4f}, {pair.T[1, 1].real:.4f}), "
      f"classified {fit_su2(pair.T)[1].value}")
z = bloch_z(pair.R @ bloch_spinor(BlochState(np.pi / 2)))
print(f"two-photon diffracted spin z for an x-polarized electron: {z:+.5f}")
