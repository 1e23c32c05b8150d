"""Spin-dependent two-photon Kapitza-Dirac diffraction.

Modules: ``core`` (parameters, envelopes, warped time), ``dirac`` (momentum
space Dirac solver), ``pauli`` (analytic Bragg propagators and the
eight-state refinement), ``spin`` (SU(2) fits, Bloch vectors, eta form),
``scan`` (theta x t grids, figure data) and ``cli``.
"""
from importlib import metadata as _md

from .core import (CYCLE, Envelope, EnvelopeKind, Frequencies, PhysicalParams,
                   canonical_params, envelope_value, frequencies, warped_time)
from .dirac import CoefficientState, Trajectory, bispinor, evolve, occupation, rel_energy
from .pauli import (EigenSystem, EightState, Limit, Provenance, SpinPropagatorPair,
                    eigensystem_approx, evolve_eight_state, evolve_two_photon,
                    propagator_accurate, propagator_from_eigensystem, propagator_two_photon)
from .spin import (BlochState, Classification, SU2Params, bloch_spinor, bloch_vector,
                   diffraction_probability, distinct_separation, eta_of_time, fit_su2,
                   su2_matrix)
from .scan import ScanGrid, Solver, compare_grids, reproduce_figure, run_scan

try:
    __version__ = _md.version("artifact")
except _md.PackageNotFoundError:
    __version__ = "0+unknown"
