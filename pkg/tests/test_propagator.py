import math

import numpy as np
import pytest

import valleysim as vs
from valleysim.errors import ConfigError, FermiLevelError
from valleysim.lattice import eigensystem_at, hamiltonian_at
from valleysim.observables import valley_asymmetry
from valleysim.propagator import (
    PropagationConfig, initialize_ground_state, propagate, resolve_dt_au,
    split_bands,
)
from valleysim.units import HBAR_EV_FS

from conftest import threeband_model


def sigma_minus(F0=0.1):
    return vs.PulseTrain([vs.PulseSpec(carrier_ev=6.0, fwhm_fs=1.15,
                                       field_v_per_angstrom=F0,
                                       polarization="sigma-")])


def test_split_bands(hbn, grid24):
    filled, empty = split_bands(hbn, grid24, 0.0)
    assert filled == (0,) and empty == (1,)
    with pytest.raises(FermiLevelError):
        split_bands(hbn, grid24, 4.0)  # inside the conduction band


def test_ground_state(hbn, grid24):
    rho, filled = initialize_ground_state(hbn, grid24)
    assert filled == (0,)
    np.testing.assert_array_equal(rho[:, 0, 0], 1.0)
    assert np.abs(rho[:, 1, 1]).max() == 0.0


def test_dt_guard(hbn, grid24):
    auto = resolve_dt_au(hbn, grid24, None)
    assert auto > 0
    # hBN bandwidth on a Gamma-centred grid is 2*7.524 eV: guard < 0.2 a.u.
    assert auto < 0.2
    with pytest.raises(ConfigError):
        resolve_dt_au(hbn, grid24, 10.0)


def test_zero_field_is_inert(hbn, grid24):
    train = vs.PulseTrain([vs.PulseSpec(carrier_ev=6.0, fwhm_fs=1.15,
                                        field_v_per_angstrom=0.0,
                                        polarization="x")])
    for engine in ("numpy", "numba"):
        r = propagate(hbn, grid24, train, PropagationConfig(engine=engine))
        assert np.abs(r.final_populations[:, 1]).max() == 0.0
        assert r.trace_defect < 1e-12


def test_engines_agree(hbn, grid24, berry48):
    from valleysim.observables import berry_curvature
    berry = berry_curvature(hbn, grid24)
    for t2 in (math.inf, 5.0):
        cfg = dict(t2_fs=t2)
        r1 = propagate(hbn, grid24, sigma_minus(),
                       PropagationConfig(engine="numpy", **cfg), berry=berry)
        r2 = propagate(hbn, grid24, sigma_minus(),
                       PropagationConfig(engine="numba", **cfg), berry=berry)
        assert np.abs(r1.final_rho - r2.final_rho).max() < 1e-13
        np.testing.assert_allclose(r1.sigma, r2.sigma, atol=1e-15)


def test_conservation(hbn, grid24):
    r = propagate(hbn, grid24, sigma_minus(), PropagationConfig(engine="numpy"))
    assert r.trace_defect < 1e-10
    assert r.herm_defect < 1e-12
    assert r.final_populations.min() > -1e-8
    assert r.final_populations.max() < 1 + 1e-8


def test_circular_pulse_polarizes_one_valley(hbn, grid24):
    r = propagate(hbn, grid24, sigma_minus(), PropagationConfig(engine="numba"))
    va = valley_asymmetry(r.final_populations, grid24, bands=(1,))
    assert va.a_v < -0.5  # sigma- populates the K' half
    plus = vs.PulseTrain([vs.PulseSpec(carrier_ev=6.0, fwhm_fs=1.15,
                                       field_v_per_angstrom=0.1,
                                       polarization="sigma+")])
    rp = propagate(hbn, grid24, plus, PropagationConfig(engine="numba"))
    vap = valley_asymmetry(rp.final_populations, grid24, bands=(1,))
    assert vap.a_v == pytest.approx(-va.a_v, abs=1e-6)


def test_linear_pulse_time_reversal_pairing(hbn, grid24):
    train = vs.PulseTrain([vs.PulseSpec(carrier_ev=6.0, fwhm_fs=1.15,
                                        field_v_per_angstrom=0.1,
                                        polarization="y")])
    r = propagate(hbn, grid24, train, PropagationConfig(engine="numba"))
    inv = grid24.inversion_map()
    fc = r.final_populations[:, 1]
    assert np.abs(fc - fc[inv]).max() < 1e-6


def test_dt_halving_convergence(hbn, grid24):
    from valleysim.observables import berry_curvature
    berry = berry_curvature(hbn, grid24)
    r1 = propagate(hbn, grid24, sigma_minus(),
                   PropagationConfig(engine="numba", dt_au=0.1), berry=berry)
    r2 = propagate(hbn, grid24, sigma_minus(),
                   PropagationConfig(engine="numba", dt_au=0.05), berry=berry)
    assert abs(r1.sigma[-1] / r2.sigma[-1] - 1.0) < 1e-3


def test_dephasing_damps_coherence(hbn, grid24):
    r_inf = propagate(hbn, grid24, sigma_minus(0.01),
                      PropagationConfig(engine="numba"))
    r_t2 = propagate(hbn, grid24, sigma_minus(0.01),
                     PropagationConfig(engine="numba", t2_fs=2.0))
    coh_inf = np.abs(r_inf.final_rho[:, 0, 1]).max()
    coh_t2 = np.abs(r_t2.final_rho[:, 0, 1]).max()
    assert coh_t2 < 0.2 * coh_inf
    # dephasing does not create population out of nothing
    assert r_t2.trace_defect < 1e-10


def test_weak_field_matches_lopt(hbn, grid24):
    from valleysim.lopt import lopt_populations
    train = sigma_minus(0.001)
    r = propagate(hbn, grid24, train, PropagationConfig(engine="numba"))
    fl = lopt_populations(hbn, grid24, train)
    pc = r.final_populations[:, 1]
    rms = np.sqrt(np.mean((pc - fl[:, 1]) ** 2)) / pc.max()
    assert rms < 1e-3


def test_velocity_gauge_oracle(hbn):
    # dipole-free cross-check: integrate i hbar dpsi/dt = H(k + A/hbar) psi
    # directly and compare conduction populations at mirrored k-points
    from scipy.integrate import solve_ivp
    train = sigma_minus(0.01)
    t0, t1 = train.time_span()
    lat = hbn.lattice

    def run(k):
        es = eigensystem_at(hbn, k)
        psi0 = es.states[:, 0].astype(complex)

        def rhs(t, y):
            a = train.afield(np.array([t]))[0]
            h = hamiltonian_at(hbn, k + a / HBAR_EV_FS)
            return (-1j / HBAR_EV_FS) * (h @ y)

        sol = solve_ivp(rhs, (t0, t1), psi0, rtol=1e-10, atol=1e-12,
                        method="DOP853")
        return abs(np.vdot(es.states[:, 1], sol.y[:, -1])) ** 2

    from valleysim.lopt import lopt_amplitude
    for d in (0.15, 0.35):
        k = lat.K + np.array([d, 0.0])
        for q in (k, -k):
            direct = run(q)
            lopt = abs(lopt_amplitude(hbn, q, train)[1]) ** 2
            assert direct == pytest.approx(lopt, rel=5e-3)


def test_numba_requires_two_band(grid24):
    model = threeband_model()
    grid = vs.KGrid.build(model.lattice, 6, 6)
    with pytest.raises(ConfigError):
        propagate(model, grid, sigma_minus(), PropagationConfig(engine="numba"))


def test_three_band_numpy_conserves_trace():
    model = threeband_model()
    grid = vs.KGrid.build(model.lattice, 12, 12)
    train = vs.PulseTrain([vs.PulseSpec(carrier_ev=5.7, fwhm_fs=1.15,
                                        field_v_per_angstrom=0.1,
                                        polarization="sigma-")])
    r = propagate(model, grid, train, PropagationConfig(engine="numpy"))
    assert r.trace_defect < 1e-8
    assert r.filled_bands == (0,) and r.conduction_bands == (1, 2)
    assert r.final_populations[:, 1:].max() > 1e-4  # something was excited


def test_snapshots(hbn, grid24):
    r = propagate(hbn, grid24, sigma_minus(),
                  PropagationConfig(engine="numpy", store_snapshots=True,
                                    record_stride=200))
    assert len(r.snapshots) >= 2
    t, rho = r.snapshots[0]
    assert rho.shape == (grid24.nk, 2, 2)
