import math

import numpy as np
import pytest

import valleysim as vs
from valleysim.errors import ShapeMismatch, ValidationError, WindowTooSmall
from valleysim.propagator import PropagationConfig
from valleysim.scans import (
    DelayScan, fit_t2, scan_delay, switch_protocol, switch_train,
)
from valleysim.units import HBAR_EV_FS


def base_pulse(F0=0.05):
    return vs.PulseSpec(carrier_ev=6.0, fwhm_fs=1.15,
                        field_v_per_angstrom=F0, polarization="y")


def test_delay_scan_requires_increasing_taus():
    with pytest.raises(ValidationError):
        DelayScan(np.array([1.0, 0.5]), np.zeros(2), {})


def test_scan_delay_runs(hbn, grid24, berry48):
    from valleysim.observables import berry_curvature
    berry = berry_curvature(hbn, grid24)
    taus = np.array([4.88, 5.16])
    scan = scan_delay(hbn, grid24, base_pulse(), taus,
                      config=PropagationConfig(engine="numba"), berry=berry)
    assert scan.sigma[0] * scan.sigma[1] < 0
    assert scan.metadata["fwhm_fs"] == 1.15


def test_fit_exact_exponential_recovery():
    taus = np.arange(0.2, 10.001, 0.08)
    ref = np.sin(taus * 9.1) / (1.0 + taus)
    meta = {"fwhm_fs": 1.15}
    for t2 in (3.0, 10.0, 30.0, 100.0):
        fit = fit_t2(DelayScan(taus, ref * np.exp(-taus / t2), meta),
                     DelayScan(taus, ref, meta))
        assert fit.t2_fs == pytest.approx(t2, abs=1e-5)
        assert not fit.no_decay


def test_fit_no_decay_sentinel():
    taus = np.arange(0.2, 10.001, 0.08)
    ref = np.sin(taus * 9.1) / (1.0 + taus)
    meta = {"fwhm_fs": 1.15}
    fit = fit_t2(DelayScan(taus, ref.copy(), meta), DelayScan(taus, ref, meta))
    assert fit.no_decay
    assert math.isinf(fit.t2_fs)


def test_fit_window_too_small():
    taus = np.arange(0.2, 2.0, 0.08)  # everything inside 2*fwhm of overlap
    ref = np.sin(taus * 9.1)
    meta = {"fwhm_fs": 1.15}
    with pytest.raises(WindowTooSmall):
        fit_t2(DelayScan(taus, ref, meta), DelayScan(taus, ref, meta))


def test_fit_requires_shared_grid():
    taus = np.arange(0.2, 10.001, 0.08)
    meta = {"fwhm_fs": 1.15}
    with pytest.raises(ShapeMismatch):
        fit_t2(DelayScan(taus, np.zeros_like(taus), meta),
               DelayScan(taus + 0.01, np.zeros_like(taus), meta))


def test_fit_scale_is_profiled():
    # a pure amplitude mismatch without decay must not masquerade as T2
    taus = np.arange(0.2, 10.001, 0.08)
    ref = np.sin(taus * 9.1) / (1.0 + taus)
    meta = {"fwhm_fs": 1.15}
    fit = fit_t2(DelayScan(taus, 3.7 * ref, meta), DelayScan(taus, ref, meta))
    assert fit.no_decay
    assert fit.scale == pytest.approx(3.7, rel=1e-6)


def test_switch_train_layout():
    delays = [4.8, 9.6, 14.8]
    train = switch_train(base_pulse(), delays, ("y", "x", "y", "x"))
    centers = [p.center_fs for p in train.pulses]
    assert centers == [0.0, 4.8, 9.6, 14.8]
    pols = [p.polarization for p in train.pulses]
    assert np.allclose(pols[0], [0, 1]) and np.allclose(pols[1], [1, 0])
    with pytest.raises(ValidationError):
        switch_train(base_pulse(), [1.0], ("y", "x", "y"))


def test_switch_protocol_stages(hbn, grid24):
    from valleysim.observables import berry_curvature
    berry = berry_curvature(hbn, grid24)
    period = 2 * np.pi * HBAR_EV_FS / 6.0
    res = switch_protocol(hbn, grid24, base_pulse(0.1),
                          [7 * period, 14 * period, 21.5 * period],
                          ("y", "x", "y", "x"), t2_fs=math.inf,
                          config=PropagationConfig(engine="numba"), berry=berry)
    s = [st.sigma_final for st in res.stages]
    assert [st.n_pulses for st in res.stages] == [1, 2, 3, 4]
    assert abs(s[0]) < 0.25 * abs(s[1])  # linear pulse: near-zero, grid-limited
    assert abs(s[2]) < 0.1 * abs(s[1])   # third pulse cancels
    assert s[3] * s[1] < 0               # fourth flips the sign
    assert len(res.times_fs) == len(res.sigma_t)
    assert res.stages[1].populations.shape == (grid24.nk, 2)
