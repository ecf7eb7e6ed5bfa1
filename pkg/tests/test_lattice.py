import numpy as np
import pytest

import valleysim as vs
from valleysim.errors import DegeneracyError
from valleysim.lattice import (
    CrystalLattice, bands_and_dipoles, band_path, dipole_matrix_at,
    eigensystem_at, hamiltonian_at, reciprocal_vectors,
)

from conftest import spin_degenerate_model, threeband_model


def test_reciprocal_vectors_duality():
    lat = CrystalLattice.hexagonal(2.5)
    assert lat.a1 @ lat.b1 == pytest.approx(2 * np.pi, abs=1e-12)
    assert lat.a2 @ lat.b2 == pytest.approx(2 * np.pi, abs=1e-12)
    assert abs(lat.a1 @ lat.b2) < 1e-12
    assert abs(lat.a2 @ lat.b1) < 1e-12


def test_bz_area():
    lat = CrystalLattice.hexagonal(2.5)
    cell = abs(lat.a1[0] * lat.a2[1] - lat.a1[1] * lat.a2[0])
    assert lat.bz_area == pytest.approx((2 * np.pi) ** 2 / cell, rel=1e-12)


def test_k_points_are_gap_minima(hbn):
    lat = hbn.lattice
    e, _ = bands_and_dipoles(hbn, np.array([lat.K, lat.Kprime]))
    assert e[0, 1] - e[0, 0] == pytest.approx(hbn.gap_ev, abs=1e-12)
    assert e[1, 1] - e[1, 0] == pytest.approx(hbn.gap_ev, abs=1e-12)


def test_gamma_point_energies(hbn):
    # sqrt((gap/2)^2 + 9 t^2) with gap 6, t 2.3
    e, _ = bands_and_dipoles(hbn, np.zeros((1, 2)))
    expect = np.sqrt(3.0 ** 2 + 9 * 2.3 ** 2)
    assert e[0, 0] == pytest.approx(-expect, abs=1e-12)
    assert e[0, 1] == pytest.approx(expect, abs=1e-12)
    assert expect == pytest.approx(7.52396172, abs=1e-7)


def test_particle_hole_symmetry(hbn):
    rng = np.random.default_rng(7)
    kpts = rng.uniform(-2, 2, size=(64, 2))
    e, _ = bands_and_dipoles(hbn, kpts)
    np.testing.assert_allclose(e[:, 0], -e[:, 1], atol=1e-12)


def test_hamiltonian_periodicity(hbn):
    lat = hbn.lattice
    rng = np.random.default_rng(3)
    for k in rng.uniform(-2, 2, size=(50, 2)):
        h0 = hamiltonian_at(hbn, k)
        h1 = hamiltonian_at(hbn, k + lat.b1)
        h2 = hamiltonian_at(hbn, k + lat.b2)
        assert np.abs(h1 - h0).max() < 1e-9
        assert np.abs(h2 - h0).max() < 1e-9


def test_hamiltonian_hermiticity_random_k(hbn):
    rng = np.random.default_rng(11)
    models = [hbn, threeband_model()]
    for model in models:
        for k in rng.uniform(-3, 3, size=(1000, 2)):
            h = hamiltonian_at(model, k)
            assert np.abs(h - h.conj().T).max() < 1e-10


def test_circular_dipole_dominance_reciprocal(hbn):
    lat = hbn.lattice
    ep = np.array([1.0, 1.0j]) / np.sqrt(2)
    em = np.array([1.0, -1.0j]) / np.sqrt(2)
    _, d = bands_and_dipoles(hbn, np.array([lat.K, lat.Kprime]))
    dk = d[0, :, 1, 0]
    dkp = d[1, :, 1, 0]
    ratio_k = abs(dk @ ep) / abs(dk @ em)
    ratio_kp = abs(dkp @ ep) / abs(dkp @ em)
    assert ratio_k * ratio_kp == pytest.approx(1.0, rel=0.01)
    assert ratio_k > 100  # strongly one-handed at the valley


def test_closed_form_matches_generic_eigensolver(hbn):
    # the two-band fast path must agree with the gauge-fixed numeric path
    rng = np.random.default_rng(5)
    kpts = rng.uniform(-2, 2, size=(32, 2))
    e_fast, d_fast = bands_and_dipoles(hbn, kpts)
    for i, k in enumerate(kpts):
        es = eigensystem_at(hbn, k)
        np.testing.assert_allclose(es.energies, e_fast[i], atol=1e-10)
        d = dipole_matrix_at(hbn, k)
        np.testing.assert_allclose(d[:, 1, 0], d_fast[i, :, 1, 0], atol=1e-8)


def test_dipole_antihermitian_structure(hbn):
    rng = np.random.default_rng(9)
    kpts = rng.uniform(-2, 2, size=(16, 2))
    _, d = bands_and_dipoles(hbn, kpts)
    np.testing.assert_allclose(d[:, :, 0, 1], np.conj(d[:, :, 1, 0]), atol=1e-12)
    assert np.abs(d[:, :, 0, 0]).max() == 0.0
    assert np.abs(d[:, :, 1, 1]).max() == 0.0


def test_degeneracy_error_raised():
    model = spin_degenerate_model()
    with pytest.raises(DegeneracyError):
        bands_and_dipoles(model, np.array([[0.1, 0.2]]))


def test_degeneracy_check_can_be_skipped():
    model = spin_degenerate_model()
    e, _ = bands_and_dipoles(model, np.array([[0.1, 0.2]]), check_degeneracy=False)
    assert e.shape == (1, 2)


def test_band_path_shape(hbn):
    lat = hbn.lattice
    waypoints = [np.zeros(2), lat.K, (lat.b1 + lat.b2 - lat.K)]
    s, kpts, energies = band_path(hbn, waypoints, samples_per_segment=40)
    assert len(s) == len(kpts) == len(energies)
    assert np.all(np.diff(s) >= 0)
    gaps = energies[:, 1] - energies[:, 0]
    assert gaps.min() == pytest.approx(6.0, abs=1e-6)
