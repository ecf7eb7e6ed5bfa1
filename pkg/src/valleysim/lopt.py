"""Lowest-order perturbation theory reference.

First-order interband amplitude per conduction band c from filled band v:

    a_c(k) = -(i/hbar) d_cv(k) . E~(w_cv(k)),   f_c(k) = sum_v |a_c|^2

with E~ the complex Fourier amplitude of the whole train at the transition
energy.  Intraband motion is neglected (k fixed) and no rotating-wave
approximation is made; the full broadband spectrum enters.
"""

from __future__ import annotations

import numpy as np

from .fields import PulseTrain, PulseSpec
from .kgrid import KGrid
from .lattice import bands_and_dipoles
from .observables import BerryMap, berry_curvature, vhc
from .propagator import split_bands
from .units import HBAR_EV_FS


def lopt_amplitude(model, k, train: PulseTrain, filled=(0,)):
    """Complex first-order amplitudes at a single k, shape (N,) (zero on filled)."""
    k = np.asarray(k, dtype=float)
    energies, d = bands_and_dipoles(model, k[None, :])
    nb = energies.shape[1]
    amp = np.zeros(nb, dtype=complex)
    for c in range(nb):
        if c in filled:
            continue
        for v in filled:
            w_cv = energies[0, c] - energies[0, v]
            spec = train.spectrum(np.array([w_cv]))[0]
            d_cv = np.array([d[0, 0, c, v], d[0, 1, c, v]])
            amp[c] += (-1j / HBAR_EV_FS) * (d_cv @ spec)
    return amp


def lopt_populations(model, grid: KGrid, train: PulseTrain, filled=(0,)):
    """f_n(k) to first order on the whole grid, shape (nk, N)."""
    energies, d = bands_and_dipoles(model, grid.kpoints)
    nk, nb = energies.shape
    pops = np.zeros((nk, nb))
    for c in range(nb):
        if c in filled:
            continue
        total = np.zeros(nk)
        for v in filled:
            w_cv = energies[:, c] - energies[:, v]
            spec = train.spectrum(w_cv)  # (nk, 2)
            d_cv = np.stack([d[:, 0, c, v], d[:, 1, c, v]], axis=-1)
            amp = (-1j / HBAR_EV_FS) * np.einsum("kj,kj->k", d_cv, spec)
            total += np.abs(amp) ** 2
        pops[:, c] = total
    return pops


def perpendicular_pair(base: PulseSpec, tau_fs: float) -> PulseTrain:
    """First y-polarized pulse at t=0, second x-polarized at t=tau."""
    from dataclasses import replace
    p1 = replace(base, polarization="y", center_fs=0.0)
    p2 = replace(base, polarization="x", center_fs=tau_fs)
    return PulseTrain([p1, p2])


def sigma_ref(model, grid: KGrid, base_pulse: PulseSpec, taus,
              berry: BerryMap | None = None, fermi_ev: float = 0.0):
    """Dephasing-free reference VHC curve over pulse delays.

    Evaluates the population integral on LOPT populations for each delay of
    the perpendicular two-pulse sequence; returns (taus, sigma) arrays.
    """
    taus = np.asarray(taus, dtype=float)
    if berry is None:
        berry = berry_curvature(model, grid)
    filled, _ = split_bands(model, grid, fermi_ev)
    energies, d = bands_and_dipoles(model, grid.kpoints)
    nk, nb = energies.shape
    conduction = [c for c in range(nb) if c not in filled]
    sig = np.zeros(len(taus))
    for it, tau in enumerate(taus):
        train = perpendicular_pair(base_pulse, float(tau))
        pops = np.zeros((nk, nb))
        for c in conduction:
            for v in filled:
                w_cv = energies[:, c] - energies[:, v]
                spec = train.spectrum(w_cv)
                d_cv = np.stack([d[:, 0, c, v], d[:, 1, c, v]], axis=-1)
                amp = (-1j / HBAR_EV_FS) * np.einsum("kj,kj->k", d_cv, spec)
                pops[:, c] += np.abs(amp) ** 2
        sig[it] = vhc(pops, berry, grid, bands=conduction)
    return taus, sig
