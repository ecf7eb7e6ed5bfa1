"""Tight-binding models of hexagonal monolayers.

Two model families are supported: an analytic particle-hole-symmetric
two-band honeycomb model (hBN-like) and a general multi-band model built
from real-space Wannier matrices.  Both expose Hamiltonians, eigensystems
and interband dipole couplings at arbitrary crystal momenta, plus a fully
vectorized evaluation path used by the propagator.

Conventions: energies in eV, lengths in Angstrom, momenta in 1/Angstrom.
The Bloch sum uses the periodic gauge (lattice-vector structure factors),
so H(k + G) = H(k) exactly for any reciprocal lattice vector G.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneracyError, ValidationError

DEGENERACY_TOL_EV = 1e-6  # refuse off-diagonal dipoles below this gap
_FLAG_TOL_EV = 1e-9       # eigensystem degeneracy flag


@dataclass(frozen=True)
class CrystalLattice:
    """2D Bravais lattice with reciprocal vectors and the two valley momenta."""

    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    K: np.ndarray
    Kprime: np.ndarray

    @classmethod
    def hexagonal(cls, a: float) -> "CrystalLattice":
        """Hexagonal lattice with lattice constant a (Angstrom)."""
        a1 = np.array([a, 0.0])
        a2 = np.array([a / 2.0, a * np.sqrt(3.0) / 2.0])
        b1, b2 = reciprocal_vectors(a1, a2)
        K = (2.0 * b1 + b2) / 3.0
        return cls(a1=a1, a2=a2, b1=b1, b2=b2, K=K, Kprime=-K)

    @property
    def bz_area(self) -> float:
        return abs(self.b1[0] * self.b2[1] - self.b1[1] * self.b2[0])


def reciprocal_vectors(a1, a2):
    """b_i with a_i . b_j = 2 pi delta_ij."""
    amat = np.array([a1, a2], dtype=float)
    bmat = 2.0 * np.pi * np.linalg.inv(amat)  # columns are b1, b2
    return bmat[:, 0].copy(), bmat[:, 1].copy()


@dataclass(frozen=True)
class TwoBandModel:
    """Honeycomb two-band model H = [[D/2, f], [f*, -D/2]].

    f(k) = t sum_i exp(i k . c_i) with c_i = {0, a1 - a2, -a2}, the periodic-
    gauge form of the nearest-neighbour structure factor.  f vanishes at the
    BZ corners by C3 symmetry, so the direct gap at K equals the onsite
    asymmetry exactly.
    """

    lattice: CrystalLattice
    gap_ev: float
    hopping_ev: float

    @property
    def num_bands(self) -> int:
        return 2

    @property
    def cvecs(self) -> np.ndarray:
        """Structure-factor lattice vectors, shape (3, 2)."""
        return np.array([
            [0.0, 0.0],
            self.lattice.a1 - self.lattice.a2,
            -self.lattice.a2,
        ])

    @property
    def neighbor_vectors(self) -> np.ndarray:
        """Nearest-neighbour bond vectors delta_1..3 (Angstrom)."""
        a1, a2 = self.lattice.a1, self.lattice.a2
        d1 = (a1 + a2) / 3.0
        return np.array([d1, d1 + self.cvecs[1], d1 + self.cvecs[2]])

    def structure_factor(self, k):
        k = np.asarray(k, dtype=float)
        phases = np.exp(1j * np.tensordot(k, self.cvecs.T, axes=([-1], [0])))
        return self.hopping_ev * phases.sum(axis=-1)

    def structure_factor_gradient(self, k):
        """grad_k f, shape (..., 2)."""
        k = np.asarray(k, dtype=float)
        phases = np.exp(1j * np.tensordot(k, self.cvecs.T, axes=([-1], [0])))
        return 1j * self.hopping_ev * np.tensordot(phases, self.cvecs, axes=([-1], [0]))


def hexagonal_bn(a: float = 2.50, gap_ev: float = 6.0, hopping_ev: float = 2.3) -> TwoBandModel:
    """The hBN-like default: 6 eV direct gap at K, pi-band-scale hopping."""
    return TwoBandModel(lattice=CrystalLattice.hexagonal(a), gap_ev=gap_ev, hopping_ev=hopping_ev)


@dataclass(frozen=True)
class WannierModel:
    """Multi-band model from real-space Hamiltonian (and position) matrices.

    h_r[m] is the num_bands x num_bands block for lattice vector rpoints[m]
    (integer triple, Cartesian via the rows of lattice_vectors).  r_r, when
    present, holds the three position-operator blocks per R in Angstrom.
    """

    num_bands: int
    rpoints: np.ndarray            # (M, 3) int
    degeneracies: np.ndarray       # (M,) int
    h_r: np.ndarray                # (M, N, N) complex, eV
    r_r: np.ndarray | None = None  # (M, 3, N, N) complex, Angstrom
    lattice_vectors: np.ndarray | None = None  # (3, 3) rows, Angstrom
    comment: str = "valleysim wannier model"

    def __post_init__(self):
        if np.any(self.degeneracies <= 0):
            raise ValidationError("degeneracies must be positive integers")

    @property
    def lattice(self) -> CrystalLattice:
        """In-plane lattice (assumes a3 out of plane)."""
        a1 = np.asarray(self.lattice_vectors[0][:2], dtype=float)
        a2 = np.asarray(self.lattice_vectors[1][:2], dtype=float)
        b1, b2 = reciprocal_vectors(a1, a2)
        K = (2.0 * b1 + b2) / 3.0
        return CrystalLattice(a1=a1, a2=a2, b1=b1, b2=b2, K=K, Kprime=-K)

    def rcart(self) -> np.ndarray:
        """In-plane Cartesian R vectors, shape (M, 2)."""
        if self.lattice_vectors is None:
            raise ValidationError("WannierModel has no lattice vectors attached")
        return (self.rpoints.astype(float) @ self.lattice_vectors)[:, :2]

    def equal_to(self, other: "WannierModel", tol: float = 0.0) -> bool:
        """Structural equality up to R-point ordering (used by round-trip tests)."""
        if self.num_bands != other.num_bands or len(self.rpoints) != len(other.rpoints):
            return False
        order_a = np.lexsort(self.rpoints.T)
        order_b = np.lexsort(other.rpoints.T)
        if not np.array_equal(self.rpoints[order_a], other.rpoints[order_b]):
            return False
        if not np.array_equal(self.degeneracies[order_a], other.degeneracies[order_b]):
            return False
        if not np.allclose(self.h_r[order_a], other.h_r[order_b], rtol=0, atol=tol):
            return False
        if (self.r_r is None) != (other.r_r is None):
            return False
        if self.r_r is not None and not np.allclose(
                self.r_r[order_a], other.r_r[order_b], rtol=0, atol=tol):
            return False
        if (self.lattice_vectors is None) != (other.lattice_vectors is None):
            return False
        if self.lattice_vectors is not None and not np.allclose(
                self.lattice_vectors, other.lattice_vectors, rtol=0, atol=tol):
            return False
        return True


@dataclass
class Eigensystem:
    """Eigen-decomposition at one k: ascending energies, gauge-fixed states."""

    energies: np.ndarray   # (N,) eV
    states: np.ndarray     # (N, N), columns are eigenvectors
    k: np.ndarray          # (2,)
    degenerate: bool = False


def hamiltonian_at(model, k) -> np.ndarray:
    """H(k), Hermitian, in eV.  k may carry leading batch axes (..., 2)."""
    k = np.asarray(k, dtype=float)
    if isinstance(model, TwoBandModel):
        f = model.structure_factor(k)
        h = np.zeros(k.shape[:-1] + (2, 2), dtype=complex)
        h[..., 0, 0] = model.gap_ev / 2.0
        h[..., 1, 1] = -model.gap_ev / 2.0
        h[..., 0, 1] = f
        h[..., 1, 0] = np.conj(f)
        return h
    if isinstance(model, WannierModel):
        rc = model.rcart()
        phases = np.exp(1j * np.tensordot(k, rc.T, axes=([-1], [0])))
        phases = phases / model.degeneracies
        h = np.tensordot(phases, model.h_r, axes=([-1], [0]))
        return 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    raise TypeError(f"unsupported model type {type(model).__name__}")


def hamiltonian_gradient_at(model, k) -> np.ndarray:
    """grad_k H, shape (..., 2, N, N), eV*Angstrom."""
    k = np.asarray(k, dtype=float)
    if isinstance(model, TwoBandModel):
        gf = model.structure_factor_gradient(k)
        out = np.zeros(k.shape[:-1] + (2, 2, 2), dtype=complex)
        out[..., 0, 0, 1] = gf[..., 0]
        out[..., 0, 1, 0] = np.conj(gf[..., 0])
        out[..., 1, 0, 1] = gf[..., 1]
        out[..., 1, 1, 0] = np.conj(gf[..., 1])
        return out
    if isinstance(model, WannierModel):
        rc = model.rcart()
        phases = np.exp(1j * np.tensordot(k, rc.T, axes=([-1], [0]))) / model.degeneracies
        terms = 1j * rc[:, :, None, None] * model.h_r[:, None, :, :]  # (M, 2, N, N)
        out = np.tensordot(phases, terms, axes=([-1], [0]))
        # hermitize each Cartesian component
        return 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))
    raise TypeError(f"unsupported model type {type(model).__name__}")


def _gauge_fix(states):
    """Rotate each eigenvector so its largest-|.| component is real positive.

    Works on stacked (..., N, N) column matrices in place-free fashion.
    """
    mags = np.abs(states)
    idx = np.argmax(mags, axis=-2)  # (..., N) row index of max per column
    lead = np.take_along_axis(states, idx[..., None, :], axis=-2)[..., 0, :]
    phase = lead / np.where(np.abs(lead) == 0, 1.0, np.abs(lead))
    return states * np.conj(phase)[..., None, :]


def eigensystem_at(model, k) -> Eigensystem:
    """Ascending-ordered eigensystem with the deterministic gauge."""
    k = np.asarray(k, dtype=float)
    h = hamiltonian_at(model, k)
    energies, states = np.linalg.eigh(h)
    states = _gauge_fix(states)
    gaps = np.diff(energies)
    return Eigensystem(energies=energies, states=states, k=k,
                       degenerate=bool(np.any(np.abs(gaps) < _FLAG_TOL_EV)))


def eigensystem_grid(model, kpts):
    """Vectorized eigensystems: kpts (..., 2) -> (energies (..., N), states (..., N, N))."""
    h = hamiltonian_at(model, kpts)
    energies, states = np.linalg.eigh(h)
    return energies, _gauge_fix(states)


def _twoband_closed_form(model: TwoBandModel, kpts):
    """Closed-form bands and dipoles of the two-band model, fully vectorized.

    Eigenvectors (never singular for gap > 0):
      |v> = (-f, e+m)/sqrt(2e(e+m)),  |c> = (e+m, f*)/sqrt(2e(e+m)),
    which already satisfy the largest-component-real-positive gauge.
    """
    m = model.gap_ev / 2.0
    f = model.structure_factor(kpts)
    gf = model.structure_factor_gradient(kpts)  # (..., 2)
    e = np.sqrt(m * m + np.abs(f) ** 2)
    energies = np.stack([-e, e], axis=-1)
    # d_cv = i[(e+m)^2 grad f - f^2 grad f*] / (4 e^2 (e+m)), e Angstrom
    denom = (4.0 * e * e * (e + m))[..., None]
    d_cv = 1j * ((e + m)[..., None] ** 2 * gf - (f[..., None] ** 2) * np.conj(gf)) / denom
    d = np.zeros(np.shape(f) + (2, 2, 2), dtype=complex)  # (..., 2comp, 2, 2)
    # band order is (v, c) ascending
    d[..., 0, 1, 0] = d_cv[..., 0]
    d[..., 1, 1, 0] = d_cv[..., 1]
    d[..., 0, 0, 1] = np.conj(d_cv[..., 0])
    d[..., 1, 0, 1] = np.conj(d_cv[..., 1])
    return energies, d


def bands_and_dipoles(model, kpts, check_degeneracy: bool = True):
    """Energies (..., N) in eV and dipoles (..., 2, N, N) in e*Angstrom.

    The dipole block d[..., j, n, m] is <n| r_j |m> with zero diagonal
    (intraband connection dropped by convention).  This is the evaluation
    path shared by the propagator and the perturbative reference.
    """
    kpts = np.asarray(kpts, dtype=float)
    if isinstance(model, TwoBandModel):
        return _twoband_closed_form(model, kpts)

    energies, states = eigensystem_grid(model, kpts)
    n = energies.shape[-1]
    de = energies[..., None, :] - energies[..., :, None]  # e_m - e_n at [n, m]
    off = ~np.eye(n, dtype=bool)
    if check_degeneracy and np.any(np.abs(de[..., off]) < DEGENERACY_TOL_EV):
        raise DegeneracyError(
            "near-degenerate bands encountered while building interband dipoles")
    grad_h = hamiltonian_gradient_at(model, kpts)  # (..., 2, N, N)
    u = states
    udag = np.conj(np.swapaxes(u, -1, -2))
    hbar_mat = udag[..., None, :, :] @ grad_h @ u[..., None, :, :]  # (..., 2, N, N)
    # zero the dipole wherever the gap is too small to divide by (diagonal,
    # and degenerate pairs when the check is disabled)
    usable = (off & (np.abs(de) > DEGENERACY_TOL_EV * 1e-3))[..., None, :, :]
    safe_de = np.where(usable, de[..., None, :, :], 1.0)
    d = np.where(usable, hbar_mat / (1j * safe_de), 0.0)
    if isinstance(model, WannierModel) and model.r_r is not None:
        rc = model.rcart()
        phases = np.exp(1j * np.tensordot(kpts, rc.T, axes=([-1], [0]))) / model.degeneracies
        a_w = np.tensordot(phases, model.r_r[:, :2], axes=([-1], [0]))  # (..., 2, N, N)
        a_w = 0.5 * (a_w + np.conj(np.swapaxes(a_w, -1, -2)))
        a_rot = udag[..., None, :, :] @ a_w @ u[..., None, :, :]
        d = d + np.where(off, a_rot, 0.0)
    return energies, d


def dipole_matrix_at(model, k) -> np.ndarray:
    """Interband dipole matrices (d^x, d^y) at a single k, shape (2, N, N)."""
    k = np.asarray(k, dtype=float)
    energies, d = bands_and_dipoles(model, k)
    return d


def band_path(model, waypoints, samples_per_segment: int):
    """Piecewise-linear k-path energies.

    Returns (s, kpts, energies): cumulative path length (1/Angstrom),
    sampled momenta and ascending band energies at each sample.
    """
    waypoints = [np.asarray(w, dtype=float) for w in waypoints]
    if len(waypoints) < 2:
        raise ValidationError("band_path needs at least two waypoints")
    kpts = []
    for start, stop in zip(waypoints[:-1], waypoints[1:]):
        seg = np.linspace(0.0, 1.0, samples_per_segment)
        pts = start[None, :] + seg[:, None] * (stop - start)[None, :]
        if kpts:
            pts = pts[1:]  # avoid duplicating shared waypoints
        kpts.append(pts)
    kpts = np.concatenate(kpts, axis=0)
    ds = np.linalg.norm(np.diff(kpts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(ds)])
    energies, _ = eigensystem_grid(model, kpts)
    return s, kpts, energies
