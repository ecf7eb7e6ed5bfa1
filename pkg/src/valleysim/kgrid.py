"""Uniform Monkhorst-Pack sampling of the first Brillouin zone."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .lattice import CrystalLattice


@dataclass(frozen=True, eq=False)
class KGrid:
    """Gamma-centred n1 x n2 grid with weights and valley labels.

    Labels: +1 for the K half, -1 for the K' half (Voronoi proximity under
    the periodic metric), 0 for points exactly equidistant (Gamma, M lines);
    those carry half weight in each valley when integrating valley shares.
    """

    lattice: CrystalLattice
    n1: int
    n2: int
    kpoints: np.ndarray        # (n1*n2, 2), 1/Angstrom
    weights: np.ndarray        # (n1*n2,), Angstrom^-2; sums to BZ area
    valley_labels: np.ndarray  # (n1*n2,), int8

    @classmethod
    def build(cls, lattice: CrystalLattice, n1: int, n2: int) -> "KGrid":
        if n1 < 1 or n2 < 1:
            raise ValidationError("grid dimensions must be positive")
        i = np.arange(n1)
        j = np.arange(n2)
        fi, fj = np.meshgrid(i / n1, j / n2, indexing="ij")
        kpts = fi.reshape(-1, 1) * lattice.b1 + fj.reshape(-1, 1) * lattice.b2
        area = lattice.bz_area
        weights = np.full(n1 * n2, area / (n1 * n2))
        labels = _valley_labels(kpts, lattice)
        return cls(lattice=lattice, n1=n1, n2=n2, kpoints=kpts,
                   weights=weights, valley_labels=labels)

    @property
    def nk(self) -> int:
        return self.n1 * self.n2

    def inversion_map(self) -> np.ndarray:
        """Index permutation sending grid point k to -k (mod G)."""
        i, j = np.divmod(np.arange(self.nk), self.n2)
        return ((-i) % self.n1) * self.n2 + (-j) % self.n2

    def wrapped_kpoints(self) -> np.ndarray:
        """Grid momenta folded into the first (Wigner-Seitz) Brillouin zone."""
        return wrap_to_bz(self.kpoints, self.lattice)


def periodic_distance(kpts, target, lattice: CrystalLattice) -> np.ndarray:
    """min_G |k - target - G| over all reciprocal lattice vectors."""
    kpts = np.atleast_2d(np.asarray(kpts, dtype=float))
    bmat = np.stack([lattice.b1, lattice.b2])  # rows
    frac = (kpts - target[None, :]) @ np.linalg.inv(bmat)
    frac -= np.floor(frac)  # wrap into [0, 1)^2, then check the 4 images
    shifts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    d = (frac[:, None, :] - shifts[None, :, :]) @ bmat
    return np.linalg.norm(d, axis=-1).min(axis=1)


def _valley_labels(kpts, lattice: CrystalLattice) -> np.ndarray:
    d_k = periodic_distance(kpts, lattice.K, lattice)
    d_kp = periodic_distance(kpts, lattice.Kprime, lattice)
    s = d_kp - d_k
    labels = np.zeros(len(kpts), dtype=np.int8)
    tol = 1e-9 * max(np.linalg.norm(lattice.b1), 1.0)
    labels[s > tol] = 1
    labels[s < -tol] = -1
    return labels


def wrap_to_bz(kpts, lattice: CrystalLattice) -> np.ndarray:
    """Shift each k by the reciprocal vector minimizing |k - G|."""
    kpts = np.atleast_2d(np.asarray(kpts, dtype=float))
    shifts = np.array([m * lattice.b1 + n * lattice.b2
                       for m in (-2, -1, 0, 1, 2) for n in (-2, -1, 0, 1, 2)])
    d = kpts[:, None, :] - shifts[None, :, :]
    best = np.argmin(np.linalg.norm(d, axis=-1), axis=1)
    return d[np.arange(len(kpts)), best]
