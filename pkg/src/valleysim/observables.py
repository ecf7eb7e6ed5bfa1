"""Berry curvature, valley-resolved populations and the valley Hall signal."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PlaquetteSingular, ShapeMismatch, ValidationError
from .kgrid import KGrid
from .lattice import eigensystem_grid

LINK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class BerryMap:
    """Per-band plaquette Berry curvature on a k-grid (Angstrom^2)."""

    curvature: np.ndarray      # (n1*n2, N)
    chern: np.ndarray          # (N,)
    grid: KGrid


@dataclass(frozen=True)
class ValleyAsymmetry:
    n_k: float
    n_kprime: float
    degenerate: bool = False   # set when there is no population at all

    @property
    def a_v(self) -> float:
        total = self.n_k + self.n_kprime
        if total == 0.0:
            return 0.0
        return (self.n_k - self.n_kprime) / total


def berry_curvature(model, grid: KGrid) -> BerryMap:
    """Gauge-invariant plaquette (lattice field-strength) curvature.

    For each grid cell the four link overlaps <u(k1)|u(k2)>... are multiplied
    and the plaquette phase divided by the cell area.  The per-band sum of
    plaquette phases over the whole grid is 2 pi times the Chern number.
    """
    n1, n2 = grid.n1, grid.n2
    kpts = grid.kpoints.reshape(n1, n2, 2)
    _, states = eigensystem_grid(model, kpts)  # (n1, n2, N, N)

    # link overlap along axis: <u(k)|u(k+dk)> per band, periodic wraparound
    def links(axis):
        rolled = np.roll(states, -1, axis=axis)
        return np.einsum("ijkn,ijkn->ijn", np.conj(states), rolled)

    ux = links(0)
    uy = links(1)
    for u in (ux, uy):
        if np.any(np.abs(u) < LINK_TOL):
            raise PlaquetteSingular("vanishing link overlap: band crossing inside a cell")
    ux /= np.abs(ux)
    uy /= np.abs(uy)
    # plaquette at (i, j): U1(i,j) U2(i+1,j) U1(i,j+1)^-1 U2(i,j)^-1
    loop = ux * np.roll(uy, -1, axis=0) * np.conj(np.roll(ux, -1, axis=1)) * np.conj(uy)
    phase = np.angle(loop)  # (-pi, pi] per plaquette per band
    cell_area = grid.lattice.bz_area / (n1 * n2)
    curvature = phase / cell_area
    chern = phase.reshape(-1, phase.shape[-1]).sum(axis=0) / (2.0 * np.pi)
    return BerryMap(curvature=curvature.reshape(n1 * n2, -1), chern=chern, grid=grid)


def node_curvature(berry: BerryMap, grid: KGrid) -> np.ndarray:
    """Plaquette curvature averaged onto the grid nodes, (nk, N).

    The plaquette field sits on cell corners, so pairing it directly with
    node populations biases Brillouin-zone sums at first order in the grid
    spacing (a linearly driven system then shows a spurious Hall signal of
    a few percent).  Averaging the four plaquettes around each node gives a
    field that is exactly antisymmetric under k -> -k on the grid, while
    leaving the Chern sums unchanged.
    """
    w = berry.curvature.reshape(grid.n1, grid.n2, -1)
    w = (w + np.roll(w, 1, axis=0) + np.roll(w, 1, axis=1)
         + np.roll(np.roll(w, 1, axis=0), 1, axis=1)) / 4.0
    return w.reshape(grid.nk, -1)


def vhc(populations, berry: BerryMap, grid: KGrid, bands=None) -> float:
    """Valley Hall conductivity, Eq.-style weighted Riemann sum (arb. units).

    populations: (nk, N) band occupations; bands selects the (conduction)
    subset entering the sum, default all supplied bands; the curvature is
    node-averaged (see node_curvature).  The reduction uses an exactly
    rounded summation, so the result does not depend on term order or
    worker count.
    """
    populations = np.asarray(populations, dtype=float)
    if populations.ndim == 1:
        populations = populations[:, None]
    if populations.shape[0] != grid.nk or berry.curvature.shape[0] != grid.nk:
        raise ShapeMismatch("populations/curvature/grid sizes disagree")
    if berry.curvature.shape[1] < populations.shape[1]:
        raise ShapeMismatch("curvature has fewer bands than populations")
    if bands is None:
        bands = range(populations.shape[1])
    curvature = node_curvature(berry, grid)
    terms = []
    for n in bands:
        terms.append(populations[:, n] * curvature[:, n] * grid.weights)
    return math.fsum(np.concatenate(terms).tolist())


def valley_asymmetry(populations, grid: KGrid, bands=None) -> ValleyAsymmetry:
    """Integrated conduction population per valley half and its asymmetry."""
    populations = np.asarray(populations, dtype=float)
    if populations.ndim == 1:
        populations = populations[:, None]
    if populations.shape[0] != grid.nk:
        raise ShapeMismatch("populations/grid sizes disagree")
    if bands is None:
        bands = range(populations.shape[1])
    pop = sum(populations[:, n] for n in bands) * grid.weights
    lab = grid.valley_labels
    n_k = math.fsum((pop * (lab == 1)).tolist()) + 0.5 * math.fsum((pop * (lab == 0)).tolist())
    n_kp = math.fsum((pop * (lab == -1)).tolist()) + 0.5 * math.fsum((pop * (lab == 0)).tolist())
    total = n_k + n_kp
    return ValleyAsymmetry(n_k=n_k, n_kprime=n_kp, degenerate=(total <= 0.0))


def normalize_population_map(values, mode: str):
    """Normalization modes for exported k-maps.

    raw: untouched; global-max: divide by the map maximum; per-point: each
    k-point's band values divided by their sum (the per-k convention used
    for BZ population figures).  All modes are idempotent.
    """
    values = np.asarray(values, dtype=float)
    if mode == "raw":
        return values
    if mode == "global-max":
        peak = values.max()
        return values / peak if peak > 0 else values
    if mode == "per-point":
        totals = values.sum(axis=-1, keepdims=True)
        safe = np.where(totals > 0, totals, 1.0)
        return values / safe
    raise ValidationError(f"unknown normalization mode {mode!r}")
