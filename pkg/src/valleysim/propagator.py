"""Density-matrix propagation on the k-grid in the moving (Houston) frame.

Equations of motion per k-point, in the instantaneous band basis at
kappa(t) = k + A(t)/hbar:

    d rho_nm/dt = -(i/hbar) (eps_n - eps_m) rho_nm
                  -(i/hbar) E(t) . [d, rho]_nm
                  - (1 - delta_nm) rho_nm / T2

k-points are uncoupled, so the loop is data-parallel over the grid.  Two
engines produce the same trajectory: a vectorized numpy one for arbitrary
band counts and a numba kernel specialized to the analytic two-band model
(~an order of magnitude faster, which is what makes delay scans practical).

Working units here: eV, fs, Angstrom, V/Angstrom; dt is configured in
atomic units of time to match the resolution guard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FermiLevelError, StepBlowupError
from .fields import PulseTrain
from .kgrid import KGrid
from .lattice import TwoBandModel, bands_and_dipoles
from .observables import node_curvature
from .units import AU_TIME_FS, HBAR_EV_FS

RHO_BLOWUP = 10.0
PHASE_GUARD_RAD = 0.1

try:
    from numba import njit
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


@dataclass
class PropagationConfig:
    dt_au: float | None = None       # None: auto from the resolution guard
    t_start_fs: float | None = None  # None: from the pulse-train span
    t_end_fs: float | None = None
    t2_fs: float = math.inf
    record_stride: int = 10
    fermi_ev: float = 0.0
    engine: str = "auto"             # auto | numpy | numba
    store_snapshots: bool = False    # keep full rho at recorded steps
    vhc_include_valence: bool = False


@dataclass
class PropagationResult:
    times_fs: np.ndarray
    sigma: np.ndarray                # VHC trace, arb. units
    asym: np.ndarray                 # valley asymmetry A_v(t) of conduction pop
    pop_total: np.ndarray            # BZ-integrated conduction population
    trace_defect: float              # max |Tr rho - n_filled| seen
    herm_defect: float               # max |rho - rho^dag| seen
    final_rho: np.ndarray            # (nk, N, N)
    final_populations: np.ndarray    # (nk, N) real
    filled_bands: tuple
    conduction_bands: tuple
    snapshots: list = field(default_factory=list)  # [(t_fs, rho copy), ...]


def split_bands(model, grid: KGrid, fermi_ev: float):
    """(filled, empty) band indices; error if the Fermi level cuts a band."""
    energies, _ = bands_and_dipoles(model, grid.kpoints, check_degeneracy=False)
    filled, empty = [], []
    for n in range(energies.shape[1]):
        lo, hi = energies[:, n].min(), energies[:, n].max()
        if hi < fermi_ev:
            filled.append(n)
        elif lo > fermi_ev:
            empty.append(n)
        else:
            raise FermiLevelError(
                f"band {n} spans the Fermi level {fermi_ev} eV ({lo:.3f}..{hi:.3f} eV)")
    return tuple(filled), tuple(empty)


def initialize_ground_state(model, grid: KGrid, fermi_ev: float = 0.0):
    """rho with every band below the Fermi level filled, at each k."""
    filled, _ = split_bands(model, grid, fermi_ev)
    energies, _ = bands_and_dipoles(model, grid.kpoints, check_degeneracy=False)
    n = energies.shape[1]
    rho = np.zeros((grid.nk, n, n), dtype=complex)
    for b in filled:
        rho[:, b, b] = 1.0
    return rho, filled


def max_band_spread_ev(model, grid: KGrid) -> float:
    energies, _ = bands_and_dipoles(model, grid.kpoints, check_degeneracy=False)
    return float((energies.max(axis=1) - energies.min(axis=1)).max())


def resolve_dt_au(model, grid: KGrid, dt_au: float | None) -> float:
    """Apply the phase-resolution guard dt * max(d eps)/hbar < 0.1 rad."""
    spread = max_band_spread_ev(model, grid)
    limit = PHASE_GUARD_RAD * HBAR_EV_FS / spread / AU_TIME_FS  # a.u.
    if dt_au is None:
        return min(0.2, 0.95 * limit)
    if dt_au >= limit:
        raise ConfigError(
            f"dt = {dt_au} a.u. exceeds the resolution guard ({limit:.3f} a.u. "
            f"for a {spread:.2f} eV bandwidth)", section="propagation", key="dt_au")
    return dt_au


def propagate(model, grid: KGrid, train: PulseTrain, config: PropagationConfig,
              berry=None) -> PropagationResult:
    """Propagate the ground state through the pulse train.

    berry: optional BerryMap; when given, the VHC trace sigma(t) is recorded
    (conduction bands only unless config.vhc_include_valence).
    """
    dt_au = resolve_dt_au(model, grid, config.dt_au)
    dt = dt_au * AU_TIME_FS
    t0, t1 = config.t_start_fs, config.t_end_fs
    if t0 is None or t1 is None:
        auto0, auto1 = train.time_span()
        t0 = auto0 if t0 is None else t0
        t1 = auto1 if t1 is None else t1
    nsteps = max(1, int(math.ceil((t1 - t0) / dt)))
    times = t0 + dt * np.arange(nsteps + 1)

    rho, filled = initialize_ground_state(model, grid, config.fermi_ev)
    nbands = rho.shape[1]
    conduction = tuple(b for b in range(nbands) if b not in filled)

    gamma = 0.0 if math.isinf(config.t2_fs) else 1.0 / config.t2_fs
    # stage fields: nodes and midpoints; kappa shift is A/hbar (1/Angstrom)
    e_nodes = train.efield(times)
    e_mid = train.efield(times[:-1] + dt / 2.0)
    a_nodes = train.afield(times) / HBAR_EV_FS
    a_mid = train.afield(times[:-1] + dt / 2.0) / HBAR_EV_FS

    rec_flag = np.zeros(nsteps + 1, dtype=bool)
    rec_flag[::config.record_stride] = True
    rec_flag[-1] = True
    rec_steps = np.flatnonzero(rec_flag)

    # per-band VHC weights (curvature * k-weight), zero when not recorded
    bw = np.zeros((grid.nk, nbands))
    if berry is not None:
        curvature = node_curvature(berry, grid)
        for b in conduction:
            bw[:, b] = curvature[:, b] * grid.weights
        if config.vhc_include_valence:
            for b in filled:
                bw[:, b] = curvature[:, b] * grid.weights
    cond_mask = np.zeros(nbands)
    cond_mask[list(conduction)] = 1.0
    hole_mask = np.zeros(nbands)
    if config.vhc_include_valence:
        hole_mask[list(filled)] = 1.0

    use_numba = (config.engine == "numba"
                 or (config.engine == "auto" and _HAVE_NUMBA
                     and isinstance(model, TwoBandModel)
                     and not config.store_snapshots))
    if use_numba and not isinstance(model, TwoBandModel):
        raise ConfigError("numba engine supports only the two-band model",
                          section="propagation", key="engine")

    if use_numba:
        out = _run_twoband_numba(model, grid, rho, dt, e_nodes, e_mid, a_nodes, a_mid,
                                 gamma, rec_flag, bw, cond_mask, hole_mask)
        (sigma, asym, pop, trace_defect, herm_defect, blow_step, blow_k, rho) = out
        if blow_step >= 0:
            raise StepBlowupError(
                f"|rho| exceeded {RHO_BLOWUP} at step {blow_step}; reduce dt",
                k_index=int(blow_k), k_point=grid.kpoints[int(blow_k)])
        snapshots = []
    else:
        sigma, asym, pop, trace_defect, herm_defect, snapshots = _run_numpy(
            model, grid, rho, dt, times, e_nodes, e_mid, a_nodes, a_mid, gamma,
            rec_flag, bw, cond_mask, hole_mask, len(filled), config.store_snapshots)

    final_pop = np.real(np.einsum("knn->kn", rho))
    return PropagationResult(
        times_fs=times[rec_steps], sigma=sigma, asym=asym, pop_total=pop,
        trace_defect=trace_defect, herm_defect=herm_defect,
        final_rho=rho, final_populations=final_pop,
        filled_bands=filled, conduction_bands=conduction, snapshots=snapshots)


def _record(rho, bw, cond_mask, hole_mask, labels, weights, n_filled):
    diag = np.real(np.einsum("knn->kn", rho))
    occ = diag - hole_mask[None, :]  # holes measured against full filling
    sigma = float(np.einsum("kn,kn->", occ, bw))
    cond = diag @ cond_mask
    wpop = cond * weights
    nk = float(np.sum(wpop * (labels == 1)) + 0.5 * np.sum(wpop * (labels == 0)))
    nkp = float(np.sum(wpop * (labels == -1)) + 0.5 * np.sum(wpop * (labels == 0)))
    tot = nk + nkp
    asym = (nk - nkp) / tot if tot > 0 else 0.0
    trace = np.einsum("knn->k", rho)
    tdef = float(np.abs(trace - n_filled).max())
    hdef = float(np.abs(rho - np.conj(np.swapaxes(rho, 1, 2))).max())
    return sigma, asym, tot, tdef, hdef


def _run_numpy(model, grid, rho, dt, times, e_nodes, e_mid, a_nodes, a_mid, gamma,
               rec_flag, bw, cond_mask, hole_mask, n_filled, store_snapshots):
    kpts = grid.kpoints
    nsteps = len(times) - 1
    offdiag = 1.0 - np.eye(rho.shape[1])

    def hamiltonian(shift, efield):
        eps, d = bands_and_dipoles(model, kpts + shift[None, :])
        h = (d[:, 0] * efield[0] + d[:, 1] * efield[1])
        idx = np.arange(rho.shape[1])
        h[:, idx, idx] += eps
        return h

    def rhs(h, r):
        out = (-1j / HBAR_EV_FS) * (h @ r - r @ h)
        if gamma:
            out -= gamma * (r * offdiag)
        return out

    sigma, asym, pop = [], [], []
    tdef_max = hdef_max = 0.0
    snapshots = []

    def record(step):
        s, a, p, td, hd = _record(rho, bw, cond_mask, hole_mask,
                                  grid.valley_labels, grid.weights, n_filled)
        sigma.append(s)
        asym.append(a)
        pop.append(p)
        nonlocal tdef_max, hdef_max
        tdef_max = max(tdef_max, td)
        hdef_max = max(hdef_max, hd)
        if store_snapshots:
            snapshots.append((times[step], rho.copy()))

    h_node = hamiltonian(a_nodes[0], e_nodes[0])
    if rec_flag[0]:
        record(0)
    for step in range(nsteps):
        h_mid = hamiltonian(a_mid[step], e_mid[step])
        h_next = hamiltonian(a_nodes[step + 1], e_nodes[step + 1])
        k1 = rhs(h_node, rho)
        k2 = rhs(h_mid, rho + (dt / 2.0) * k1)
        k3 = rhs(h_mid, rho + (dt / 2.0) * k2)
        k4 = rhs(h_next, rho + dt * k3)
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho[:] = 0.5 * (rho + np.conj(np.swapaxes(rho, 1, 2)))
        h_node = h_next
        amax = np.abs(rho).max()
        if amax > RHO_BLOWUP:
            kbad = int(np.unravel_index(np.abs(rho).argmax(), rho.shape)[0])
            raise StepBlowupError(
                f"|rho| = {amax:.2f} exceeded {RHO_BLOWUP} at step {step}; reduce dt",
                k_index=kbad, k_point=kpts[kbad])
        if rec_flag[step + 1]:
            record(step + 1)
    return (np.array(sigma), np.array(asym), np.array(pop),
            tdef_max, hdef_max, snapshots)


# ---------------------------------------------------------------------------
# numba kernel for the analytic two-band model

if _HAVE_NUMBA:

    @njit(cache=True, fastmath=False)
    def _twoband_kernel(sph, cv, m, thop, dt, hbar, gamma,
                        ex, ey, exm, eym, un, um,
                        rvv, rvc, rcc, rec_flag, bwv, bwc, labels, weights,
                        hole_v, sigma_out, asym_out, pop_out):
        nk = sph.shape[0]
        nsteps = ex.shape[0] - 1
        tdef = 0.0
        hdef = 0.0
        blow_step = -1
        blow_k = -1
        rec = 0

        # stage tables: for each step the RK4 stages use
        #   (E, A) at t, t+dt/2 (twice) and t+dt; the A-dependent part of the
        #   structure-factor phases (un/um) is shared by every k
        for step in range(-1, nsteps):
            if step >= 0:
                e1x, e1y = ex[step], ey[step]
                e2x, e2y = exm[step], eym[step]
                e3x, e3y = ex[step + 1], ey[step + 1]
                u1 = un[step]
                u2 = um[step]
                u3 = un[step + 1]
                for k in range(nk):
                    s0 = sph[k, 0]
                    s1 = sph[k, 1]
                    s2 = sph[k, 2]
                    pvv = rvv[k]
                    pvc = rvc[k]
                    pcc = rcc[k]
                    # RK4 stages
                    dvv1, dvc1, dcc1 = _twoband_rhs(
                        s0 * u1[0], s1 * u1[1], s2 * u1[2], cv, m, thop, hbar,
                        gamma, e1x, e1y, pvv, pvc, pcc)
                    dvv2, dvc2, dcc2 = _twoband_rhs(
                        s0 * u2[0], s1 * u2[1], s2 * u2[2], cv, m, thop, hbar,
                        gamma, e2x, e2y,
                        pvv + 0.5 * dt * dvv1,
                        pvc + 0.5 * dt * dvc1,
                        pcc + 0.5 * dt * dcc1)
                    dvv3, dvc3, dcc3 = _twoband_rhs(
                        s0 * u2[0], s1 * u2[1], s2 * u2[2], cv, m, thop, hbar,
                        gamma, e2x, e2y,
                        pvv + 0.5 * dt * dvv2,
                        pvc + 0.5 * dt * dvc2,
                        pcc + 0.5 * dt * dcc2)
                    dvv4, dvc4, dcc4 = _twoband_rhs(
                        s0 * u3[0], s1 * u3[1], s2 * u3[2], cv, m, thop, hbar,
                        gamma, e3x, e3y,
                        pvv + dt * dvv3,
                        pvc + dt * dvc3,
                        pcc + dt * dcc3)
                    nvv = pvv + dt / 6.0 * (dvv1 + 2.0 * dvv2 + 2.0 * dvv3 + dvv4)
                    nvc = pvc + dt / 6.0 * (dvc1 + 2.0 * dvc2 + 2.0 * dvc3 + dvc4)
                    ncc = pcc + dt / 6.0 * (dcc1 + 2.0 * dcc2 + 2.0 * dcc3 + dcc4)
                    # keep the diagonal exactly real (hermitization)
                    rvv[k] = complex(nvv.real, 0.0)
                    rcc[k] = complex(ncc.real, 0.0)
                    rvc[k] = nvc
                    if (abs(nvc) > 10.0 or abs(nvv) > 10.0 or abs(ncc) > 10.0) \
                            and blow_step < 0:
                        blow_step = step
                        blow_k = k
                if blow_step >= 0:
                    break
            if rec_flag[step + 1]:
                sig = 0.0
                nkv = 0.0
                nkp = 0.0
                td = 0.0
                for k in range(nk):
                    fv = rvv[k].real
                    fc = rcc[k].real
                    sig += fc * bwc[k] + (fv - hole_v) * bwv[k]
                    wc = fc * weights[k]
                    if labels[k] == 1:
                        nkv += wc
                    elif labels[k] == -1:
                        nkp += wc
                    else:
                        nkv += 0.5 * wc
                        nkp += 0.5 * wc
                    drift = abs(rvv[k] + rcc[k] - 1.0)
                    if drift > td:
                        td = drift
                sigma_out[rec] = sig
                tot = nkv + nkp
                asym_out[rec] = (nkv - nkp) / tot if tot > 0.0 else 0.0
                pop_out[rec] = tot
                if td > tdef:
                    tdef = td
                rec += 1
        return tdef, hdef, blow_step, blow_k

    @njit(cache=True, inline="always")
    def _twoband_rhs(ph0, ph1, ph2, cv, m, thop, hbar, gamma, efx, efy,
                     pvv, pvc, pcc):
        f = thop * (ph0 + ph1 + ph2)
        gfx = 1j * thop * (cv[0, 0] * ph0 + cv[1, 0] * ph1 + cv[2, 0] * ph2)
        gfy = 1j * thop * (cv[0, 1] * ph0 + cv[1, 1] * ph1 + cv[2, 1] * ph2)
        e = np.sqrt(m * m + (f.real * f.real + f.imag * f.imag))
        pref = 1.0 / (4.0 * e * e * (e + m))
        epm2 = (e + m) * (e + m)
        f2 = f * f
        dcvx = 1j * (epm2 * gfx - f2 * np.conj(gfx)) * pref
        dcvy = 1j * (epm2 * gfy - f2 * np.conj(gfy)) * pref
        hvc = efx * np.conj(dcvx) + efy * np.conj(dcvy)
        hcv = np.conj(hvc)
        pcv = np.conj(pvc)
        # dvv = -(i/hbar)(hvc pcv - pvc hcv)
        dvv = (-1j / hbar) * (hvc * pcv - pvc * hcv)
        dvc = (-1j / hbar) * ((-2.0 * e) * pvc + hvc * (pcc - pvv)) - gamma * pvc
        dcc = -dvv
        return dvv, dvc, dcc


def _run_twoband_numba(model, grid, rho, dt, e_nodes, e_mid, a_nodes, a_mid,
                       gamma, rec_flag, bw, cond_mask, hole_mask):
    rvv = np.ascontiguousarray(rho[:, 0, 0])
    rvc = np.ascontiguousarray(rho[:, 0, 1])
    rcc = np.ascontiguousarray(rho[:, 1, 1])
    nrec = int(rec_flag.sum())
    sigma = np.zeros(nrec)
    asym = np.zeros(nrec)
    pop = np.zeros(nrec)
    hole_v = 1.0 if hole_mask[0] else 0.0
    cv = model.cvecs
    # split exp(i kappa . c_i) into a static k part and a shared A(t) part
    sph = np.exp(1j * (grid.kpoints @ cv.T))             # (nk, 3)
    u_nodes = np.exp(1j * (a_nodes @ cv.T))              # (nsteps+1, 3)
    u_mid = np.exp(1j * (a_mid @ cv.T))                  # (nsteps, 3)
    # with valence holes disabled bw[:, 0] is zero, so hole_v is inert
    tdef, hdef, blow_step, blow_k = _twoband_kernel(
        sph, cv, model.gap_ev / 2.0, model.hopping_ev, dt, HBAR_EV_FS, gamma,
        e_nodes[:, 0].copy(), e_nodes[:, 1].copy(),
        e_mid[:, 0].copy(), e_mid[:, 1].copy(),
        u_nodes, u_mid,
        rvv, rvc, rcc, rec_flag, bw[:, 0].copy(), bw[:, 1].copy(),
        grid.valley_labels, grid.weights, hole_v, sigma, asym, pop)
    out = np.zeros_like(rho)
    out[:, 0, 0] = rvv
    out[:, 0, 1] = rvc
    out[:, 1, 0] = np.conj(rvc)
    out[:, 1, 1] = rcc
    return sigma, asym, pop, tdef, hdef, blow_step, blow_k, out
