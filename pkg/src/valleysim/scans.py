"""Delay scans, the four-pulse switch protocol, and T2 retrieval."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace, field

import numpy as np

from .errors import ShapeMismatch, ValidationError, WindowTooSmall
from .fields import PulseSpec, PulseTrain
from .kgrid import KGrid
from .lopt import perpendicular_pair
from .observables import BerryMap, berry_curvature, valley_asymmetry, vhc
from .propagator import PropagationConfig, propagate


@dataclass
class DelayScan:
    taus_fs: np.ndarray
    sigma: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.taus_fs = np.asarray(self.taus_fs, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=float)
        if np.any(np.diff(self.taus_fs) <= 0):
            raise ValidationError("delays must be strictly increasing")
        if len(self.taus_fs) != len(self.sigma):
            raise ValidationError("one sigma value per delay required")


@dataclass
class T2FitResult:
    t2_fs: float            # math.inf when no decay is detectable
    residual_rms: float
    window_fs: tuple
    scale: float = 1.0
    no_decay: bool = False


@dataclass
class SwitchStage:
    n_pulses: int
    sigma_final: float
    asymmetry: float
    populations: np.ndarray  # (nk, N) final band populations


@dataclass
class SwitchResult:
    stages: list
    times_fs: np.ndarray     # full four-pulse sigma(t) trace
    sigma_t: np.ndarray
    grid: KGrid
    berry: BerryMap


def _scan_single(args):
    model, grid, base_pulse, tau, config, berry = args
    train = perpendicular_pair(base_pulse, tau)
    cfg = replace(config, t_end_fs=None, t_start_fs=None)
    result = propagate(model, grid, train, cfg, berry=berry)
    pops = result.final_populations
    return vhc(pops, berry, grid, bands=result.conduction_bands)


def scan_delay(model, grid: KGrid, base_pulse: PulseSpec, taus, t2_fs=math.inf,
               config: PropagationConfig | None = None,
               berry: BerryMap | None = None, workers: int = 1) -> DelayScan:
    """One full propagation per delay; sigma from post-pulse populations."""
    taus = np.asarray(taus, dtype=float)
    if berry is None:
        berry = berry_curvature(model, grid)
    config = config or PropagationConfig()
    config = replace(config, t2_fs=t2_fs)
    jobs = [(model, grid, base_pulse, float(tau), config, berry) for tau in taus]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            sigma = list(pool.map(_scan_single, jobs, chunksize=4))
    else:
        sigma = [_scan_single(job) for job in jobs]
    meta = {
        "t2_fs": t2_fs,
        "grid": f"{grid.n1}x{grid.n2}",
        "carrier_ev": base_pulse.carrier_ev,
        "fwhm_fs": base_pulse.fwhm_fs,
        "field_v_per_angstrom": base_pulse.field_v_per_angstrom,
    }
    return DelayScan(taus_fs=taus, sigma=np.array(sigma), metadata=meta)


def _fit_residual(t2_fs, taus, measured, reference):
    """Relative least squares at fixed T2 with the analytic best amplitude."""
    decayed = reference * np.exp(-taus / t2_fs) if math.isfinite(t2_fs) else reference
    denom = float(decayed @ decayed)
    scale = float(measured @ decayed) / denom if denom > 0 else 0.0
    resid = measured - scale * decayed
    norm = float(measured @ measured)
    rel = float(resid @ resid) / norm if norm > 0 else 0.0
    return rel, scale


def fit_t2(measured: DelayScan, reference: DelayScan, window_fs=None,
           bracket=(0.5, 500.0)) -> T2FitResult:
    """Retrieve T2 from sigma(tau) = sigma_ref(tau) exp(-tau/T2).

    One-parameter golden-section search over T2 on the relative residual
    (the amplitude scale is profiled out analytically).  Returns a T2 = inf
    sentinel when the measured/reference ratio shows no decay.
    """
    if len(measured.taus_fs) != len(reference.taus_fs) or \
            not np.allclose(measured.taus_fs, reference.taus_fs):
        raise ShapeMismatch("measured and reference scans must share the tau grid")
    taus = measured.taus_fs
    if window_fs is None:
        fwhm = measured.metadata.get("fwhm_fs", reference.metadata.get("fwhm_fs", 1.0))
        window_fs = (2.0 * fwhm, float(taus[-1]))
    mask = (taus >= window_fs[0]) & (taus <= window_fs[1])
    if int(mask.sum()) < 8:
        raise WindowTooSmall(f"fit window {window_fs} holds {int(mask.sum())} points (< 8)")
    tw = taus[mask]
    mw = measured.sigma[mask]
    rw = reference.sigma[mask]

    res_inf, scale_inf = _fit_residual(math.inf, tw, mw, rw)

    # golden-section minimization of the scalar residual over the bracket
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = bracket
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, _ = _fit_residual(x1, tw, mw, rw)
    f2, _ = _fit_residual(x2, tw, mw, rw)
    while hi - lo > 1e-8 * max(1.0, lo):
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1, _ = _fit_residual(x1, tw, mw, rw)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2, _ = _fit_residual(x2, tw, mw, rw)
    best = 0.5 * (lo + hi)
    res_best, scale_best = _fit_residual(best, tw, mw, rw)

    if res_inf - res_best <= 1e-6 * max(res_inf, 1e-300) or res_inf < 1e-12:
        return T2FitResult(t2_fs=math.inf, residual_rms=math.sqrt(res_inf),
                           window_fs=tuple(window_fs), scale=scale_inf, no_decay=True)
    return T2FitResult(t2_fs=best, residual_rms=math.sqrt(res_best),
                       window_fs=tuple(window_fs), scale=scale_best)


def switch_train(base: PulseSpec, delays_fs, polarizations=("y", "x", "y", "x")) -> PulseTrain:
    """Four identical pulses; centers at 0 and the given delays after pulse 1."""
    centers = [0.0] + [float(d) for d in delays_fs]
    if len(centers) != len(polarizations):
        raise ValidationError("need one polarization per pulse")
    pulses = [replace(base, polarization=pol, center_fs=c)
              for c, pol in zip(centers, polarizations)]
    return PulseTrain(pulses)


def switch_protocol(model, grid: KGrid, base_pulse: PulseSpec, delays_fs,
                    polarizations=("y", "x", "y", "x"), t2_fs=math.inf,
                    config: PropagationConfig | None = None,
                    berry: BerryMap | None = None) -> SwitchResult:
    """Run the cumulative 1-, 2-, 3-, 4-pulse sequences of the valley switch.

    Emits final populations and the VHC per stage, plus the full sigma(t)
    trace of the complete sequence.
    """
    if len(delays_fs) != len(polarizations) - 1:
        raise ValidationError("delays are between pulse 1 and each later pulse")
    if berry is None:
        berry = berry_curvature(model, grid)
    config = config or PropagationConfig()
    config = replace(config, t2_fs=t2_fs)
    full = switch_train(base_pulse, delays_fs, polarizations)
    stages = []
    times = sigma_t = None
    for n in range(1, len(polarizations) + 1):
        train = PulseTrain(full.pulses[:n])
        cfg = replace(config, t_start_fs=None,
                      t_end_fs=None if n < len(polarizations) else config.t_end_fs)
        result = propagate(model, grid, train, cfg, berry=berry)
        pops = result.final_populations
        stages.append(SwitchStage(
            n_pulses=n,
            sigma_final=vhc(pops, berry, grid, bands=result.conduction_bands),
            asymmetry=valley_asymmetry(pops, grid, bands=result.conduction_bands).a_v,
            populations=pops))
        if n == len(polarizations):
            times, sigma_t = result.times_fs, result.sigma
    return SwitchResult(stages=stages, times_fs=times, sigma_t=sigma_t,
                        grid=grid, berry=berry)
