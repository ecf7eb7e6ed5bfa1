"""Command-line front end binding the modules into reproducible runs."""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import ioformats
from .config import RunConfig, load_config
from .errors import ValleysimError
from .fields import PulseTrain
from .kgrid import wrap_to_bz
from .lattice import band_path
from .lopt import sigma_ref
from .observables import berry_curvature, normalize_population_map, valley_asymmetry, vhc
from .propagator import propagate
from .scans import DelayScan, fit_t2, scan_delay, switch_protocol

OUT_DIR_ENV = "VALLEYSIM_OUT_DIR"


def _base_meta(cfg: RunConfig) -> dict:
    return {
        "config_hash": cfg.config_hash,
        "grid": f"{cfg.grid_shape[0]}x{cfg.grid_shape[1]}",
        "units": "energies eV, lengths angstrom, times fs, fields V/angstrom, sigma arb",
    }


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    print(f"wrote {path}")
    return path


def _tau_grid(cfg: RunConfig):
    scan = cfg.scan or {"tau_min_fs": 0.2, "tau_max_fs": 10.0, "tau_step_fs": 0.08,
                        "t2_fs": cfg.propagation.t2_fs}
    n = int(round((scan["tau_max_fs"] - scan["tau_min_fs"]) / scan["tau_step_fs"])) + 1
    return scan["tau_min_fs"] + scan["tau_step_fs"] * np.arange(n), scan


def cmd_bands(cfg: RunConfig, args, out_dir: Path) -> int:
    lat = cfg.model.lattice
    gamma = np.zeros(2)
    mpoint = (lat.b1 + lat.b2) / 2.0
    s, kpts, energies = band_path(cfg.model, [gamma, lat.K, mpoint, gamma],
                                  samples_per_segment=args.samples)
    cols = [("s_inv_angstrom", s), ("kx", kpts[:, 0]), ("ky", kpts[:, 1])]
    cols += [(f"e{n + 1}_ev", energies[:, n]) for n in range(energies.shape[1])]
    meta = _base_meta(cfg)
    meta["path"] = "Gamma-K-M-Gamma"
    gap = energies[:, -1] - energies[:, 0] if energies.shape[1] > 1 else energies[:, 0]
    meta["min_direct_gap_ev"] = f"{gap.min():.9g}"
    _write(out_dir, "bands.csv", ioformats.format_series(cols, meta))
    return 0


def cmd_berry(cfg: RunConfig, args, out_dir: Path) -> int:
    grid = cfg.build_grid()
    berry = berry_curvature(cfg.model, grid)
    meta = _base_meta(cfg)
    meta.update(ioformats.lattice_meta(cfg.model.lattice))
    meta["chern"] = " ".join(f"{c:.6f}" for c in berry.chern)
    meta["value"] = "berry curvature, angstrom^2"
    _write(out_dir, "berry_kmap.csv",
           ioformats.format_kmap(grid.wrapped_kpoints(), berry.curvature, meta))
    return 0


def cmd_propagate(cfg: RunConfig, args, out_dir: Path) -> int:
    if not cfg.pulses:
        raise ValleysimError("config defines no pulses")
    grid = cfg.build_grid()
    berry = berry_curvature(cfg.model, grid)
    result = propagate(cfg.model, grid, PulseTrain(cfg.pulses), cfg.propagation,
                       berry=berry)
    meta = _base_meta(cfg)
    meta["t2_fs"] = cfg.propagation.t2_fs
    _write(out_dir, "sigma_t.csv", ioformats.format_series(
        [("t_fs", result.times_fs), ("sigma", result.sigma),
         ("valley_asymmetry", result.asym), ("population", result.pop_total)], meta))
    kmeta = dict(meta)
    kmeta.update(ioformats.lattice_meta(cfg.model.lattice))
    kmeta["normalization"] = args.normalization
    pops = normalize_population_map(result.final_populations, args.normalization)
    _write(out_dir, "pop_kmap.csv",
           ioformats.format_kmap(grid.wrapped_kpoints(), pops, kmeta))
    asym = valley_asymmetry(result.final_populations, grid,
                            bands=result.conduction_bands)
    print(f"final sigma = {result.sigma[-1]:.6g}, valley asymmetry = {asym.a_v:.4f}")
    return 0


def cmd_scan_delay(cfg: RunConfig, args, out_dir: Path) -> int:
    if not cfg.pulses:
        raise ValleysimError("config defines no pulses (the first is the scan base)")
    taus, scan_cfg = _tau_grid(cfg)
    grid = cfg.build_grid()
    result = scan_delay(cfg.model, grid, cfg.pulses[0], taus,
                        t2_fs=scan_cfg["t2_fs"], config=cfg.propagation,
                        workers=args.workers)
    meta = _base_meta(cfg)
    meta.update(result.metadata)
    _write(out_dir, "sigma_tau.csv", ioformats.format_series(
        [("tau_fs", result.taus_fs), ("sigma", result.sigma)], meta))
    return 0


def cmd_lopt(cfg: RunConfig, args, out_dir: Path) -> int:
    if not cfg.pulses:
        raise ValleysimError("config defines no pulses (the first is the scan base)")
    taus, _ = _tau_grid(cfg)
    grid = cfg.build_grid()
    taus, sig = sigma_ref(cfg.model, grid, cfg.pulses[0], taus, fermi_ev=cfg.fermi_ev)
    meta = _base_meta(cfg)
    meta["t2_fs"] = "inf"
    meta["method"] = "lowest-order perturbation theory"
    meta["fwhm_fs"] = cfg.pulses[0].fwhm_fs
    _write(out_dir, "lopt_sigma_tau.csv", ioformats.format_series(
        [("tau_fs", taus), ("sigma", sig)], meta))
    return 0


def cmd_fit_t2(args, out_dir: Path) -> int:
    def load_scan(path):
        meta, names, data = ioformats.parse_series(Path(path).read_text())
        cols = {name: data[:, i] for i, name in enumerate(names)}
        md = {}
        if "fwhm_fs" in meta:
            md["fwhm_fs"] = float(meta["fwhm_fs"])
        return DelayScan(taus_fs=cols["tau_fs"], sigma=cols["sigma"], metadata=md)

    measured = load_scan(args.measured)
    reference = load_scan(args.reference)
    window = (args.window_min, args.window_max) if args.window_min is not None else None
    result = fit_t2(measured, reference, window_fs=window)
    t2 = "inf" if math.isinf(result.t2_fs) else f"{result.t2_fs:.9g}"
    meta = {
        "t2_fs": t2,
        "residual_rms": f"{result.residual_rms:.9g}",
        "window_fs": f"{result.window_fs[0]:.9g} {result.window_fs[1]:.9g}",
        "no_decay": str(result.no_decay).lower(),
    }
    _write(out_dir, "t2_fit.csv", ioformats.format_series(
        [("t2_fs", [math.inf if result.no_decay else result.t2_fs]),
         ("residual_rms", [result.residual_rms])], meta))
    print(f"fitted T2 = {t2} fs (residual rms {result.residual_rms:.3g})")
    return 0


def cmd_switch_demo(cfg: RunConfig, args, out_dir: Path) -> int:
    if not cfg.pulses:
        raise ValleysimError("config defines no pulses (the first is the switch base)")
    switch = cfg.switch or {}
    if not switch:
        from .units import HBAR_EV_FS
        cycle = 2.0 * math.pi * HBAR_EV_FS / cfg.model.gap_ev
        switch = {"delays_fs": [7 * cycle, 14 * cycle, 21.5 * cycle],
                  "polarizations": ["y", "x", "y", "x"],
                  "t2_list_fs": [math.inf]}
    grid = cfg.build_grid()
    berry = berry_curvature(cfg.model, grid)
    meta = _base_meta(cfg)
    sigma_cols = None
    for t2 in switch["t2_list_fs"]:
        result = switch_protocol(cfg.model, grid, cfg.pulses[0], switch["delays_fs"],
                                 polarizations=switch["polarizations"], t2_fs=t2,
                                 config=cfg.propagation, berry=berry)
        label = "inf" if math.isinf(t2) else f"{t2:g}"
        if sigma_cols is None:
            sigma_cols = [("t_fs", result.times_fs)]
        sigma_cols.append((f"sigma_t2_{label}", result.sigma_t))
        if t2 == switch["t2_list_fs"][0]:
            kmeta = dict(meta)
            kmeta.update(ioformats.lattice_meta(cfg.model.lattice))
            for stage in result.stages:
                _write(out_dir, f"pop_stage{stage.n_pulses}_kmap.csv",
                       ioformats.format_kmap(grid.wrapped_kpoints(),
                                             stage.populations, kmeta))
            summary = [("stage", [s.n_pulses for s in result.stages]),
                       ("sigma", [s.sigma_final for s in result.stages]),
                       ("valley_asymmetry", [s.asymmetry for s in result.stages])]
            _write(out_dir, "switch_summary.csv",
                   ioformats.format_series(summary, meta))
    smeta = dict(meta)
    smeta["delays_fs"] = " ".join(f"{d:.9g}" for d in switch["delays_fs"])
    smeta["polarizations"] = ",".join(switch["polarizations"])
    _write(out_dir, "sigma_t.csv", ioformats.format_series(sigma_cols, smeta))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="valleysim",
        description="Valley-polarization control in 2D hexagonal materials")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="run config file (INI)")
        p.add_argument("--out-dir", default=None,
                       help=f"output directory (default ${OUT_DIR_ENV} or cwd)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        p.add_argument("--t2", default=None, help="dephasing time in fs, or 'inf'")
        p.add_argument("--grid", default=None, help="override grid, e.g. 120 or 120x120")
        p.add_argument("--dt", type=float, default=None, help="time step (a.u.)")

    p = sub.add_parser("bands", help="band structure along Gamma-K-M-Gamma")
    add_common(p)
    p.add_argument("--samples", type=int, default=120)

    add_common(sub.add_parser("berry", help="Berry curvature k-map and Chern numbers"))
    p = sub.add_parser("propagate", help="propagate the configured pulse train")
    add_common(p)
    p.add_argument("--normalization", default="raw",
                   choices=["raw", "global-max", "per-point"])
    add_common(sub.add_parser("scan-delay", help="VHC vs two-pulse delay"))
    add_common(sub.add_parser("lopt", help="perturbation-theory reference scan"))
    add_common(sub.add_parser("switch-demo", help="four-pulse valley switch"))

    p = sub.add_parser("fit-t2", help="fit T2 from measured and reference scans")
    p.add_argument("measured")
    p.add_argument("reference")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--window-min", type=float, default=None)
    p.add_argument("--window-max", type=float, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out_dir or os.environ.get(OUT_DIR_ENV, "."))
    try:
        if args.command == "fit-t2":
            return cmd_fit_t2(args, out_dir)
        overrides = {}
        if getattr(args, "t2", None) is not None:
            overrides["t2_fs"] = math.inf if args.t2.lower() == "inf" else float(args.t2)
        if getattr(args, "grid", None):
            overrides["grid"] = args.grid
        if getattr(args, "dt", None) is not None:
            overrides["dt_au"] = args.dt
        cfg = load_config(args.config, overrides)
        handlers = {
            "bands": cmd_bands,
            "berry": cmd_berry,
            "propagate": cmd_propagate,
            "scan-delay": cmd_scan_delay,
            "lopt": cmd_lopt,
            "switch-demo": cmd_switch_demo,
        }
        return handlers[args.command](cfg, args, out_dir)
    except ValleysimError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: IO: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
