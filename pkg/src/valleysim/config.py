"""Run configuration: flat INI-style key-value text with sections.

Units are embedded in key names (carrier_ev, fwhm_fs, field_v_per_angstrom,
dt_au, ...) so no unit ambiguity survives parsing.  Example:

    [model]
    type = two_band
    a_angstrom = 2.5
    gap_ev = 6.0
    hopping_ev = 2.3

    [grid]
    n1 = 240
    n2 = 240

    [pulse.1]
    carrier_ev = 6.0
    fwhm_fs = 1.15
    field_v_per_angstrom = 0.1
    polarization = sigma-
    center_fs = 0.0
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ValidationError
from .fields import PulseSpec
from .kgrid import KGrid
from .lattice import CrystalLattice, TwoBandModel, hexagonal_bn
from .propagator import PropagationConfig
from .units import HBAR_EV_FS


@dataclass
class RunConfig:
    model: object
    grid_shape: tuple
    pulses: list
    propagation: PropagationConfig
    scan: dict
    switch: dict
    fermi_ev: float
    config_hash: str
    source_path: str | None = None

    def build_grid(self) -> KGrid:
        return KGrid.build(self.model.lattice, *self.grid_shape)


def _parse_float(parser, section, key, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ConfigError("missing required key", section=section, key=key)
        return default
    raw = parser.get(section, key).strip()
    if raw.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"not a number: {raw!r}", section=section, key=key) from None


def _parse_int(parser, section, key, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ConfigError("missing required key", section=section, key=key)
        return default
    raw = parser.get(section, key).strip()
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"not an integer: {raw!r}", section=section, key=key) from None


def _build_model(parser, base_dir: Path):
    if not parser.has_section("model"):
        raise ConfigError("missing [model] section", section="model")
    mtype = parser.get("model", "type", fallback="two_band").strip()
    if mtype == "two_band":
        return hexagonal_bn(
            a=_parse_float(parser, "model", "a_angstrom", 2.50),
            gap_ev=_parse_float(parser, "model", "gap_ev", 6.0),
            hopping_ev=_parse_float(parser, "model", "hopping_ev", 2.3))
    if mtype in ("wannier_hr", "wannier_tb"):
        from . import wannier
        path = parser.get("model", "path", fallback=None)
        if path is None:
            raise ConfigError("wannier models need a file path", section="model", key="path")
        file_path = (base_dir / path).resolve() if not Path(path).is_absolute() else Path(path)
        try:
            text = file_path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {file_path}: {exc}",
                              section="model", key="path") from None
        if mtype == "wannier_tb":
            return wannier.parse_tb(text)
        model = wannier.parse_hr(text)
        a = _parse_float(parser, "model", "a_angstrom", required=True)
        lat = CrystalLattice.hexagonal(a)
        vectors = np.array([[lat.a1[0], lat.a1[1], 0.0],
                            [lat.a2[0], lat.a2[1], 0.0],
                            [0.0, 0.0, 100.0]])
        from dataclasses import replace
        return replace(model, lattice_vectors=vectors)
    raise ConfigError(f"unknown model type {mtype!r}", section="model", key="type")


def _build_pulses(parser):
    sections = sorted((s for s in parser.sections() if s.startswith("pulse.")),
                      key=lambda s: int(s.split(".", 1)[1]))
    pulses = []
    for sec in sections:
        try:
            pulses.append(PulseSpec(
                carrier_ev=_parse_float(parser, sec, "carrier_ev", required=True),
                fwhm_fs=_parse_float(parser, sec, "fwhm_fs", required=True),
                field_v_per_angstrom=_parse_float(parser, sec, "field_v_per_angstrom",
                                                  required=True),
                polarization=parser.get(sec, "polarization", fallback="x").strip(),
                cep_rad=_parse_float(parser, sec, "cep_rad", 0.0),
                center_fs=_parse_float(parser, sec, "center_fs", 0.0)))
        except (ValueError, ValidationError) as exc:
            raise ConfigError(str(exc), section=sec) from None
    return pulses


def load_config(path_or_text, overrides: dict | None = None) -> RunConfig:
    """Load and validate a run config; overrides come from CLI flags."""
    overrides = dict(overrides or {})
    try:
        is_file = isinstance(path_or_text, (str, Path)) and Path(str(path_or_text)).exists()
    except OSError:  # raw config text can exceed filename limits
        is_file = False
    if is_file:
        source = Path(str(path_or_text))
        text = source.read_text()
        base_dir = source.parent
    else:
        source = None
        text = str(path_or_text)
        base_dir = Path.cwd()

    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None

    model = _build_model(parser, base_dir)
    fermi_ev = _parse_float(parser, "model", "fermi_ev", 0.0)

    n1 = _parse_int(parser, "grid", "n1", 120) if parser.has_section("grid") else 120
    n2 = _parse_int(parser, "grid", "n2", n1) if parser.has_section("grid") else n1
    if "grid" in overrides and overrides["grid"]:
        parts = str(overrides["grid"]).lower().split("x")
        n1 = int(parts[0])
        n2 = int(parts[1]) if len(parts) > 1 else n1
    if n1 < 1 or n2 < 1:
        raise ConfigError("grid dimensions must be positive", section="grid")

    prop = PropagationConfig(
        dt_au=_parse_float(parser, "propagation", "dt_au")
        if parser.has_section("propagation") else None,
        t_start_fs=_parse_float(parser, "propagation", "t_start_fs")
        if parser.has_section("propagation") else None,
        t_end_fs=_parse_float(parser, "propagation", "t_end_fs")
        if parser.has_section("propagation") else None,
        t2_fs=_parse_float(parser, "propagation", "t2_fs", math.inf)
        if parser.has_section("propagation") else math.inf,
        record_stride=_parse_int(parser, "propagation", "record_stride", 10)
        if parser.has_section("propagation") else 10,
        fermi_ev=fermi_ev)
    if overrides.get("dt_au") is not None:
        prop.dt_au = float(overrides["dt_au"])
    if overrides.get("t2_fs") is not None:
        prop.t2_fs = float(overrides["t2_fs"])

    scan = {}
    if parser.has_section("scan"):
        scan = {
            "tau_min_fs": _parse_float(parser, "scan", "tau_min_fs", 0.2),
            "tau_max_fs": _parse_float(parser, "scan", "tau_max_fs", 10.0),
            "tau_step_fs": _parse_float(parser, "scan", "tau_step_fs", 0.08),
            "t2_fs": _parse_float(parser, "scan", "t2_fs", prop.t2_fs),
        }
        if overrides.get("t2_fs") is not None:
            scan["t2_fs"] = float(overrides["t2_fs"])

    switch = {}
    if parser.has_section("switch"):
        gap = getattr(model, "gap_ev", None)
        cycle = 2.0 * math.pi * HBAR_EV_FS / gap if gap else None
        raw = parser.get("switch", "delays_fs", fallback=None)
        if raw:
            delays = [float(tok) for tok in raw.replace(",", " ").split()]
        elif cycle:
            delays = [7.0 * cycle, 14.0 * cycle, 21.5 * cycle]
        else:
            raise ConfigError("delays_fs required for non-two-band models",
                              section="switch", key="delays_fs")
        pols = parser.get("switch", "polarizations", fallback="y,x,y,x")
        pols = [p.strip() for p in pols.split(",")]
        raw_t2 = parser.get("switch", "t2_list_fs", fallback="inf")
        t2_list = [math.inf if tok.strip().lower() == "inf" else float(tok)
                   for tok in raw_t2.split(",")]
        switch = {"delays_fs": delays, "polarizations": pols, "t2_list_fs": t2_list}

    digest = hashlib.sha256()
    digest.update(text.encode())
    digest.update(repr(sorted(overrides.items())).encode())
    return RunConfig(model=model, grid_shape=(n1, n2), pulses=_build_pulses(parser),
                     propagation=prop, scan=scan, switch=switch, fermi_ev=fermi_ev,
                     config_hash=digest.hexdigest()[:16],
                     source_path=str(source) if source else None)
