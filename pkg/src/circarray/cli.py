"""Command-line front end.

    circarray pattern --config run.json --out results/
    circarray nf2ff --scan results/scan.csv

Each command writes its data files plus ``<command>.config.json`` holding the
fully resolved configuration, so a run can be repeated from its outputs.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._io import atomic_write, atomic_write_json, fmt
from .config import RunConfig, load_config, parse_config
from .errors import ConfigError
from .excitation import CAST_PRESETS, cast_preset
from .farfield import (
    DirectionGrid,
    azimuth_cut,
    directivity,
    find_lobes,
    synthesize_pattern,
    write_cut_csv,
    write_pattern_csv,
    write_pattern_json,
)
from .nearfield import nf2ff, read_scan, synthesize_near_field, write_scan
from .oam import (
    array_ring,
    azimuthal_spectrum,
    crosstalk_matrix,
    ring_samples,
    winding_number,
    write_crosstalk_csv,
)

OUT_ENV = "CIRCARRAY_OUT"
DEFAULT_OUT = "circarray-out"
COMMANDS = ("pattern", "cut", "oam-spectrum", "crosstalk", "nearfield", "nf2ff", "presets")


class _Run:
    def __init__(self, cfg: RunConfig, out: Path, quiet: bool):
        self.cfg = cfg
        self.out = out
        self.quiet = quiet

    def say(self, text: str) -> None:
        if not self.quiet:
            print(text)

    def want(self, kind: str) -> bool:
        return kind in self.cfg.formats


def _dir_deg(theta: float, phi: float) -> str:
    return f"theta={math.degrees(theta):.4g} deg, phi={math.degrees(phi):.4g} deg"


def _write_pattern(run: _Run, stem: str, pattern) -> None:
    if run.want("csv"):
        write_pattern_csv(run.out / f"{stem}.csv", pattern)
    if run.want("json"):
        write_pattern_json(run.out / f"{stem}.json", pattern)


def cmd_pattern(run: _Run) -> None:
    cfg = run.cfg
    pat = synthesize_pattern(cfg.geometry, cfg.element.build(),
                             cfg.excitation.build(cfg.geometry.element_count),
                             DirectionGrid.regular(cfg.grid_step))
    d = directivity(pat)
    _write_pattern(run, "pattern", pat)
    run.say(f"peak directivity {d.peak_dbi:.2f} dBi at {_dir_deg(d.peak_theta, d.peak_phi)}")


def cmd_cut(run: _Run) -> None:
    cfg = run.cfg
    pat = synthesize_pattern(cfg.geometry, cfg.element.build(),
                             cfg.excitation.build(cfg.geometry.element_count),
                             DirectionGrid.regular(cfg.grid_step))
    cut = azimuth_cut(pat, math.pi / 2)
    write_cut_csv(run.out / "cut_theta90.csv", cut)
    db = cut.mag_db
    j = int(np.argmax(db))
    run.say(f"horizontal-plane peak {db[j]:.2f} dBi at phi={math.degrees(cut.angles[j]):.4g} deg")
    lobes = find_lobes(cut)
    run.say(f"lobes within 6 dB of peak: {len(lobes)} at phi = "
            + ", ".join(f"{math.degrees(lb.center):.4g}" for lb in lobes) + " deg")


def _spectrum_csv(spec) -> str:
    lines = ["order,re,im,power,purity"]
    total = float(np.sum(spec.power))
    for q, a, p in zip(spec.orders, spec.coefficients, spec.power):
        lines.append(",".join([str(int(q)), fmt(a.real), fmt(a.imag), fmt(p),
                               fmt(p / total if total else 0.0)]))
    return "\n".join(lines) + "\n"


def _report_ring(run: _Run, ring, label: str):
    spec = azimuthal_spectrum(ring)
    wind = winding_number(ring)
    run.say(f"{label}winding = {wind:+d}")
    if spec.orders.min() <= wind <= spec.orders.max():
        run.say(f"{label}purity(l={wind:+d}) = {spec.purity(wind):.6f}")
    return spec


def cmd_oam_spectrum(run: _Run) -> None:
    cfg = run.cfg
    ring = array_ring(cfg.geometry, cfg.element.build(),
                      cfg.excitation.build(cfg.geometry.element_count),
                      cfg.oam.theta, cfg.oam.samples, cfg.oam.component)
    atomic_write(run.out / "oam_spectrum.csv", _spectrum_csv(azimuthal_spectrum(ring)))
    _report_ring(run, ring, "")


def cmd_crosstalk(run: _Run) -> None:
    cfg = run.cfg
    m = crosstalk_matrix(cfg.geometry, cfg.element.build(), cfg.oam.modes,
                         cfg.oam.theta, cfg.oam.samples, cfg.oam.component)
    write_crosstalk_csv(run.out / "crosstalk.csv", cfg.oam.modes, m)
    off = m - np.diag(np.diag(m))
    run.say(f"min diagonal purity {np.min(np.diag(m)):.6f}, max leakage {np.max(off):.3g}")


def cmd_nearfield(run: _Run) -> None:
    cfg = run.cfg
    scan = synthesize_near_field(cfg.geometry, cfg.element.build(),
                                 cfg.excitation.build(cfg.geometry.element_count),
                                 cfg.nearfield.plane)
    write_scan(run.out / "scan.csv", scan)
    mag = np.abs(scan.co)
    run.say(f"scan {scan.x.size}x{scan.y.size} written; |co| max {mag.max():.4g}, "
            f"centre {mag[scan.x.size // 2, scan.y.size // 2]:.4g}")


def cmd_nf2ff(run: _Run) -> None:
    cfg = run.cfg
    if cfg.nearfield.scan is None:
        raise ConfigError("nf2ff needs a scan file (--scan or nearfield.scan)")
    scan = read_scan(cfg.nearfield.scan)
    grid = DirectionGrid.regular(cfg.grid_step, theta_max_deg=90.0)
    pat = nf2ff(scan, grid, cfg.nearfield.padding)
    _write_pattern(run, "nf2ff", pat)
    u = pat.intensity
    i, j = np.unravel_index(int(np.argmax(u)), u.shape)
    run.say(f"peak at {_dir_deg(grid.theta[i], grid.phi[j])}")
    if cfg.oam.theta < math.pi / 2:
        ring = ring_samples(pat, cfg.oam.theta, cfg.oam.samples, cfg.oam.component)
        _report_ring(run, ring, "transformed ")


def cmd_presets(run: _Run) -> None:
    rows = {}
    for name in CAST_PRESETS:
        spec = cast_preset(name)
        rows[name] = list(spec.modes)
        run.say(f"{name:12s} modes {{{', '.join(f'{m:+d}' if m else '0' for m in spec.modes)}}}")
    atomic_write_json(run.out / "presets.json", rows)


_HANDLERS = {
    "pattern": cmd_pattern,
    "cut": cmd_cut,
    "oam-spectrum": cmd_oam_spectrum,
    "crosstalk": cmd_crosstalk,
    "nearfield": cmd_nearfield,
    "nf2ff": cmd_nf2ff,
    "presets": cmd_presets,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circarray",
                                 description="Circular-array pattern, OAM and near-field tools")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run configuration (defaults apply if omitted)")
    ap.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    ap.add_argument("--grid-deg", type=float, help="angular grid step in degrees")
    ap.add_argument("--scan", help="scan CSV for nf2ff (sidecar JSON alongside)")
    ap.add_argument("--quiet", action="store_true", help="suppress the stdout summary")
    return ap


def _resolve(args) -> tuple[RunConfig, Path]:
    cfg = load_config(args.config) if args.config else parse_config("{}")
    if args.grid_deg is not None:
        step = args.grid_deg
        if not step > 0 or abs(round(180.0 / step) * step - 180.0) > 1e-9:
            raise ConfigError("--grid-deg: expected a positive number dividing 180")
        cfg = replace(cfg, grid_step=float(step))
    if args.scan is not None:
        if not Path(args.scan).is_file():
            raise ConfigError(f"--scan: file not found: {args.scan}")
        cfg = replace(cfg, nearfield=replace(cfg.nearfield, scan=str(Path(args.scan))))
    out = args.out or cfg.output_dir or os.environ.get(OUT_ENV) or DEFAULT_OUT
    return cfg, Path(out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, out = _resolve(args)
        run = _Run(cfg, out, args.quiet)
        _HANDLERS[args.command](run)
        sidecar = {"command": args.command, "config": cfg.resolved()}
        atomic_write_json(out / f"{args.command}.config.json", sidecar)
    except Exception as exc:  # one-line diagnostic instead of a traceback
        msg = " ".join(str(exc).split()) or type(exc).__name__
        print(f"circarray {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
