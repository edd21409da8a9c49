"""Run configuration: strict JSON parsing, defaults and unit conversion.

Config files use mm, GHz and degrees; everything returned here is in
meters, Hz and radians.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ._io import rounded
from .element import ElementPattern, Isotropic, analytic_patch, fit_cos_power, read_tabulated_csv
from .errors import ConfigError, InvalidArgumentError
from .excitation import (
    CAST_PRESETS,
    ExcitationVector,
    ModeMixSpec,
    Normalization,
    mix_modes,
    oam_weights,
    preset_weights,
)
from .geometry import DEFAULT_DIAMETER, DEFAULT_ELEMENTS, DEFAULT_FREQUENCY, ArrayGeometry
from .nearfield import PlaneSpec
from .oam import COMPONENTS

ELEMENT_TYPES = ("analytic-patch", "cos-power", "isotropic", "tabulated")
OUTPUT_FORMATS = ("csv", "json")
EXCITATION_SOURCES = ("preset", "modes", "oam_l", "weights")

_NUMBER = (int, float)


def _typename(t) -> str:
    names = {int: "integer", float: "number", str: "string", bool: "boolean",
             list: "array", dict: "object"}
    if isinstance(t, tuple):
        return " or ".join(dict.fromkeys(names.get(x, x.__name__) for x in t))
    return names.get(t, t.__name__)


def _get(block: dict, key: str, types, default, where: str):
    if key not in block:
        return default
    v = block[key]
    # bool is an int subclass; never accept it where a number is expected
    if isinstance(v, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise ConfigError(f"{where}.{key}: expected {_typename(types)}, got boolean")
    if not isinstance(v, types):
        raise ConfigError(f"{where}.{key}: expected {_typename(types)}, got {type(v).__name__}")
    if isinstance(v, float) and not math.isfinite(v):
        raise ConfigError(f"{where}.{key}: expected a finite number")
    return v


def _block(doc: dict, name: str, allowed: tuple[str, ...]) -> dict:
    v = doc.get(name, {})
    if not isinstance(v, dict):
        raise ConfigError(f"{name}: expected object, got {type(v).__name__}")
    unknown = sorted(set(v) - set(allowed))
    if unknown:
        raise ConfigError(f"{name}.{unknown[0]}: unknown key (allowed: {', '.join(allowed)})")
    return v


def _int_list(v, where: str) -> list[int]:
    if not isinstance(v, list) or not v or any(isinstance(x, bool) or not isinstance(x, int) for x in v):
        raise ConfigError(f"{where}: expected non-empty array of integers")
    return [int(x) for x in v]


@dataclass(frozen=True)
class ElementConfig:
    type: str = "analytic-patch"
    hpbw_e_deg: float = 100.0
    hpbw_h_deg: float = 104.0
    backlobe_db: float = -20.0
    cross_level: float = 0.5
    cross_exponent: float = 1.0
    file: Optional[str] = None

    def build(self) -> ElementPattern:
        if self.type == "isotropic":
            return Isotropic()
        if self.type == "cos-power":
            return fit_cos_power(self.hpbw_e_deg, self.hpbw_h_deg, self.backlobe_db)
        if self.type == "tabulated":
            return read_tabulated_csv(self.file)
        return analytic_patch(self.hpbw_e_deg, self.hpbw_h_deg, self.backlobe_db,
                              self.cross_level, self.cross_exponent)


@dataclass(frozen=True)
class ExcitationConfig:
    preset: Optional[str] = None
    modes: Optional[tuple[int, ...]] = None
    oam_l: Optional[int] = None
    weights: Optional[tuple[complex, ...]] = None
    steering: float = 0.0
    normalization: str = Normalization.UNIT_TOTAL_POWER.value

    def build(self, n_elements: int) -> ExcitationVector:
        if self.oam_l is not None:
            return oam_weights(n_elements, self.oam_l)
        if self.modes is not None:
            return mix_modes(n_elements, ModeMixSpec(self.modes, self.steering, self.normalization))
        if self.weights is not None:
            if len(self.weights) != n_elements:
                raise ConfigError(
                    f"excitation.weights: expected {n_elements} entries, got {len(self.weights)}"
                )
            return ExcitationVector(np.array(self.weights), "explicit weights")
        return preset_weights(n_elements, self.preset or "broadcast", self.steering,
                              Normalization(self.normalization))


@dataclass(frozen=True)
class OamConfig:
    theta: float = math.radians(20.0)
    samples: int = 64
    component: str = "total"
    modes: tuple[int, ...] = (-5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5)


@dataclass(frozen=True)
class NearFieldConfig:
    plane: PlaneSpec = field(default_factory=PlaneSpec)
    padding: int = 4
    scan: Optional[str] = None


@dataclass(frozen=True)
class RunConfig:
    geometry: ArrayGeometry = field(default_factory=lambda: ArrayGeometry.from_diameter(
        DEFAULT_ELEMENTS, DEFAULT_DIAMETER, DEFAULT_FREQUENCY))
    element: ElementConfig = field(default_factory=ElementConfig)
    excitation: ExcitationConfig = field(default_factory=ExcitationConfig)
    grid_step: float = 1.0
    oam: OamConfig = field(default_factory=OamConfig)
    nearfield: NearFieldConfig = field(default_factory=NearFieldConfig)
    output_dir: Optional[str] = None
    formats: tuple[str, ...] = ("csv", "json")

    def resolved(self) -> dict:
        """Plain-JSON view of the config with every default filled in, in file units."""
        g = self.geometry
        e = self.element
        x = self.excitation
        el = {"type": e.type}
        if e.type in ("analytic-patch", "cos-power"):
            el.update(hpbw_e_deg=e.hpbw_e_deg, hpbw_h_deg=e.hpbw_h_deg, backlobe_db=e.backlobe_db)
        if e.type == "analytic-patch":
            el.update(cross_level=e.cross_level, cross_exponent=e.cross_exponent)
        if e.type == "tabulated":
            el["file"] = e.file
        if x.oam_l is not None:
            ex = {"oam_l": x.oam_l}
        elif x.modes is not None:
            ex = {"modes": list(x.modes), "steering_deg": rounded(math.degrees(x.steering)),
                  "normalization": x.normalization}
        elif x.weights is not None:
            ex = {"weights": [[w.real, w.imag] for w in x.weights]}
        else:
            ex = {"preset": x.preset or "broadcast", "steering_deg": rounded(math.degrees(x.steering)),
                  "normalization": x.normalization}
        p = self.nearfield.plane
        nf = {"standoff_wl": p.standoff, "width_wl": [p.width_x, p.width_y],
              "points": [p.points_x, p.points_y], "padding": self.nearfield.padding}
        if self.nearfield.scan is not None:
            nf["scan"] = self.nearfield.scan
        return {
            "geometry": {"elements": g.element_count, "radius_mm": rounded(g.radius * 1e3),
                         "frequency_ghz": rounded(g.frequency / 1e9)},
            "element": el,
            "excitation": ex,
            "grid": {"step_deg": self.grid_step},
            "oam": {"theta_deg": rounded(math.degrees(self.oam.theta)), "samples": self.oam.samples,
                    "component": self.oam.component, "modes": list(self.oam.modes)},
            "nearfield": nf,
            # the output directory is left out so that runs compare equal across locations
            "output": {"formats": list(self.formats)},
        }


def _pair(v, where: str, kind):
    if isinstance(v, list):
        if len(v) != 2:
            raise ConfigError(f"{where}: expected a {_typename(kind)} or a pair of them")
        vals = v
    else:
        vals = [v, v]
    for x in vals:
        if isinstance(x, bool) or not isinstance(x, kind):
            raise ConfigError(f"{where}: expected a {_typename(kind)} or a pair of them")
    return vals


def _geometry(doc: dict) -> ArrayGeometry:
    b = _block(doc, "geometry", ("elements", "diameter_mm", "radius_mm", "frequency_ghz"))
    n = _get(b, "elements", int, DEFAULT_ELEMENTS, "geometry")
    if "diameter_mm" in b and "radius_mm" in b:
        raise ConfigError("geometry: give either diameter_mm or radius_mm, not both")
    radius = DEFAULT_DIAMETER / 2
    if "diameter_mm" in b:
        radius = _get(b, "diameter_mm", _NUMBER, None, "geometry") * 1e-3 / 2
    if "radius_mm" in b:
        radius = _get(b, "radius_mm", _NUMBER, None, "geometry") * 1e-3
    freq = _get(b, "frequency_ghz", _NUMBER, DEFAULT_FREQUENCY / 1e9, "geometry") * 1e9
    try:
        return ArrayGeometry(n, radius, freq)
    except InvalidArgumentError as exc:
        raise ConfigError(f"geometry: {exc}") from None


def _element(doc: dict, base: Path) -> ElementConfig:
    b = _block(doc, "element", ("type", "hpbw_e_deg", "hpbw_h_deg", "backlobe_db",
                                "cross_level", "cross_exponent", "file"))
    kind = _get(b, "type", str, "analytic-patch", "element")
    if kind not in ELEMENT_TYPES:
        raise ConfigError(f"element.type: expected one of {', '.join(ELEMENT_TYPES)}, got {kind!r}")
    d = ElementConfig()
    file = _get(b, "file", str, None, "element")
    if kind == "tabulated":
        if file is None:
            raise ConfigError("element.file: required for a tabulated element (string)")
        path = (base / file) if not Path(file).is_absolute() else Path(file)
        if not path.is_file():
            raise ConfigError(f"element.file: file not found: {path}")
        file = str(path)
    elif file is not None:
        raise ConfigError("element.file: only valid with type 'tabulated'")
    cfg = ElementConfig(
        kind,
        float(_get(b, "hpbw_e_deg", _NUMBER, d.hpbw_e_deg, "element")),
        float(_get(b, "hpbw_h_deg", _NUMBER, d.hpbw_h_deg, "element")),
        float(_get(b, "backlobe_db", _NUMBER, d.backlobe_db, "element")),
        float(_get(b, "cross_level", _NUMBER, d.cross_level, "element")),
        float(_get(b, "cross_exponent", _NUMBER, d.cross_exponent, "element")),
        file,
    )
    if kind != "tabulated":
        try:
            cfg.build()
        except InvalidArgumentError as exc:
            raise ConfigError(f"element: {exc}") from None
    return cfg


def _excitation(doc: dict, n_elements: int) -> ExcitationConfig:
    b = _block(doc, "excitation", EXCITATION_SOURCES + ("steering_deg", "normalization"))
    given = [k for k in EXCITATION_SOURCES if k in b]
    if len(given) > 1:
        raise ConfigError(f"excitation: conflicting sources {' and '.join(given)}; give exactly one")
    steering = math.radians(_get(b, "steering_deg", _NUMBER, 0.0, "excitation"))
    norm = _get(b, "normalization", str, Normalization.UNIT_TOTAL_POWER.value, "excitation")
    allowed = [x.value for x in Normalization]
    if norm not in allowed:
        raise ConfigError(f"excitation.normalization: expected one of {', '.join(allowed)}")
    source = given[0] if given else "preset"
    if source in ("oam_l", "weights") and ("steering_deg" in b or "normalization" in b):
        raise ConfigError(f"excitation: steering_deg/normalization do not apply to {source}")
    cfg: ExcitationConfig
    if source == "preset":
        name = _get(b, "preset", str, "broadcast", "excitation")
        if name not in CAST_PRESETS:
            raise ConfigError(f"excitation.preset: expected one of {', '.join(CAST_PRESETS)}")
        cfg = ExcitationConfig(preset=name, steering=steering, normalization=norm)
    elif source == "modes":
        modes = _int_list(b["modes"], "excitation.modes")
        cfg = ExcitationConfig(modes=tuple(modes), steering=steering, normalization=norm)
    elif source == "oam_l":
        cfg = ExcitationConfig(oam_l=_get(b, "oam_l", int, 0, "excitation"))
    else:
        raw = b["weights"]
        ok = isinstance(raw, list) and raw and all(
            isinstance(p, list) and len(p) == 2
            and all(isinstance(x, _NUMBER) and not isinstance(x, bool) for x in p)
            for p in raw
        )
        if not ok:
            raise ConfigError("excitation.weights: expected array of [re, im] number pairs")
        cfg = ExcitationConfig(weights=tuple(complex(a, b_) for a, b_ in raw))
    try:
        cfg.build(n_elements)
    except InvalidArgumentError as exc:
        raise ConfigError(f"excitation: {exc}") from None
    return cfg


def parse_config(text: str, base_dir=".") -> RunConfig:
    """Validate a JSON config document and fill in defaults.

    Relative file paths inside the document resolve against ``base_dir``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config: expected object at top level, got {type(doc).__name__}")
    top = ("geometry", "element", "excitation", "grid", "oam", "nearfield", "output")
    unknown = sorted(set(doc) - set(top))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key (allowed: {', '.join(top)})")
    base = Path(base_dir)

    geometry = _geometry(doc)
    element = _element(doc, base)
    excitation = _excitation(doc, geometry.element_count)

    g = _block(doc, "grid", ("step_deg",))
    step = float(_get(g, "step_deg", _NUMBER, 1.0, "grid"))
    if not step > 0 or abs(round(180.0 / step) * step - 180.0) > 1e-9:
        raise ConfigError("grid.step_deg: expected a positive number dividing 180")

    o = _block(doc, "oam", ("theta_deg", "samples", "component", "modes"))
    od = OamConfig()
    theta = _get(o, "theta_deg", _NUMBER, math.degrees(od.theta), "oam")
    if not 0 < theta < 180:
        raise ConfigError("oam.theta_deg: expected a number strictly between 0 and 180")
    samples = _get(o, "samples", int, od.samples, "oam")
    if samples < 4:
        raise ConfigError("oam.samples: expected an integer >= 4")
    component = _get(o, "component", str, od.component, "oam")
    if component not in COMPONENTS:
        raise ConfigError(f"oam.component: expected one of {', '.join(COMPONENTS)}")
    modes = tuple(_int_list(o["modes"], "oam.modes")) if "modes" in o else od.modes
    oam = OamConfig(math.radians(theta), samples, component, modes)

    nb = _block(doc, "nearfield", ("standoff_wl", "width_wl", "points", "padding", "scan"))
    standoff = _get(nb, "standoff_wl", _NUMBER, 4.0, "nearfield")
    wx, wy = _pair(nb.get("width_wl", 4.0), "nearfield.width_wl", _NUMBER)
    px, py = _pair(nb.get("points", 61), "nearfield.points", int)
    padding = _get(nb, "padding", int, 4, "nearfield")
    scan = _get(nb, "scan", str, None, "nearfield")
    if scan is not None:
        path = (base / scan) if not Path(scan).is_absolute() else Path(scan)
        if not path.is_file():
            raise ConfigError(f"nearfield.scan: file not found: {path}")
        scan = str(path)
    if padding < 1:
        raise ConfigError("nearfield.padding: expected an integer >= 1")
    try:
        plane = PlaneSpec(float(standoff), float(wx), float(wy), px, py)
    except InvalidArgumentError as exc:
        raise ConfigError(f"nearfield: {exc}") from None

    out = _block(doc, "output", ("dir", "formats"))
    out_dir = _get(out, "dir", str, None, "output")
    formats = out.get("formats", list(OUTPUT_FORMATS))
    if not isinstance(formats, list) or not formats or any(f not in OUTPUT_FORMATS for f in formats):
        raise ConfigError(f"output.formats: expected non-empty array drawn from {', '.join(OUTPUT_FORMATS)}")

    return RunConfig(geometry, element, excitation, step, oam,
                     NearFieldConfig(plane, padding, scan), out_dir,
                     tuple(dict.fromkeys(formats)))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent)

