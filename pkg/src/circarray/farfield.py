"""Far-field synthesis of the circular array, directivity and pattern cuts."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._io import atomic_write, atomic_write_json, fmt, rounded
from .element import ElementPattern, Isotropic
from .errors import InvalidArgumentError, UndefinedBeamwidthError
from .excitation import ExcitationVector
from .geometry import ArrayGeometry

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class DirectionGrid:
    """Tensor grid of polar angles ``theta`` and azimuths ``phi`` (radians).

    ``phi`` is treated as periodic and never repeats the 2*pi endpoint.
    """

    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).reshape(-1)
        phi = np.array(self.phi, dtype=float).reshape(-1)
        if theta.size < 2 or phi.size < 2:
            raise InvalidArgumentError("grid needs at least 2 samples per axis")
        if np.any(np.diff(theta) <= 0) or np.any(np.diff(phi) <= 0):
            raise InvalidArgumentError("grid axes must be strictly increasing")
        if theta[0] < -1e-12 or theta[-1] > math.pi + 1e-12:
            raise InvalidArgumentError("theta samples must lie in [0, pi]")
        if phi[0] < -1e-12 or phi[-1] >= TWO_PI - 1e-12:
            raise InvalidArgumentError("phi samples must lie in [0, 2*pi)")
        theta.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def regular(cls, step_deg: float = 1.0, theta_max_deg: float = 180.0) -> "DirectionGrid":
        """Uniform grid: theta from 0 to ``theta_max_deg`` inclusive, phi over [0, 360)."""
        if not step_deg > 0:
            raise InvalidArgumentError(f"grid step must be positive, got {step_deg!r}")
        n_theta = round(theta_max_deg / step_deg)
        n_phi = round(360.0 / step_deg)
        if abs(n_theta * step_deg - theta_max_deg) > 1e-9 or abs(n_phi * step_deg - 360.0) > 1e-9:
            raise InvalidArgumentError(f"grid step {step_deg} deg must divide {theta_max_deg} and 360")
        theta = np.radians(np.arange(n_theta + 1) * step_deg)
        theta[-1] = math.radians(theta_max_deg)
        phi = np.radians(np.arange(n_phi) * step_deg)
        return cls(theta, phi)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.theta.size, self.phi.size)

    @property
    def phi_step(self) -> Optional[float]:
        """Common phi spacing if the axis is uniform and closes the circle."""
        d = np.diff(self.phi)
        step = TWO_PI / self.phi.size
        if np.allclose(d, step, rtol=0, atol=1e-9) and abs(self.phi[0]) < 1e-9:
            return step
        return None

    @property
    def full_sphere(self) -> bool:
        return (
            abs(self.theta[0]) < 1e-9
            and abs(self.theta[-1] - math.pi) < 1e-9
            and self.phi_step is not None
        )

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.theta, self.phi, indexing="ij")

    def describe(self) -> dict:
        return {
            "n_theta": int(self.theta.size),
            "n_phi": int(self.phi.size),
            "theta_range_deg": [rounded(math.degrees(self.theta[0])), rounded(math.degrees(self.theta[-1]))],
        }


@dataclass(frozen=True, eq=False)
class FarFieldPattern:
    """Complex ``E_theta`` / ``E_phi`` samples on a direction grid."""

    grid: DirectionGrid
    e_theta: np.ndarray
    e_phi: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        et = np.asarray(self.e_theta, dtype=complex)
        ep = np.asarray(self.e_phi, dtype=complex)
        if et.shape != self.grid.shape or ep.shape != self.grid.shape:
            raise InvalidArgumentError(
                f"field arrays {et.shape}/{ep.shape} do not match grid {self.grid.shape}"
            )
        object.__setattr__(self, "e_theta", et)
        object.__setattr__(self, "e_phi", ep)

    @property
    def intensity(self) -> np.ndarray:
        """Radiation intensity ``|E_theta|^2 + |E_phi|^2`` (relative units)."""
        return np.abs(self.e_theta) ** 2 + np.abs(self.e_phi) ** 2

    def radiated_power(self) -> float:
        return radiated_power(self.grid, self.intensity)


def radiated_power(grid: DirectionGrid, intensity: np.ndarray) -> float:
    """Integral of ``intensity * sin(theta)`` over the full sphere.

    Trapezoidal in theta; in phi the periodic trapezoid, i.e. a plain sum
    times the step.
    """
    if not grid.full_sphere:
        raise InvalidArgumentError("radiated power needs a full-sphere grid")
    weighted = intensity * np.sin(grid.theta)[:, None]
    # sin(0) and sin(pi) are not exactly 0 in floating point; the poles carry no area
    weighted[0] = 0.0
    if abs(grid.theta[-1] - math.pi) < 1e-12:
        weighted[-1] = 0.0
    per_phi = np.trapezoid(weighted, grid.theta, axis=0)
    return float(np.sum(per_phi) * grid.phi_step)


# ---------------------------------------------------------------- evaluation

def _check_excitation(geometry: ArrayGeometry, excitation: ExcitationVector) -> np.ndarray:
    w = np.asarray(getattr(excitation, "weights", excitation), dtype=complex)
    if w.shape != (geometry.element_count,):
        raise InvalidArgumentError(
            f"excitation has {w.size} weights but the array has {geometry.element_count} elements"
        )
    return w


def array_factor(geometry: ArrayGeometry, excitation: ExcitationVector, theta, phi):
    """``sum_n w_n exp(j k R sin(theta) cos(phi - phi_n))`` for isotropic elements.

    ``theta`` and ``phi`` may be scalars or broadcastable arrays.
    """
    w = _check_excitation(geometry, excitation)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    kr_sin = geometry.kr * np.sin(theta)
    acc = np.zeros(np.broadcast(theta, phi).shape, dtype=complex)
    for n, phi_n in enumerate(geometry.azimuths):
        acc = acc + w[n] * np.exp(1j * kr_sin * np.cos(phi - phi_n))
    return complex(acc) if acc.ndim == 0 else acc


def evaluate_field(geometry: ArrayGeometry, element: ElementPattern,
                   excitation: ExcitationVector, theta, phi):
    """Array far field ``(E_theta, E_phi)`` at arbitrary directions.

    Element frames differ from the global frame only by a rotation about z, so
    the local polar angle equals ``theta``, the local azimuth is
    ``phi - phi_n`` and the spherical unit vectors coincide. Elements are
    summed in ascending index order.
    """
    w = _check_excitation(geometry, excitation)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    shape = np.broadcast(theta, phi).shape
    kr_sin = geometry.kr * np.sin(theta)
    isotropic = isinstance(element, Isotropic)
    e_theta = np.zeros(shape, dtype=complex)
    e_phi = np.zeros(shape, dtype=complex)
    for n, phi_n in enumerate(geometry.azimuths):
        local_phi = phi - phi_n
        phase = np.exp(1j * kr_sin * np.cos(local_phi))
        if isotropic:
            e_theta = e_theta + w[n] * phase
            continue
        el_t, el_p = element.evaluate(theta, local_phi)
        e_theta = e_theta + (w[n] * el_t) * phase
        e_phi = e_phi + (w[n] * el_p) * phase
    return e_theta, e_phi


def synthesize_pattern(geometry: ArrayGeometry, element: ElementPattern,
                       excitation: ExcitationVector,
                       grid: Optional[DirectionGrid] = None) -> FarFieldPattern:
    grid = grid or DirectionGrid.regular(1.0)
    t, p = grid.mesh()
    e_theta, e_phi = evaluate_field(geometry, element, excitation, t, p)
    meta = {
        "excitation": getattr(excitation, "description", ""),
        "element": getattr(element, "variant", type(element).__name__),
        "geometry": geometry.digest(),
    }
    return FarFieldPattern(grid, e_theta, e_phi, meta)


# ---------------------------------------------------------------- directivity

@dataclass(frozen=True)
class Directivity:
    """Directivity over the grid (linear) and its peak."""

    values: np.ndarray
    peak_dbi: float
    peak_theta: float
    peak_phi: float

    @property
    def dbi(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.values)


def directivity(pattern: FarFieldPattern) -> Directivity:
    grid = pattern.grid
    if not grid.full_sphere:
        raise InvalidArgumentError("directivity is undefined on a partial-sphere grid")
    u = pattern.intensity
    p_rad = radiated_power(grid, u)
    if not p_rad > 0 or not math.isfinite(p_rad):
        raise InvalidArgumentError("pattern radiates no power")
    d = 4.0 * math.pi * u / p_rad
    i, j = np.unravel_index(int(np.argmax(d)), d.shape)
    return Directivity(d, 10.0 * math.log10(d[i, j]), float(grid.theta[i]), float(grid.phi[j]))


# ---------------------------------------------------------------- cuts

@dataclass(frozen=True, eq=False)
class Cut:
    """One-dimensional pattern cut.

    ``co`` is ``E_theta`` and ``cross`` is ``E_phi`` along the cut.
    ``reference`` is the intensity that maps to 0 dB; for cuts of full-sphere
    patterns it is the isotropic level, so ``mag_db`` reads in dBi.
    """

    angles: np.ndarray
    co: np.ndarray
    cross: np.ndarray
    reference: float = 1.0
    periodic: bool = True

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.co) ** 2 + np.abs(self.cross) ** 2

    @property
    def mag_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.power / self.reference)

    @property
    def phase_deg(self) -> np.ndarray:
        return np.degrees(np.angle(self.co))

    @classmethod
    def from_power(cls, angles, power, periodic: bool = True) -> "Cut":
        """Cut with a real amplitude profile; handy for synthetic tests."""
        amp = np.sqrt(np.asarray(power, dtype=float))
        return cls(np.asarray(angles, dtype=float), amp.astype(complex),
                   np.zeros_like(amp, dtype=complex), 1.0, periodic)


def _reference_level(pattern: FarFieldPattern) -> float:
    if pattern.grid.full_sphere:
        p = pattern.radiated_power()
        if p > 0:
            return p / (4.0 * math.pi)
    peak = float(np.max(pattern.intensity))
    return peak if peak > 0 else 1.0


def azimuth_cut(pattern: FarFieldPattern, theta: float) -> Cut:
    """Constant-theta cut over the full phi axis, linear in theta between rows."""
    if not 0.0 <= theta <= math.pi:
        raise InvalidArgumentError(f"theta {theta!r} outside [0, pi]")
    th = pattern.grid.theta
    if theta < th[0] - 1e-12 or theta > th[-1] + 1e-12:
        raise InvalidArgumentError(f"theta {theta!r} outside the grid range")
    i = int(np.searchsorted(th, theta))
    if i < th.size and abs(th[i] - theta) <= 1e-12:
        co, cross = pattern.e_theta[i].copy(), pattern.e_phi[i].copy()
    elif i > 0 and abs(th[i - 1] - theta) <= 1e-12:
        co, cross = pattern.e_theta[i - 1].copy(), pattern.e_phi[i - 1].copy()
    else:
        i = min(max(i, 1), th.size - 1)
        f = (theta - th[i - 1]) / (th[i] - th[i - 1])
        co = pattern.e_theta[i - 1] * (1 - f) + pattern.e_theta[i] * f
        cross = pattern.e_phi[i - 1] * (1 - f) + pattern.e_phi[i] * f
    return Cut(pattern.grid.phi.copy(), co, cross, _reference_level(pattern), True)


def elevation_cut(pattern: FarFieldPattern, phi: float) -> Cut:
    """Great-circle cut through ``phi`` and ``phi + pi``, angle running 0..2*pi.

    The cut angle is theta on the ``phi`` half and ``2*pi - theta`` on the
    opposite half. ``phi`` and ``phi + pi`` must both be grid columns.
    """
    cols = pattern.grid.phi

    def column(target):
        target = target % TWO_PI
        d = np.abs((cols - target + math.pi) % TWO_PI - math.pi)
        j = int(np.argmin(d))
        if d[j] > 1e-9:
            raise InvalidArgumentError(f"phi={math.degrees(target):.6g} deg is not a grid column")
        return j

    a, b = column(phi), column(phi + math.pi)
    th = pattern.grid.theta
    if abs(th[0]) > 1e-9 or abs(th[-1] - math.pi) > 1e-9:
        raise InvalidArgumentError("elevation cut needs theta over [0, pi]")
    angles = np.concatenate([th, TWO_PI - th[-2:0:-1]])
    co = np.concatenate([pattern.e_theta[:, a], pattern.e_theta[-2:0:-1, b]])
    cross = np.concatenate([pattern.e_phi[:, a], pattern.e_phi[-2:0:-1, b]])
    return Cut(angles, co, cross, _reference_level(pattern), True)


@dataclass(frozen=True)
class Lobe:
    center: float
    level_db: float
    width: float


def _crossing(db: np.ndarray, start: int, level: float, step: int, periodic: bool):
    """Fractional index where ``db`` first drops below ``level`` walking from ``start``."""
    n = db.size
    prev = start
    for k in range(1, n):
        i = start + step * k
        if periodic:
            i %= n
        elif not 0 <= i < n:
            return None
        if db[i] < level:
            a, b = db[prev], db[i]
            frac = (a - level) / (a - b) if a != b else 0.0
            return start + step * (k - 1 + frac)
        prev = i
    return None


def _angle_at(cut: Cut, idx: float) -> float:
    """Angle at a (possibly fractional, possibly out-of-range) index."""
    n = cut.angles.size
    if cut.periodic:
        step = TWO_PI / n
        return cut.angles[0] + idx * step
    i = min(max(int(math.floor(idx)), 0), n - 2)
    f = idx - i
    return cut.angles[i] * (1 - f) + cut.angles[i + 1] * f


def _width(cut: Cut, db: np.ndarray, i: int):
    level = db[i] - 3.0
    left = _crossing(db, i, level, -1, cut.periodic)
    right = _crossing(db, i, level, +1, cut.periodic)
    if left is None or right is None:
        return None
    return _angle_at(cut, right) - _angle_at(cut, left)


def find_lobes(cut: Cut, threshold_db: float = 6.0) -> list[Lobe]:
    """Local maxima within ``threshold_db`` of the cut's peak, strongest first.

    A flat top of equal samples counts once, at its last sample; a cut that
    is constant everywhere has no lobes.
    """
    n = cut.angles.size
    if n < 8:
        raise InvalidArgumentError("a cut needs at least 8 samples for lobe search")
    p = cut.power
    if not np.any(p > 0):
        return []
    db = cut.mag_db
    top = float(np.max(db))
    peaks = []
    for i in range(n):
        if cut.periodic:
            left, right = db[i - 1], db[(i + 1) % n]
        else:
            left = db[i - 1] if i > 0 else -np.inf
            right = db[i + 1] if i < n - 1 else -np.inf
        if db[i] >= left and db[i] > right and db[i] >= top - threshold_db:
            peaks.append(i)
    merged: list[int] = []
    for i in peaks:
        if merged and (i - merged[-1]) <= 1:
            if db[i] > db[merged[-1]]:
                merged[-1] = i
            continue
        merged.append(i)
    if cut.periodic and len(merged) > 1 and (merged[0] + n - merged[-1]) <= 1:
        last = merged.pop()
        if db[last] > db[merged[0]]:
            merged[0] = last
    lobes = []
    for i in merged:
        w = _width(cut, db, i)
        lobes.append(Lobe(float(cut.angles[i]), float(db[i]), math.nan if w is None else w))
    lobes.sort(key=lambda lb: (-lb.level_db, lb.center))
    return lobes


def hpbw(cut: Cut) -> float:
    """Width in degrees between the -3 dB crossings around the cut's peak."""
    if not np.any(cut.power > 0):
        raise UndefinedBeamwidthError("cut is identically zero")
    db = cut.mag_db
    i = int(np.argmax(db))
    w = _width(cut, db, i)
    if w is None or w >= TWO_PI:
        raise UndefinedBeamwidthError("no -3 dB crossing on both sides of the peak")
    return math.degrees(w)


# ---------------------------------------------------------------- rotation

def rotate_pattern(pattern: FarFieldPattern, delta_phi: float) -> FarFieldPattern:
    """Pattern rotated about z: ``new(theta, phi) = old(theta, phi - delta_phi)``.

    Shifts that are whole multiples of the phi step are pure re-indexing;
    anything else is linearly interpolated around the periodic phi axis.
    """
    step = pattern.grid.phi_step
    if step is None:
        raise InvalidArgumentError("rotation needs a uniform phi axis covering [0, 2*pi)")
    shift = delta_phi / step
    whole = round(shift)
    meta = dict(pattern.metadata, rotated_deg=rounded(math.degrees(delta_phi)))
    if abs(shift - whole) < 1e-9:
        k = whole % pattern.grid.phi.size
        return FarFieldPattern(pattern.grid, np.roll(pattern.e_theta, k, axis=1),
                               np.roll(pattern.e_phi, k, axis=1), meta)
    base = math.floor(shift)
    f = shift - base
    n = pattern.grid.phi.size

    def shifted(a):
        # new[j] = old at fractional index j - shift
        a0 = np.roll(a, base % n, axis=1)
        a1 = np.roll(a, (base + 1) % n, axis=1)
        return a0 * (1 - f) + a1 * f

    return FarFieldPattern(pattern.grid, shifted(pattern.e_theta), shifted(pattern.e_phi), meta)


def interpolate_field(pattern: FarFieldPattern, theta, phi):
    """Bilinear interpolation of both components (periodic in phi)."""
    g = pattern.grid
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    th = g.theta
    if np.any(theta < th[0] - 1e-12) or np.any(theta > th[-1] + 1e-12):
        raise InvalidArgumentError("theta outside the pattern grid")
    i = np.clip(np.searchsorted(th, theta, side="right") - 1, 0, th.size - 2)
    ft = np.clip((theta - th[i]) / (th[i + 1] - th[i]), 0.0, 1.0)
    step = g.phi_step
    if step is None:
        raise InvalidArgumentError("interpolation needs a uniform phi axis")
    pf = np.mod(phi - g.phi[0], TWO_PI) / step
    j0 = np.floor(pf).astype(int) % g.phi.size
    fp = pf - np.floor(pf)
    j1 = (j0 + 1) % g.phi.size

    def lerp(a):
        top = a[i, j0] * (1 - fp) + a[i, j1] * fp
        bot = a[i + 1, j0] * (1 - fp) + a[i + 1, j1] * fp
        return top * (1 - ft) + bot * ft

    return lerp(pattern.e_theta), lerp(pattern.e_phi)


# ---------------------------------------------------------------- export

PATTERN_HEADER = "theta_deg,phi_deg,re_etheta,im_etheta,re_ephi,im_ephi,directivity_dbi"
CUT_HEADER = "phi_deg,mag_db,phase_deg"


def _directivity_db_or_nan(pattern: FarFieldPattern) -> np.ndarray:
    if pattern.grid.full_sphere:
        return directivity(pattern).dbi
    ref = _reference_level(pattern)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(pattern.intensity / ref)


def pattern_csv(pattern: FarFieldPattern) -> str:
    """CSV text, rows ordered by theta then phi.

    For partial-sphere patterns the last column is intensity relative to the
    pattern peak, since directivity is undefined there.
    """
    d = _directivity_db_or_nan(pattern)
    td = np.degrees(pattern.grid.theta)
    pd = np.degrees(pattern.grid.phi)
    lines = [PATTERN_HEADER]
    for i, t in enumerate(td):
        for j, p in enumerate(pd):
            a, b = pattern.e_theta[i, j], pattern.e_phi[i, j]
            lines.append(",".join(fmt(v) for v in (t, p, a.real, a.imag, b.real, b.imag, d[i, j])))
    return "\n".join(lines) + "\n"


def pattern_to_dict(pattern: FarFieldPattern) -> dict:
    r = np.vectorize(rounded, otypes=[float])
    return {
        "theta_deg": r(np.degrees(pattern.grid.theta)).tolist(),
        "phi_deg": r(np.degrees(pattern.grid.phi)).tolist(),
        "re_etheta": r(pattern.e_theta.real).ravel().tolist(),
        "im_etheta": r(pattern.e_theta.imag).ravel().tolist(),
        "re_ephi": r(pattern.e_phi.real).ravel().tolist(),
        "im_ephi": r(pattern.e_phi.imag).ravel().tolist(),
        "full_sphere": bool(pattern.grid.full_sphere),
        "metadata": pattern.metadata,
    }


def pattern_from_dict(obj: dict) -> FarFieldPattern:
    grid = DirectionGrid(np.radians(obj["theta_deg"]), np.radians(obj["phi_deg"]))
    shape = grid.shape
    et = (np.asarray(obj["re_etheta"]) + 1j * np.asarray(obj["im_etheta"])).reshape(shape)
    ep = (np.asarray(obj["re_ephi"]) + 1j * np.asarray(obj["im_ephi"])).reshape(shape)
    return FarFieldPattern(grid, et, ep, dict(obj.get("metadata", {})))


def write_pattern_csv(path, pattern: FarFieldPattern):
    return atomic_write(path, pattern_csv(pattern))


def write_pattern_json(path, pattern: FarFieldPattern):
    return atomic_write_json(path, pattern_to_dict(pattern))


def read_pattern_json(path) -> FarFieldPattern:
    with open(path) as fh:
        return pattern_from_dict(json.load(fh))


def cut_csv(cut: Cut) -> str:
    lines = [CUT_HEADER]
    for a, m, ph in zip(np.degrees(cut.angles), cut.mag_db, cut.phase_deg):
        lines.append(f"{fmt(a)},{fmt(m)},{fmt(ph)}")
    return "\n".join(lines) + "\n"


def write_cut_csv(path, cut: Cut):
    return atomic_write(path, cut_csv(cut))
