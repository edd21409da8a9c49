"""Planar near-field scans and their plane-wave-spectrum transformation.

A scan plane sits at ``z = standoff`` above the array and is sampled on a
regular x/y grid centred on the z axis. The "co" channel is the x component
of the electric field and "cross" the y component.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RectBivariateSpline

from ._io import atomic_write, atomic_write_json, fmt
from .element import ElementPattern
from .errors import FormatError, InvalidArgumentError, SingularityError
from .excitation import ExcitationVector
from .farfield import DirectionGrid, FarFieldPattern
from .geometry import ArrayGeometry, wavelength, wavenumber

SCAN_HEADER = ["x_mm", "y_mm", "re_co", "im_co", "re_cross", "im_cross"]


@dataclass(frozen=True)
class PlaneSpec:
    """Scan plane geometry, lengths in wavelengths."""

    standoff: float = 4.0
    width_x: float = 4.0
    width_y: float = 4.0
    points_x: int = 61
    points_y: int = 61

    def __post_init__(self):
        if not self.standoff > 0:
            raise InvalidArgumentError("standoff must be positive")
        if not (self.width_x > 0 and self.width_y > 0):
            raise InvalidArgumentError("scan widths must be positive")
        if int(self.points_x) != self.points_x or int(self.points_y) != self.points_y \
                or self.points_x < 2 or self.points_y < 2:
            raise InvalidArgumentError("need at least 2 integer sample points per axis")
        object.__setattr__(self, "points_x", int(self.points_x))
        object.__setattr__(self, "points_y", int(self.points_y))

    def axes(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        """Sample coordinates in meters."""
        x = np.linspace(-self.width_x / 2, self.width_x / 2, self.points_x) * lam
        y = np.linspace(-self.width_y / 2, self.width_y / 2, self.points_y) * lam
        return x, y


@dataclass(frozen=True, eq=False)
class NearFieldScan:
    """Complex co/cross samples, arrays indexed ``[ix, iy]``.

    ``probe_correction`` is an optional hook applied to the plane-wave
    spectrum before the far field is formed; it receives
    ``(kx, ky, spectrum_x, spectrum_y)`` and returns the corrected pair.
    None means an ideal probe.
    """

    plane: PlaneSpec
    frequency: float
    x: np.ndarray
    y: np.ndarray
    co: np.ndarray
    cross: np.ndarray
    probe_correction: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        co = np.asarray(self.co, dtype=complex)
        cross = np.asarray(self.cross, dtype=complex)
        shape = (x.size, y.size)
        if co.shape != shape or cross.shape != shape:
            raise InvalidArgumentError(f"scan arrays must have shape {shape}")
        if not (np.all(np.isfinite(co)) and np.all(np.isfinite(cross))):
            raise InvalidArgumentError("scan samples must be finite")
        for name, v in (("x", x), ("y", y), ("co", co), ("cross", cross)):
            object.__setattr__(self, name, v)

    def combine(self, a: complex, other: "NearFieldScan", b: complex) -> "NearFieldScan":
        """``a*self + b*other`` on the same plane."""
        return NearFieldScan(self.plane, self.frequency, self.x, self.y,
                             a * self.co + b * other.co, a * self.cross + b * other.cross,
                             self.probe_correction)


def near_field_at(geometry: ArrayGeometry, element: ElementPattern,
                  excitation: ExcitationVector, points) -> np.ndarray:
    """Complex field vectors ``(..., 3)`` at Cartesian ``points`` (meters).

    Each element contributes ``w_n G_n exp(-jkr_n)/r_n`` with ``r_n`` the exact
    element-to-point distance and ``G_n`` its polarized pattern toward the point.
    Elements are summed in ascending index order.
    """
    k = geometry.wavenumber
    lam = geometry.wavelength
    w = np.asarray(getattr(excitation, "weights", excitation), dtype=complex)
    if w.shape != (geometry.element_count,):
        raise InvalidArgumentError("excitation length does not match the array")
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != 3:
        raise InvalidArgumentError("points must have three coordinates")
    out = np.zeros(pts.shape, dtype=complex)
    for n, (pos, phi_n) in enumerate(zip(geometry.positions, geometry.azimuths)):
        rx, ry, rz = (pts[..., i] - pos[i] for i in range(3))
        r = np.sqrt(rx * rx + ry * ry + rz * rz)
        if np.any(r < 1e-9 * lam):
            raise SingularityError(f"sample point coincides with element {n}")
        theta = np.arccos(np.clip(rz / r, -1.0, 1.0))
        phi = np.arctan2(ry, rx)
        el_t, el_p = element.evaluate(theta, phi - phi_n)
        ct, st = np.cos(theta), np.sin(theta)
        cp, sp = np.cos(phi), np.sin(phi)
        g = w[n] * np.exp(-1j * k * r) / r
        out[..., 0] += g * (el_t * ct * cp - el_p * sp)
        out[..., 1] += g * (el_t * ct * sp + el_p * cp)
        out[..., 2] += g * (-el_t * st)
    return out


def synthesize_near_field(geometry: ArrayGeometry, element: ElementPattern,
                          excitation: ExcitationVector,
                          plane: Optional[PlaneSpec] = None) -> NearFieldScan:
    """Scan of the array field over ``plane``; co is the x component, cross the y component."""
    plane = plane or PlaneSpec()
    lam = geometry.wavelength
    if plane.standoff < 0.25:
        raise InvalidArgumentError("standoff below a quarter wavelength is outside the model")
    x, y = plane.axes(lam)
    X, Y = np.meshgrid(x, y, indexing="ij")
    pts = np.stack([X, Y, np.full(X.shape, plane.standoff * lam)], axis=-1)
    e = near_field_at(geometry, element, excitation, pts)
    return NearFieldScan(plane, geometry.frequency, x, y, e[..., 0], e[..., 1])


def _uniform_step(axis: np.ndarray, name: str) -> float:
    d = np.diff(axis)
    # files carry 9 significant digits, so allow rounding-level jitter
    if d.size == 0 or d[0] <= 0 or np.any(np.abs(d - d[0]) > 1e-6 * abs(d[0])):
        raise InvalidArgumentError(f"scan {name} axis is not uniform")
    return float((axis[-1] - axis[0]) / d.size)


def plane_wave_spectrum(scan: NearFieldScan, padding: int = 4):
    """Zero-padded 2-D DFT of both channels, phase-referenced to the scan centre.

    Returns ``(kx, ky, Fx, Fy)`` with ascending wavenumber axes and
    ``F(kx, ky) = sum E(x, y) exp(+j(kx (x - xc) + ky (y - yc))) dx dy``.
    """
    if int(padding) != padding or padding < 1:
        raise InvalidArgumentError("padding factor must be a positive integer")
    dx = _uniform_step(scan.x, "x")
    dy = _uniform_step(scan.y, "y")
    nx, ny = scan.x.size, scan.y.size
    mx, my = int(padding) * nx, int(padding) * ny
    cx, cy = nx // 2, ny // 2

    def spectrum(e):
        buf = np.zeros((mx, my), dtype=complex)
        buf[:nx, :ny] = e
        buf = np.roll(buf, (-cx, -cy), axis=(0, 1))
        return np.fft.fftshift(np.fft.ifft2(buf) * (mx * my * dx * dy))

    kx = np.fft.fftshift(np.fft.fftfreq(mx, dx)) * 2 * math.pi
    ky = np.fft.fftshift(np.fft.fftfreq(my, dy)) * 2 * math.pi
    return kx, ky, spectrum(scan.co), spectrum(scan.cross), (scan.x[cx], scan.y[cy])


def _spline(kx, ky, s):
    re = RectBivariateSpline(kx, ky, s.real, kx=3, ky=3)
    im = RectBivariateSpline(kx, ky, s.imag, kx=3, ky=3)
    return lambda a, b: re.ev(a, b) + 1j * im.ev(a, b)


def nf2ff(scan: NearFieldScan, grid: Optional[DirectionGrid] = None,
          padding: int = 4) -> FarFieldPattern:
    """Far field over the forward hemisphere from a planar scan.

    The padded spectrum is read at ``(k sin(theta) cos(phi), k sin(theta) sin(phi))``
    by bicubic spline interpolation, back-propagated to the array plane and
    multiplied by the obliquity factor ``cos(theta)``.
    """
    grid = grid or DirectionGrid.regular(1.0, theta_max_deg=90.0)
    if grid.theta[-1] > math.pi / 2 + 1e-12:
        raise InvalidArgumentError("a planar scan only determines the forward hemisphere")
    k = wavenumber(scan.frequency)
    z0 = scan.plane.standoff * wavelength(scan.frequency)
    kxa, kya, sx, sy, (xc, yc) = plane_wave_spectrum(scan, padding)
    if scan.probe_correction is not None:
        kxg, kyg = np.meshgrid(kxa, kya, indexing="ij")
        sx, sy = scan.probe_correction(kxg, kyg, sx, sy)
    fx_at, fy_at = _spline(kxa, kya, sx), _spline(kxa, kya, sy)
    t, p = grid.mesh()
    ct, st, cp, sp = np.cos(t), np.sin(t), np.cos(p), np.sin(p)
    kx, ky = k * st * cp, k * st * sp
    # back to the array plane, and to the origin if the scan is off-centre
    shift = np.exp(1j * (k * ct * z0 - kx * xc - ky * yc))
    fx = fx_at(kx, ky) * shift
    fy = fy_at(kx, ky) * shift
    # obliquity applied to the full vector: cos(theta) * F_z = -(kx Fx + ky Fy) / k
    ox, oy = ct * fx, ct * fy
    oz = -(kx * fx + ky * fy) / k
    e_theta = ox * ct * cp + oy * ct * sp - oz * st
    e_phi = -ox * sp + oy * cp
    meta = {"source": "nf2ff", "padding": int(padding),
            "standoff_wavelengths": scan.plane.standoff}
    return FarFieldPattern(grid, e_theta, e_phi, meta)


def normalized_error(test: FarFieldPattern, reference: FarFieldPattern,
                     theta_max: float = math.radians(30.0)) -> float:
    """Relative residual after the best complex scaling, in dB.

    ``10 log10( min_a sum |a*T - R|^2 / sum |R|^2 )`` over both field
    components at grid nodes with ``theta <= theta_max``, weighted by solid
    angle. The two patterns must share a grid.
    """
    if test.grid.shape != reference.grid.shape or not (
        np.allclose(test.grid.theta, reference.grid.theta)
        and np.allclose(test.grid.phi, reference.grid.phi)
    ):
        raise InvalidArgumentError("patterns must be sampled on the same grid")
    rows = reference.grid.theta <= theta_max + 1e-12
    w = np.sin(reference.grid.theta[rows])
    # the pole row has no area but still carries the on-axis field
    w = np.where(w > 0, w, 0.5 * np.sin(reference.grid.theta[1]) / 4)[:, None]
    t = np.stack([test.e_theta[rows], test.e_phi[rows]])
    r = np.stack([reference.e_theta[rows], reference.e_phi[rows]])
    tt = float(np.sum(w * np.abs(t) ** 2))
    rr = float(np.sum(w * np.abs(r) ** 2))
    if tt == 0 or rr == 0:
        raise InvalidArgumentError("cannot compare against an all-zero pattern")
    a = complex(np.sum(w * np.conj(t) * r)) / tt
    resid = float(np.sum(w * np.abs(a * t - r) ** 2))
    return 10.0 * math.log10(max(resid / rr, 1e-300))


# ---------------------------------------------------------------- file format

def scan_csv(scan: NearFieldScan) -> str:
    lines = [",".join(SCAN_HEADER)]
    for i, xv in enumerate(scan.x * 1e3):
        for j, yv in enumerate(scan.y * 1e3):
            a, b = scan.co[i, j], scan.cross[i, j]
            lines.append(",".join(fmt(v) for v in (xv, yv, a.real, a.imag, b.real, b.imag)))
    return "\n".join(lines) + "\n"


def sidecar_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_suffix(".json")


def write_scan(csv_path, scan: NearFieldScan) -> tuple[Path, Path]:
    side = {"plane": asdict(scan.plane), "frequency_ghz": scan.frequency / 1e9}
    a = atomic_write(csv_path, scan_csv(scan))
    b = atomic_write_json(sidecar_path(csv_path), side)
    return a, b


def read_scan(csv_path) -> NearFieldScan:
    """Read a scan CSV and its JSON sidecar (same stem, ``.json``)."""
    csv_path = Path(csv_path)
    side_path = sidecar_path(csv_path)
    try:
        side = json.loads(side_path.read_text())
        plane = PlaneSpec(**side["plane"])
        frequency = float(side["frequency_ghz"]) * 1e9
    except FileNotFoundError:
        raise FormatError(f"missing scan sidecar {side_path}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{side_path}: bad sidecar ({exc})") from None
    try:
        with csv_path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != SCAN_HEADER:
                raise FormatError(f"{csv_path}: expected header {','.join(SCAN_HEADER)}")
            data = np.array([[float(v) for v in row] for row in reader if row])
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{csv_path}: non-numeric value ({exc})") from None
    nx, ny = plane.points_x, plane.points_y
    if data.ndim != 2 or data.shape != (nx * ny, 6):
        raise FormatError(f"{csv_path}: expected {nx * ny} rows of 6 values")
    x = data[::ny, 0] * 1e-3
    y = data[:ny, 1] * 1e-3
    if not (np.allclose(data[:, 0], np.repeat(data[::ny, 0], ny))
            and np.allclose(data[:, 1], np.tile(data[:ny, 1], nx))):
        raise FormatError(f"{csv_path}: rows must be ordered by x, then y")
    co = (data[:, 2] + 1j * data[:, 3]).reshape(nx, ny)
    cross = (data[:, 4] + 1j * data[:, 5]).reshape(nx, ny)
    return NearFieldScan(plane, frequency, x, y, co, cross)
