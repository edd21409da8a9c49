"""Polarized directional patterns of a single radiator.

All patterns are expressed in the element's local frame: the polar angle
``theta`` is measured from the local vertical axis and the azimuth ``phi``
from the local boresight. A pattern returns the complex pair
``(E_theta, E_phi)`` on the local spherical unit vectors.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import FormatError, InvalidArgumentError

TABULATED_HEADER = ["theta_deg", "phi_deg", "re_etheta", "im_etheta", "re_ephi", "im_ephi"]

_UNIT_TOL = 1e-9


def direction_to_angles(direction) -> tuple[np.ndarray, np.ndarray]:
    """Local unit vector(s) ``(..., 3)`` to ``(theta, phi)``; phi in [0, 2*pi)."""
    d = np.asarray(direction, dtype=float)
    if d.shape[-1] != 3:
        raise InvalidArgumentError("direction must have three components")
    norm = np.linalg.norm(d, axis=-1)
    if np.any(np.abs(norm - 1.0) > _UNIT_TOL):
        raise InvalidArgumentError("direction must be a unit vector")
    theta = np.arccos(np.clip(d[..., 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(d[..., 1], d[..., 0]), 2 * math.pi)
    return theta, phi


def _boresight_terms(theta, phi, q_e, q_h):
    """Cosine of the angle from boresight and the plane-blended exponent."""
    st = np.sin(theta)
    dx = st * np.cos(phi)
    dy = st * np.sin(phi)
    dz = np.cos(theta)
    off = dy * dy + dz * dz
    # fraction of the off-boresight displacement lying in the E-plane (local xz)
    with np.errstate(invalid="ignore", divide="ignore"):
        e_frac = np.where(off > 0, dz * dz / np.where(off > 0, off, 1.0), 0.5)
    q = q_e * e_frac + q_h * (1.0 - e_frac)
    return dx, q


def _cos_power(theta, phi, q_e, q_h, floor):
    """Co-polar power ``cos(alpha)**q`` in front, ``floor`` behind."""
    dx, q = _boresight_terms(theta, phi, q_e, q_h)
    front = np.power(np.clip(dx, 0.0, 1.0), q)
    return np.where(dx > 0, np.maximum(front, floor), floor)


@dataclass(frozen=True)
class Isotropic:
    variant = "isotropic"

    def evaluate(self, theta, phi):
        shape = np.broadcast(np.asarray(theta), np.asarray(phi)).shape
        return np.ones(shape), np.zeros(shape)


@dataclass(frozen=True)
class CosPower:
    """Vertically polarized ``cos**q`` beam along the local boresight.

    ``q_e`` applies in the local xz (vertical) plane, ``q_h`` in the local xy
    plane; between them the exponent follows ``q_e*sin^2 + q_h*cos^2`` of the
    angle around the boresight. Power behind the element, and anywhere the
    front lobe drops below it, is held at ``backlobe_db``.
    """

    q_e: float
    q_h: float
    backlobe_db: float = -20.0

    variant = "cos-power"

    def __post_init__(self):
        if not (self.q_e >= 0 and self.q_h >= 0):
            raise InvalidArgumentError("cos-power exponents must be non-negative")

    @property
    def floor(self) -> float:
        return 0.0 if self.backlobe_db == -math.inf else 10.0 ** (self.backlobe_db / 10.0)

    def co_power(self, theta, phi):
        return _cos_power(theta, phi, self.q_e, self.q_h, self.floor)

    def evaluate(self, theta, phi):
        e_theta = np.sqrt(self.co_power(theta, phi)).astype(float)
        return e_theta, np.zeros_like(e_theta)


@dataclass(frozen=True)
class AnalyticPatch:
    """Patch-like element with a horizontal-plane beam and an upward lobe.

    The co-polar part is the local vertical axis projected on the sphere
    (``E_theta = sin(theta)``) weighted by the ``cos**q`` beam of
    :class:`CosPower`. The cross-polar part is the boresight axis projected on
    the sphere, scaled by ``cross_level * max(cos(theta), 0)**cross_exponent``,
    so it radiates only into the upper hemisphere and vanishes in the
    horizontal plane.
    """

    q_e: float
    q_h: float
    backlobe_db: float = -20.0
    cross_level: float = 0.5
    cross_exponent: float = 1.0

    variant = "analytic-patch"

    def __post_init__(self):
        if not (self.q_e >= 0 and self.q_h >= 0):
            raise InvalidArgumentError("cos-power exponents must be non-negative")
        if not self.cross_exponent >= 0:
            raise InvalidArgumentError("cross_exponent must be non-negative")

    @property
    def floor(self) -> float:
        return 0.0 if self.backlobe_db == -math.inf else 10.0 ** (self.backlobe_db / 10.0)

    def evaluate(self, theta, phi):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        ct = np.cos(theta)
        co = np.sin(theta) * np.sqrt(_cos_power(theta, phi, self.q_e, self.q_h, self.floor))
        up = self.cross_level * np.power(np.maximum(ct, 0.0), self.cross_exponent)
        e_theta = co + up * ct * np.cos(phi)
        e_phi = -up * np.sin(phi)
        return e_theta.astype(complex), e_phi.astype(complex)


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Sampled pattern on a regular (theta, phi) grid, bilinearly interpolated.

    ``e_theta`` and ``e_phi`` have shape ``(len(theta), len(phi))``. The phi
    axis wraps around; theta outside the grid is clamped to the nearest row.
    """

    theta: np.ndarray
    phi: np.ndarray
    e_theta: np.ndarray
    e_phi: np.ndarray

    variant = "tabulated"

    def evaluate(self, theta, phi):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        nt, npf = self.theta.size, self.phi.size
        dth = self.theta[1] - self.theta[0]
        dph = 2 * math.pi / npf
        t = np.clip((theta - self.theta[0]) / dth, 0.0, nt - 1)
        i0 = np.minimum(np.floor(t).astype(int), nt - 2)
        ft = t - i0
        p = np.mod(phi - self.phi[0], 2 * math.pi) / dph
        j0 = np.floor(p).astype(int) % npf
        fp = p - np.floor(p)
        j1 = (j0 + 1) % npf

        def interp(table):
            a = table[i0, j0] * (1 - fp) + table[i0, j1] * fp
            b = table[i0 + 1, j0] * (1 - fp) + table[i0 + 1, j1] * fp
            return a * (1 - ft) + b * ft

        return interp(self.e_theta), interp(self.e_phi)


ElementPattern = Union[Isotropic, CosPower, AnalyticPatch, Tabulated]


def eval_element(pattern: ElementPattern, direction) -> tuple[complex, complex]:
    """Evaluate a pattern toward a local unit direction vector."""
    theta, phi = direction_to_angles(direction)
    e_t, e_p = pattern.evaluate(theta, phi)
    if np.ndim(e_t) == 0:
        return complex(e_t), complex(e_p)
    return np.asarray(e_t, dtype=complex), np.asarray(e_p, dtype=complex)


def cos_power_exponent(hpbw_deg: float) -> float:
    """Exponent ``q`` with ``cos(hpbw/2)**q == 1/2``."""
    if not 0 < hpbw_deg < 360 or not math.isfinite(hpbw_deg):
        raise InvalidArgumentError(f"beamwidth must lie in (0, 360) degrees, got {hpbw_deg!r}")
    half = math.radians(hpbw_deg / 2.0)
    c = math.cos(half)
    if c <= 1e-12:
        # a cos**q lobe cannot be 3 dB wide beyond 180 degrees
        raise InvalidArgumentError(f"beamwidth {hpbw_deg} deg is not reachable by a cos**q lobe")
    if c == 1.0:
        raise InvalidArgumentError(f"beamwidth {hpbw_deg} deg is too narrow")
    return math.log(0.5) / math.log(c)


def fit_cos_power(hpbw_e: float, hpbw_h: float, backlobe_db: float = -20.0) -> CosPower:
    """Cos-power element matching the given E- and H-plane half-power widths."""
    return CosPower(cos_power_exponent(hpbw_e), cos_power_exponent(hpbw_h), backlobe_db)


def analytic_patch(hpbw_e: float = 100.0, hpbw_h: float = 104.0, backlobe_db: float = -20.0,
                   cross_level: float = 0.5, cross_exponent: float = 1.0) -> AnalyticPatch:
    """Analytic patch with the default 100/104 degree beamwidths."""
    base = fit_cos_power(hpbw_e, hpbw_h, backlobe_db)
    return AnalyticPatch(base.q_e, base.q_h, backlobe_db, cross_level, cross_exponent)


def _regular(axis: np.ndarray, name: str) -> float:
    if axis.ndim != 1 or axis.size < 2:
        raise FormatError(f"{name} axis needs at least 2 samples")
    steps = np.diff(axis)
    step = steps[0]
    if step <= 0 or np.any(np.abs(steps - step) > 1e-9 * max(1.0, abs(step)) + 1e-12):
        raise FormatError(f"{name} axis is not regular and ascending")
    return float(step)


def import_tabulated(theta, phi, e_theta, e_phi) -> Tabulated:
    """Build a tabulated pattern from grid axes (radians) and complex samples.

    ``theta`` must run from 0 to pi and ``phi`` from 0 in equal steps that
    close the circle.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    e_theta = np.asarray(e_theta, dtype=complex)
    e_phi = np.asarray(e_phi, dtype=complex)
    if theta.size == 0 or phi.size == 0:
        raise FormatError("tabulated grid is empty")
    _regular(theta, "theta")
    dph = _regular(phi, "phi")
    if abs(theta[0]) > 1e-9 or abs(theta[-1] - math.pi) > 1e-9:
        raise FormatError("theta axis must span [0, pi]")
    if abs(phi[0]) > 1e-9 or abs(dph * phi.size - 2 * math.pi) > 1e-9:
        raise FormatError("phi axis must start at 0 and cover [0, 2*pi) without gaps")
    shape = (theta.size, phi.size)
    if e_theta.shape != shape or e_phi.shape != shape:
        raise FormatError(f"sample arrays must have shape {shape}")
    if not (np.all(np.isfinite(e_theta)) and np.all(np.isfinite(e_phi))):
        raise FormatError("tabulated samples must be finite")
    for a in (theta, phi, e_theta, e_phi):
        a.setflags(write=False)
    return Tabulated(theta, phi, e_theta, e_phi)


def read_tabulated_csv(path) -> Tabulated:
    """Read a pattern written as rows of ``theta_deg,phi_deg,re/im E_theta,re/im E_phi``."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != TABULATED_HEADER:
                raise FormatError(f"{path}: expected header {','.join(TABULATED_HEADER)}")
            rows = [[float(v) for v in row] for row in reader if row]
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: non-numeric value ({exc})") from None
    if not rows:
        raise FormatError(f"{path}: no samples")
    data = np.array(rows)
    if data.shape[1] != 6:
        raise FormatError(f"{path}: expected 6 columns")
    theta_deg = np.unique(data[:, 0])
    phi_deg = np.unique(data[:, 1])
    nt, npf = theta_deg.size, phi_deg.size
    if data.shape[0] != nt * npf:
        raise FormatError(f"{path}: grid has gaps ({data.shape[0]} rows for {nt}x{npf} nodes)")
    expect_t = np.repeat(theta_deg, npf)
    expect_p = np.tile(phi_deg, nt)
    if not (np.array_equal(data[:, 0], expect_t) and np.array_equal(data[:, 1], expect_p)):
        raise FormatError(f"{path}: rows must be ordered by theta, then phi")
    et = (data[:, 2] + 1j * data[:, 3]).reshape(nt, npf)
    ep = (data[:, 4] + 1j * data[:, 5]).reshape(nt, npf)
    return import_tabulated(np.radians(theta_deg), np.radians(phi_deg), et, ep)


def write_tabulated_csv(path, pattern: Tabulated) -> None:
    from ._io import atomic_write, fmt

    lines = [",".join(TABULATED_HEADER)]
    td = np.degrees(pattern.theta)
    pd = np.degrees(pattern.phi)
    for i, t in enumerate(td):
        for j, p in enumerate(pd):
            a, b = pattern.e_theta[i, j], pattern.e_phi[i, j]
            lines.append(",".join(fmt(v) for v in (t, p, a.real, a.imag, b.real, b.imag)))
    atomic_write(path, "\n".join(lines) + "\n")


def sample_pattern(pattern: ElementPattern, n_theta: int = 181, n_phi: int = 360) -> Tabulated:
    """Tabulate any pattern on a regular grid."""
    theta = np.linspace(0.0, math.pi, n_theta)
    phi = np.arange(n_phi) * (2 * math.pi / n_phi)
    t, p = np.meshgrid(theta, phi, indexing="ij")
    et, ep = pattern.evaluate(t, p)
    return import_tabulated(theta, phi, et, ep)
