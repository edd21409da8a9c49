"""Uniform circular array layout and element frames."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgumentError

SPEED_OF_LIGHT = 299_792_458.0
"Speed of light in vacuum, m/s (SI exact)."

DEFAULT_ELEMENTS = 12
DEFAULT_DIAMETER = 19.38e-3
DEFAULT_FREQUENCY = 28e9


def element_azimuths(n_elements: int) -> np.ndarray:
    """Angular positions ``n * 2*pi / N`` of the elements, in radians."""
    if int(n_elements) != n_elements or n_elements < 1:
        raise InvalidArgumentError(f"element count must be a positive integer, got {n_elements!r}")
    n_elements = int(n_elements)
    return np.arange(n_elements) * (2.0 * math.pi / n_elements)


def wavenumber(frequency: float) -> float:
    """Free-space wavenumber ``2*pi*f/c`` in rad/m."""
    if not frequency > 0 or not math.isfinite(frequency):
        raise InvalidArgumentError(f"frequency must be positive, got {frequency!r}")
    return 2.0 * math.pi * frequency / SPEED_OF_LIGHT


def wavelength(frequency: float) -> float:
    if not frequency > 0 or not math.isfinite(frequency):
        raise InvalidArgumentError(f"frequency must be positive, got {frequency!r}")
    return SPEED_OF_LIGHT / frequency


class Frame(NamedTuple):
    """Rigid frame of one element.

    ``boresight`` is the local x axis, ``vertical`` the local z axis; the local
    y axis is ``vertical x boresight`` (tangential, counter-clockwise).
    """

    origin: np.ndarray
    boresight: np.ndarray
    vertical: np.ndarray

    @property
    def tangent(self) -> np.ndarray:
        return np.cross(self.vertical, self.boresight)

    def to_local(self, direction) -> np.ndarray:
        """Express global direction vector(s) ``(..., 3)`` in this frame's axes."""
        d = np.asarray(direction, dtype=float)
        return np.stack(
            [d @ self.boresight, d @ self.tangent, d @ self.vertical], axis=-1
        )

    def to_global(self, local) -> np.ndarray:
        v = np.asarray(local, dtype=float)
        return (
            v[..., 0:1] * self.boresight
            + v[..., 1:2] * self.tangent
            + v[..., 2:3] * self.vertical
        )


@dataclass(frozen=True)
class ArrayGeometry:
    """N identical elements on a circle of radius ``radius`` in the xy-plane.

    Element ``n`` sits at azimuth ``n*2*pi/N`` with its boresight pointing
    radially outward and its vertical axis along global +z.
    """

    element_count: int = DEFAULT_ELEMENTS
    radius: float = DEFAULT_DIAMETER / 2
    frequency: float = DEFAULT_FREQUENCY

    def __post_init__(self):
        if int(self.element_count) != self.element_count or self.element_count < 1:
            raise InvalidArgumentError(
                f"element_count must be a positive integer, got {self.element_count!r}"
            )
        object.__setattr__(self, "element_count", int(self.element_count))
        if not self.radius > 0 or not math.isfinite(self.radius):
            raise InvalidArgumentError(f"radius must be positive, got {self.radius!r}")
        if not self.frequency > 0 or not math.isfinite(self.frequency):
            raise InvalidArgumentError(f"frequency must be positive, got {self.frequency!r}")

    @classmethod
    def from_diameter(cls, element_count: int, diameter: float, frequency: float) -> "ArrayGeometry":
        return cls(element_count, diameter / 2.0, frequency)

    @property
    def wavenumber(self) -> float:
        return wavenumber(self.frequency)

    @property
    def wavelength(self) -> float:
        return wavelength(self.frequency)

    @property
    def kr(self) -> float:
        """Electrical radius k*R."""
        return self.wavenumber * self.radius

    @property
    def azimuths(self) -> np.ndarray:
        return element_azimuths(self.element_count)

    @property
    def positions(self) -> np.ndarray:
        """Element positions, shape ``(N, 3)``."""
        phi = self.azimuths
        return np.stack(
            [self.radius * np.cos(phi), self.radius * np.sin(phi), np.zeros_like(phi)],
            axis=-1,
        )

    def frames(self) -> list[Frame]:
        return [element_frame(self, n) for n in range(self.element_count)]

    def digest(self) -> str:
        """Short stable hash used to tag derived data."""
        text = f"{self.element_count}:{self.radius!r}:{self.frequency!r}"
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def element_frame(geometry: ArrayGeometry, n: int) -> Frame:
    if int(n) != n or not 0 <= n < geometry.element_count:
        raise InvalidArgumentError(
            f"element index {n!r} out of range for {geometry.element_count} elements"
        )
    phi = element_azimuths(geometry.element_count)[int(n)]
    c, s = math.cos(phi), math.sin(phi)
    return Frame(
        origin=np.array([geometry.radius * c, geometry.radius * s, 0.0]),
        boresight=np.array([c, s, 0.0]),
        vertical=np.array([0.0, 0.0, 1.0]),
    )


def rotate_z(vectors, angle: float) -> np.ndarray:
    """Rotate vector(s) ``(..., 3)`` counter-clockwise about +z."""
    v = np.asarray(vectors, dtype=float)
    c, s = math.cos(angle), math.sin(angle)
    out = np.empty_like(v)
    out[..., 0] = c * v[..., 0] - s * v[..., 1]
    out[..., 1] = s * v[..., 0] + c * v[..., 1]
    out[..., 2] = v[..., 2]
    return out


def default_geometry() -> ArrayGeometry:
    """Twelve elements, 19.38 mm diameter, 28 GHz."""
    return ArrayGeometry(DEFAULT_ELEMENTS, DEFAULT_DIAMETER / 2, DEFAULT_FREQUENCY)
