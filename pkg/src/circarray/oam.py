"""OAM content of radiated fields: ring sampling, azimuthal spectra, winding."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from ._io import atomic_write, fmt
from .element import ElementPattern
from .errors import InvalidArgumentError, SingularRingError
from .excitation import oam_weights
from .farfield import FarFieldPattern, evaluate_field, interpolate_field
from .geometry import ArrayGeometry

COMPONENTS = ("theta", "phi", "total")

FieldFunction = Callable[[np.ndarray, np.ndarray], tuple]


def _select(component: str, e_theta, e_phi) -> np.ndarray:
    # "total" is the plain sum of the two spherical components; it keeps the
    # azimuthal phase law of both and is zero only where they cancel exactly
    if component == "theta":
        return np.asarray(e_theta, dtype=complex)
    if component == "phi":
        return np.asarray(e_phi, dtype=complex)
    if component == "total":
        return np.asarray(e_theta, dtype=complex) + np.asarray(e_phi, dtype=complex)
    raise InvalidArgumentError(f"component must be one of {COMPONENTS}, got {component!r}")


@dataclass(frozen=True, eq=False)
class RingSamples:
    """Field samples at ``M`` equally spaced azimuths on a cone of constant theta."""

    theta: float
    samples: np.ndarray
    component: str = "total"

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex).reshape(-1)
        if s.size < 4:
            raise InvalidArgumentError("a ring needs at least 4 samples")
        object.__setattr__(self, "samples", s)

    @property
    def phi(self) -> np.ndarray:
        m = self.samples.size
        return np.arange(m) * (2 * math.pi / m)

    def conjugate(self) -> "RingSamples":
        return RingSamples(self.theta, np.conj(self.samples), self.component)


def ring_samples(source: Union[FarFieldPattern, FieldFunction], theta: float, m: int = 64,
                 component: str = "total") -> RingSamples:
    """Sample ``source`` at ``phi_q = q*2*pi/M`` on the cone ``theta``.

    ``source`` is either a gridded pattern (bilinearly interpolated) or a
    callable ``f(theta, phi) -> (E_theta, E_phi)`` evaluated directly.
    """
    if int(m) != m or m < 4:
        raise InvalidArgumentError(f"ring needs M >= 4 samples, got {m!r}")
    if not 0.0 < theta < math.pi:
        raise InvalidArgumentError("ring theta must lie strictly between the poles")
    phi = np.arange(int(m)) * (2 * math.pi / int(m))
    th = np.full_like(phi, theta)
    if isinstance(source, FarFieldPattern):
        e_t, e_p = interpolate_field(source, th, phi)
    else:
        e_t, e_p = source(th, phi)
    return RingSamples(float(theta), _select(component, e_t, e_p), component)


def array_ring(geometry: ArrayGeometry, element: ElementPattern, excitation, theta: float,
               m: int = 64, component: str = "total") -> RingSamples:
    """Ring sampled straight from the array sum, without a gridded pattern."""
    def field(t, p):
        return evaluate_field(geometry, element, excitation, t, p)
    return ring_samples(field, theta, m, component)


@dataclass(frozen=True, eq=False)
class OamSpectrum:
    """Azimuthal Fourier coefficients ``a_q`` of a ring, ``q`` ascending."""

    orders: np.ndarray
    coefficients: np.ndarray

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def coefficient(self, q: int) -> complex:
        idx = np.nonzero(self.orders == q)[0]
        if idx.size == 0:
            raise InvalidArgumentError(f"order {q} not resolved by this ring")
        return complex(self.coefficients[idx[0]])

    def purity(self, q: int) -> float:
        """Share of ring energy in order ``q``."""
        total = float(np.sum(self.power))
        if total == 0:
            return 0.0
        return abs(self.coefficient(q)) ** 2 / total

    def dominant(self) -> int:
        return int(self.orders[int(np.argmax(self.power))])


def azimuthal_spectrum(ring: RingSamples) -> OamSpectrum:
    """``a_q = (1/M) sum_p s_p exp(-j q phi_p)`` for ``q`` in ``[-M//2, (M-1)//2]``."""
    m = ring.samples.size
    a = np.fft.fft(ring.samples) / m
    q = np.fft.fftfreq(m, d=1.0 / m).round().astype(int)
    order = np.argsort(q, kind="stable")
    return OamSpectrum(q[order], a[order])


def winding_number(ring: RingSamples) -> int:
    """Net number of 2*pi phase turns around the ring (counter-clockwise positive)."""
    s = ring.samples
    mag = np.abs(s)
    if not mag.max() > 0 or mag.min() <= 1e-9 * mag.max():
        raise SingularRingError("ring passes through a field null; phase is undefined")
    steps = np.angle(np.roll(s, -1) / s)
    return int(round(float(np.sum(steps)) / (2 * math.pi)))


def crosstalk_matrix(geometry: ArrayGeometry, element: ElementPattern, modes: Sequence[int],
                     theta: float = math.radians(20.0), m: int = 64,
                     component: str = "total") -> np.ndarray:
    """Ring-energy fractions: row ``i`` excites ``modes[i]``, column ``j`` reads ``modes[j]``."""
    modes = [int(x) for x in modes]
    if not modes:
        raise InvalidArgumentError("mode list is empty")
    n = geometry.element_count
    if any(abs(x) > n / 2 for x in modes):
        raise InvalidArgumentError(f"OAM modes must satisfy |l| <= {n / 2:g} for N={n}")
    if m < 2 * max(abs(x) for x in modes) + 2:
        raise InvalidArgumentError("too few ring samples to resolve the requested modes")
    out = np.zeros((len(modes), len(modes)))
    for i, ell in enumerate(modes):
        ring = array_ring(geometry, element, oam_weights(n, ell), theta, m, component)
        spec = azimuthal_spectrum(ring)
        for j, col in enumerate(modes):
            out[i, j] = spec.purity(col)
    return out


def crosstalk_csv(modes: Sequence[int], matrix: np.ndarray) -> str:
    labels = [f"l={int(x)}" for x in modes]
    lines = ["," + ",".join(labels)]
    for lab, row in zip(labels, matrix):
        lines.append(lab + "," + ",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_crosstalk_csv(path, modes: Sequence[int], matrix: np.ndarray):
    return atomic_write(path, crosstalk_csv(modes, matrix))


def best_fit_phase(reference: RingSamples, measured: RingSamples) -> float:
    """Global phase offset (radians) that best aligns ``measured`` onto ``reference``.

    For a ring of winding ``l`` this offset is equivalent to rotating the
    phase spiral by ``-offset / l``. The offset is only reported; apply it
    explicitly with ``measured.samples * exp(1j * offset)``.
    """
    if reference.samples.size != measured.samples.size:
        raise InvalidArgumentError("rings must have the same number of samples")
    return float(np.angle(np.vdot(measured.samples, reference.samples)))
