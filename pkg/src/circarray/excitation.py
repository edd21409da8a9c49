"""Per-element weight vectors: phase modes, OAM modes and cast presets."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import InvalidArgumentError
from .geometry import element_azimuths


@dataclass(frozen=True, eq=False)
class ExcitationVector:
    """One complex current weight per element."""

    weights: np.ndarray
    description: str = ""

    def __post_init__(self):
        w = np.array(self.weights, dtype=complex).reshape(-1)
        if w.size == 0:
            raise InvalidArgumentError("excitation needs at least one weight")
        if not np.all(np.isfinite(w)):
            raise InvalidArgumentError("excitation weights must be finite")
        if not np.any(w != 0):
            raise InvalidArgumentError("excitation weights are all zero")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size

    def __getitem__(self, i):
        return self.weights[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExcitationVector):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.weights) ** 2))

    def to_pairs(self) -> list[list[float]]:
        return [[float(z.real), float(z.imag)] for z in self.weights]

    def to_json(self) -> str:
        return json.dumps(self.to_pairs())

    @classmethod
    def from_pairs(cls, pairs, description: str = "") -> "ExcitationVector":
        try:
            w = [complex(float(re), float(im)) for re, im in pairs]
        except (TypeError, ValueError) as exc:
            raise InvalidArgumentError(f"weights must be [real, imag] pairs: {exc}") from None
        return cls(np.array(w), description)

    @classmethod
    def from_json(cls, text: str) -> "ExcitationVector":
        return cls.from_pairs(json.loads(text))


class Normalization(str, enum.Enum):
    NONE = "none"
    UNIT_TOTAL_POWER = "unit-total-power"
    UNIT_PEAK = "unit-peak"


def mode_range(n_elements: int) -> range:
    """Non-aliased mode indices for N elements.

    For even N this is ``-(N/2 - 1) .. N/2``; in general one complete residue
    system modulo N centred on zero.
    """
    n = len(element_azimuths(n_elements))
    return range(-((n + 1) // 2 - 1), n // 2 + 1)


def _check_mode(n_elements: int, m: int, allow_alias: bool) -> int:
    if int(m) != m:
        raise InvalidArgumentError(f"mode index must be an integer, got {m!r}")
    m = int(m)
    if not allow_alias and m not in mode_range(n_elements):
        r = mode_range(n_elements)
        raise InvalidArgumentError(
            f"mode {m} outside [{r.start}, {r.stop - 1}] for N={n_elements}; "
            "pass allow_alias=True to request an aliased mode"
        )
    return m


def mode_weights(n_elements: int, m: int, steering: float = 0.0, *,
                 allow_alias: bool = False) -> ExcitationVector:
    """Weights ``exp(j*m*(phi_n + steering))`` exciting azimuthal mode ``m``."""
    m = _check_mode(n_elements, m, allow_alias)
    phi = element_azimuths(n_elements)
    w = np.exp(1j * m * (phi + steering))
    return ExcitationVector(w, f"mode m={m}, psi={steering:.12g}")


def oam_weights(n_elements: int, ell: int) -> ExcitationVector:
    """OAM weights ``exp(2j*(i-1)*ell*pi/N)`` for elements ``i = 1..N``.

    Any integer ``ell`` is accepted; ``ell`` and ``ell + N`` give identical
    weights.
    """
    if int(ell) != ell:
        raise InvalidArgumentError(f"OAM mode must be an integer, got {ell!r}")
    ell = int(ell)
    phi = element_azimuths(n_elements)
    return ExcitationVector(np.exp(1j * ell * phi), f"oam l={ell}")


@dataclass(frozen=True)
class ModeMixSpec:
    """Set of phase modes summed into one excitation.

    ``coefficients`` optionally gives a complex amplitude per mode; modes not
    listed there get amplitude 1.
    """

    modes: tuple[int, ...]
    steering: float = 0.0
    normalization: Normalization = Normalization.UNIT_TOTAL_POWER
    coefficients: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        modes = tuple(sorted({int(m) for m in self.modes}))
        if not modes:
            raise InvalidArgumentError("mode set is empty")
        if any(int(m) != m for m in self.modes):
            raise InvalidArgumentError(f"mode indices must be integers, got {self.modes!r}")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        extra = set(self.coefficients) - set(modes)
        if extra:
            raise InvalidArgumentError(f"coefficients given for modes not in the set: {sorted(extra)}")

    def validate(self, n_elements: int, allow_alias: bool = False) -> None:
        for m in self.modes:
            _check_mode(n_elements, m, allow_alias)


def normalize(weights: np.ndarray, normalization: Normalization) -> np.ndarray:
    normalization = Normalization(normalization)
    if normalization is Normalization.NONE:
        return weights
    if normalization is Normalization.UNIT_TOTAL_POWER:
        scale = math.sqrt(float(np.sum(np.abs(weights) ** 2)))
    else:
        scale = float(np.max(np.abs(weights)))
    if scale == 0:
        raise InvalidArgumentError("mode mixture cancels to an all-zero excitation")
    return weights / scale


def mix_modes(n_elements: int, spec: ModeMixSpec, *, allow_alias: bool = False) -> ExcitationVector:
    """Sum of ``mode_weights`` over ``spec.modes``, then normalized."""
    spec.validate(n_elements, allow_alias)
    w = np.zeros(len(element_azimuths(n_elements)), dtype=complex)
    for m in spec.modes:
        term = mode_weights(n_elements, m, spec.steering, allow_alias=allow_alias).weights
        c = spec.coefficients.get(m)
        w = w + (term if c is None else complex(c) * term)
    w = normalize(w, spec.normalization)
    label = ",".join(str(m) for m in spec.modes)
    return ExcitationVector(w, f"modes {{{label}}}, psi={spec.steering:.12g}")


def _pm(*ms: int) -> tuple[int, ...]:
    return tuple(sorted({s * m for m in ms for s in (1, -1)}))


CAST_PRESETS: dict[str, tuple[int, ...]] = {
    "broadcast": (0,),
    "unicast-A": _pm(0, 1, 2, 3, 4, 5),
    "unicast-B": _pm(0, 1, 2, 3),
    "multicast-A": _pm(1, 2, 3, 4, 5),
    "multicast-B": _pm(3, 4, 5),
    "multicast-C": _pm(4, 5),
}


def cast_preset(name: str) -> ModeMixSpec:
    try:
        modes = CAST_PRESETS[name]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown preset {name!r}; expected one of {', '.join(CAST_PRESETS)}"
        ) from None
    return ModeMixSpec(modes, 0.0, Normalization.UNIT_TOTAL_POWER)


def preset_weights(n_elements: int, name: str, steering: float = 0.0,
                   normalization: Optional[Normalization] = None) -> ExcitationVector:
    spec = cast_preset(name)
    spec = ModeMixSpec(spec.modes, steering, normalization or spec.normalization)
    ex = mix_modes(n_elements, spec)
    return ExcitationVector(ex.weights, f"{name}: {ex.description}")


def inner_product(a: Iterable[complex], b: Iterable[complex]) -> complex:
    """Hermitian inner product ``sum(conj(a) * b)``."""
    a = np.asarray(getattr(a, "weights", a), dtype=complex)
    b = np.asarray(getattr(b, "weights", b), dtype=complex)
    return complex(np.vdot(a, b))
