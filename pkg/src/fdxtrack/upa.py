"""
Half-wavelength uniform planar arrays and analog beams.

The terminal carries two independent UPAs (transmit and receive) whose
broadside points at zenith.  Steering directions are azimuth/elevation in the
terminal's local frame, with elevation measured *from broadside* (0 deg =
straight up).  The phase profile lives in direction-cosine space:

    u = sin(el) * cos(az),   v = sin(el) * sin(az)

and element (m, n) of a rows x cols array contributes exp(j*2*pi*d*(m*u + n*v)),
d in wavelengths.  Beams are phase-only with per-element magnitude 1/sqrt(N) so
total radiated power does not depend on the steering direction; an optional
phase quantizer models finite-resolution phase shifters.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def wrap_azimuth_deg(az):
    """Normalize azimuth(s) to [-180, 180)."""
    return (np.asarray(az, dtype=float) + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class UpaGeometry:
    """Rectangular planar array; rows*cols elements at fixed spacing."""

    rows: int
    cols: int
    element_spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"array needs positive dimensions, got {self.rows}x{self.cols}")
        if self.element_spacing_wavelengths <= 0:
            raise ValueError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class SteeringDirection:
    """Azimuth [-180, 180) and elevation-from-broadside [0, 90], degrees."""

    az_deg: float
    el_deg: float

    def __post_init__(self):
        if not 0.0 <= self.el_deg <= 90.0:
            raise ValueError(f"elevation from broadside {self.el_deg} outside [0, 90] deg")
        object.__setattr__(self, "az_deg", float(wrap_azimuth_deg(self.az_deg)))


@dataclass(frozen=True)
class QuantizerSpec:
    """Phase-shifter resolution; phase_bits = 0 means ideal (no quantization)."""

    phase_bits: int = 0

    def __post_init__(self):
        if self.phase_bits < 0:
            raise ValueError("phase_bits must be >= 0")

    @property
    def levels(self) -> int:
        return 1 << self.phase_bits


@dataclass(frozen=True)
class BeamWeights:
    """Analog beam vector; every entry has magnitude 1/sqrt(N)."""

    weights: np.ndarray
    kind: str  # "transmit" | "receive"


def _direction_cosines(az_deg, el_deg):
    az = np.radians(np.asarray(az_deg, dtype=float))
    el = np.radians(np.asarray(el_deg, dtype=float))
    s = np.sin(el)
    return s * np.cos(az), s * np.sin(az)


def steering_phases(geom: UpaGeometry, az_deg, el_deg) -> np.ndarray:
    """Element phases (radians) for one or more directions.

    Broadcasts over the direction arguments; output shape is
    ``(*np.shape(az_deg), rows*cols)`` with elements flattened row-major.
    """
    u, v = _direction_cosines(az_deg, el_deg)
    m = np.arange(geom.rows)[:, None]
    n = np.arange(geom.cols)[None, :]
    d = geom.element_spacing_wavelengths
    ph = 2.0 * np.pi * d * (m * u[..., None, None] + n * v[..., None, None])
    return ph.reshape(*np.shape(az_deg), geom.n_elements)


def array_response(geom: UpaGeometry, direction: SteeringDirection) -> np.ndarray:
    """Unit-modulus array response vector a(az, el) of length rows*cols."""
    return np.exp(1j * steering_phases(geom, direction.az_deg, direction.el_deg))


def steering_matrix(geom: UpaGeometry, az_deg, el_deg) -> np.ndarray:
    """Stacked array responses, shape (n_dirs, N)."""
    return np.exp(1j * steering_phases(geom, np.asarray(az_deg, float), np.asarray(el_deg, float)))


def quantize_phase(phases: np.ndarray, quant: QuantizerSpec) -> np.ndarray:
    """Round phases to the nearest point of the 2^bits uniform lattice on [0, 2pi)."""
    if quant.phase_bits == 0:
        return phases
    step = 2.0 * np.pi / quant.levels
    return np.round(phases / step) * step


def matched_filter_beam(
    geom: UpaGeometry,
    direction: SteeringDirection,
    quant: QuantizerSpec = QuantizerSpec(),
    kind: str = "transmit",
) -> BeamWeights:
    """Matched-filter beam: phase profile of a(dir), power-normalized.

    With an ideal quantizer the beam achieves |w* a(dir)|^2 = N exactly; with
    phase_bits > 0 each element phase is snapped to the quantizer lattice
    first, costing a small gain loss at the steered direction.
    """
    ph = steering_phases(geom, direction.az_deg, direction.el_deg)
    w = np.exp(1j * quantize_phase(ph, quant)) / np.sqrt(geom.n_elements)
    return BeamWeights(weights=w, kind=kind)


def beam_matrix(geom: UpaGeometry, az_deg, el_deg, quant: QuantizerSpec = QuantizerSpec()) -> np.ndarray:
    """Matched-filter beams for many directions at once, shape (n_dirs, N)."""
    ph = steering_phases(geom, np.asarray(az_deg, float), np.asarray(el_deg, float))
    return np.exp(1j * quantize_phase(ph, quant)) / np.sqrt(geom.n_elements)


def beam_coupling(w: BeamWeights, x: np.ndarray) -> complex:
    """Conjugate inner product w* x — the coupling used by every SNR/INR term."""
    x = np.asarray(x)
    if w.weights.shape != x.shape:
        raise ValueError(f"dimension mismatch: beam {w.weights.shape} vs vector {x.shape}")
    return complex(np.vdot(w.weights, x))
