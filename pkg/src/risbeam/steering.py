"""Steering vectors and beam patterns for the cascaded TX-surface-RX path.

The per-element phase terms use the exact spherical-wave path difference,
so the same expressions hold in the near and far field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ArrayGeometry, Position, SPEED_OF_LIGHT, farfield_probe

UNIT_MODULUS_TOL = 1e-9


@dataclass(frozen=True)
class SteeringVector:
    """Unit-modulus per-element phase terms toward one point (or a TX-RX pair)."""

    entries: np.ndarray = field(repr=False)
    wavelength: float
    kind: str  # "focusing" | "cascaded"

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if np.any(np.abs(np.abs(e) - 1.0) > UNIT_MODULUS_TOL):
            raise ValueError("steering vector entries must have unit modulus")
        if self.kind not in ("focusing", "cascaded"):
            raise ValueError(f"unknown steering vector kind {self.kind!r}")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class BeamPattern:
    """Sampled angular cut: complex gain versus theta in one phi plane.

    gain_db and normalization_peak are populated by analysis.normalize_db.
    """

    cut_plane_phi: float
    theta_deg: np.ndarray = field(repr=False)
    gain: np.ndarray = field(repr=False)
    frequency: float
    gain_db: np.ndarray | None = field(default=None, repr=False)
    normalization_peak: float | None = None

    def __post_init__(self):
        th = np.asarray(self.theta_deg, dtype=float)
        g = np.asarray(self.gain, dtype=complex)
        if th.size < 2:
            raise ValueError("a pattern needs at least 2 samples")
        if th.shape != g.shape:
            raise ValueError("theta and gain arrays must have the same length")
        if np.any(np.diff(th) <= 0):
            raise ValueError("theta samples must be strictly increasing")
        th.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "theta_deg", th)
        object.__setattr__(self, "gain", g)
        if self.gain_db is not None:
            db = np.asarray(self.gain_db, dtype=float)
            db.flags.writeable = False
            object.__setattr__(self, "gain_db", db)

    def __len__(self) -> int:
        return len(self.theta_deg)


def _path_phase(positions: np.ndarray, center: np.ndarray, p: np.ndarray, lam: float):
    """exp(-j k (|p - p_m| - |p - center|)) for every element position."""
    d_m = np.linalg.norm(p - positions, axis=1)
    d_c = np.linalg.norm(p - center)
    if d_c == 0.0 or np.any(d_m == 0.0):
        raise ValueError("point coincides with an element or the aperture center")
    return np.exp(-1j * (2.0 * np.pi / lam) * (d_m - d_c))


def focusing_vector(geometry: ArrayGeometry, p: Position, wavelength: float) -> SteeringVector:
    """Beam-focusing vector toward p: exact spherical-wave path compensation."""
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")
    entries = _path_phase(
        geometry.element_positions, geometry.center.as_array(), p.as_array(), wavelength
    )
    return SteeringVector(entries=entries, wavelength=wavelength, kind="focusing")


def cascaded_vector(
    geometry: ArrayGeometry, p: Position, p_tx: Position, wavelength: float
) -> SteeringVector:
    """Element-wise product of the focusing vectors toward p and the TX."""
    a_p = focusing_vector(geometry, p, wavelength)
    a_tx = focusing_vector(geometry, p_tx, wavelength)
    return SteeringVector(
        entries=a_p.entries * a_tx.entries, wavelength=wavelength, kind="cascaded"
    )


def _weight_array(weights) -> np.ndarray:
    """Accept ContinuousWeights, RISConfiguration, or a plain complex array."""
    return np.asarray(getattr(weights, "weights", weights), dtype=complex)


def beam_gain(weights, b: SteeringVector) -> complex:
    """Scalar gain: the plain (unconjugated) inner product of weights with b."""
    w = _weight_array(weights)
    if w.shape != b.entries.shape:
        raise ValueError(f"weight length {w.shape} does not match vector {b.entries.shape}")
    return complex(np.dot(w, b.entries))


def _cut_probe(geometry: ArrayGeometry, theta: float, phi: float, radius: float) -> Position:
    """farfield_probe extended to signed theta: negative theta maps to phi + 180."""
    if theta < 0:
        return farfield_probe(geometry, -theta, (phi + 180.0) % 360.0, radius)
    return farfield_probe(geometry, theta, phi % 360.0, radius)


def pattern_cut(
    geometry: ArrayGeometry,
    weights,
    p_tx: Position,
    cut_plane_phi: float,
    theta_range: tuple[float, float],
    n_samples: int,
    radius: float,
    wavelength: float,
) -> BeamPattern:
    """Sample the cascaded beam gain over a uniform theta grid in one phi plane.

    The probe sits at `radius` from the center; choose radius well beyond the
    Fraunhofer distance for far-field cuts. Negative theta means the opposite
    half-plane (phi + 180 degrees).
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if not radius > 0:
        raise ValueError("radius must be positive")
    lo, hi = theta_range
    if not lo < hi:
        raise ValueError("theta_range must be increasing")
    thetas = np.linspace(lo, hi, n_samples)
    w = _weight_array(weights)
    if w.shape[0] != geometry.num_elements:
        raise ValueError("weight length does not match geometry")

    # Sweep probes evaluated in one shot; per-sample this equals
    # beam_gain(weights, cascaded_vector(geometry, probe_k, p_tx, wavelength)).
    probes = np.stack(
        [_cut_probe(geometry, t, cut_plane_phi, radius).as_array() for t in thetas]
    )
    center = geometry.center.as_array()
    k = 2.0 * np.pi / wavelength
    d = np.linalg.norm(probes[:, None, :] - geometry.element_positions[None, :, :], axis=2)
    d_c = np.linalg.norm(probes - center, axis=1)
    rx_phases = np.exp(-1j * k * (d - d_c[:, None]))
    a_tx = focusing_vector(geometry, p_tx, wavelength)
    gains = rx_phases @ (w * a_tx.entries)
    return BeamPattern(
        cut_plane_phi=cut_plane_phi,
        theta_deg=thetas,
        gain=gains,
        frequency=SPEED_OF_LIGHT / wavelength,
    )
