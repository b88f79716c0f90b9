"""Planar array geometry: element grids, feed placement, far-field utilities.

Conventions: right-handed frame, aperture in the z = 0 plane, broadside
along +z. Theta is measured from broadside, phi from the +x axis. All
lengths in meters, angles at this interface in degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact

CENTROID_TOL = 1e-12  # m


@dataclass(frozen=True)
class Position:
    """A point in 3-D space (meters)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"position components must be finite, got {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, a) -> "Position":
        x, y, z = np.asarray(a, dtype=float)
        return cls(float(x), float(y), float(z))


ORIGIN = Position(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ArrayGeometry:
    """A planar rectangular element grid in the z = 0 plane.

    element_positions is an (M, 3) array in row-major element order:
    element m = r * cols + c. `center` is the aperture centroid.
    """

    rows: int
    cols: int
    spacing: float
    element_positions: np.ndarray = field(repr=False)
    center: Position

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        pos = np.asarray(self.element_positions, dtype=float)
        if pos.shape != (self.rows * self.cols, 3):
            raise ValueError(
                f"expected {self.rows * self.cols} element positions, got shape {pos.shape}"
            )
        if np.any(pos[:, 2] != 0.0):
            raise ValueError("all elements must lie in the z = 0 plane")
        centroid = pos.mean(axis=0)
        if np.max(np.abs(centroid - self.center.as_array())) > CENTROID_TOL:
            raise ValueError("center must equal the centroid of the element positions")
        pos.flags.writeable = False
        object.__setattr__(self, "element_positions", pos)

    @property
    def num_elements(self) -> int:
        return self.rows * self.cols

    @property
    def side_length(self) -> float:
        """Aperture side (meters): max(rows, cols) element cells."""
        return max(self.rows, self.cols) * self.spacing

    @property
    def diagonal(self) -> float:
        """Largest element-to-element distance (meters)."""
        return self.spacing * math.hypot(self.rows - 1, self.cols - 1)


@dataclass(frozen=True)
class FeedSpec:
    """A point-source feed in front of the aperture."""

    position: Position
    f_over_D: float

    def __post_init__(self):
        if not self.position.z > 0:
            raise ValueError("feed must sit in front of the aperture (z > 0)")
        if not self.f_over_D > 0:
            raise ValueError("f_over_D must be positive")


def build_grid_aperture(
    rows: int, cols: int, spacing: float, center: Position = ORIGIN
) -> ArrayGeometry:
    """Build a centered rectangular grid, row-major element order.

    Element (r, c) sits at center + ((c - (cols-1)/2) * spacing,
    (r - (rows-1)/2) * spacing, 0).
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    if center.z != 0.0:
        raise ValueError("grid center must lie in the z = 0 plane")
    c_off = (np.arange(cols) - (cols - 1) / 2.0) * spacing
    r_off = (np.arange(rows) - (rows - 1) / 2.0) * spacing
    xx, yy = np.meshgrid(c_off, r_off)  # row-major: row index varies slowest
    positions = np.stack(
        [center.x + xx.ravel(), center.y + yy.ravel(), np.zeros(rows * cols)], axis=1
    )
    return ArrayGeometry(rows, cols, spacing, positions, center)


def feed_position(geometry: ArrayGeometry, f_over_D: float) -> FeedSpec:
    """Place the feed on the broadside axis at f_over_D times the aperture side."""
    if not f_over_D > 0:
        raise ValueError("f_over_D must be positive")
    pos = Position(geometry.center.x, geometry.center.y, f_over_D * geometry.side_length)
    return FeedSpec(position=pos, f_over_D=f_over_D)


def wavelength(frequency: float) -> float:
    """Free-space wavelength (m) for a frequency in Hz."""
    if not frequency > 0:
        raise ValueError(f"frequency must be positive, got {frequency}")
    return SPEED_OF_LIGHT / frequency


def fraunhofer_distance(geometry: ArrayGeometry, frequency: float) -> float:
    """Far-field boundary 2 * D^2 / lambda, with D the aperture diagonal."""
    lam = wavelength(frequency)
    return 2.0 * geometry.diagonal**2 / lam


def farfield_probe(
    geometry: ArrayGeometry, theta: float, phi: float, radius: float
) -> Position:
    """Point at `radius` from the aperture center along direction (theta, phi).

    theta in [0, 90] degrees from broadside, phi in [0, 360) degrees from +x.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if not 0.0 <= theta <= 90.0:
        raise ValueError(f"theta must be in [0, 90] degrees, got {theta}")
    if not 0.0 <= phi < 360.0:
        raise ValueError(f"phi must be in [0, 360) degrees, got {phi}")
    t = math.radians(theta)
    p = math.radians(phi)
    direction = np.array(
        [math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)]
    )
    return Position.from_array(geometry.center.as_array() + radius * direction)
