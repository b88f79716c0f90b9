"""Pattern figures of merit: normalization, lobes, SLL, beamwidth, bandwidth."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ArrayGeometry, FeedSpec, fraunhofer_distance, wavelength
from .steering import BeamPattern, beam_gain, cascaded_vector, _cut_probe

DB_FLOOR = -400.0  # stands in for -inf when interpolating crossings


@dataclass(frozen=True)
class PatternMetrics:
    """Figures of merit of one normalized cut.

    sll_db is main-peak dB minus the strongest sidelobe dB (positive when
    sidelobes are suppressed); math.inf when no sidelobe exists.
    """

    peak_theta: float
    pointing_error: float
    peak_gain_linear: float
    sll_db: float
    beamwidth_3db: float


@dataclass(frozen=True)
class BandwidthReport:
    """Target-direction gain versus frequency and its 3-dB band."""

    center_frequency: float
    frequencies: np.ndarray = field(repr=False)
    peak_gain_db: np.ndarray = field(repr=False)
    peak_frequency: float
    f_low: float
    f_high: float
    fractional_bandwidth: float
    clipped_low: bool
    clipped_high: bool

    @property
    def peak_gain_db_by_frequency(self) -> list[tuple[float, float]]:
        return [(float(f), float(g)) for f, g in zip(self.frequencies, self.peak_gain_db)]


def normalize_db(pattern: BeamPattern) -> BeamPattern:
    """Attach a dB trace normalized so the strongest sample is exactly 0 dB."""
    mag = np.abs(pattern.gain)
    peak = float(mag.max())
    if peak == 0.0:
        raise ValueError("cannot normalize an all-zero pattern")
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / peak)
    return dataclasses.replace(pattern, gain_db=db, normalization_peak=peak)


def _require_normalized(pattern: BeamPattern) -> np.ndarray:
    if pattern.gain_db is None:
        raise ValueError("pattern must be normalized first (normalize_db)")
    return pattern.gain_db


def find_lobes(pattern: BeamPattern) -> list[tuple[float, float]]:
    """Strict local maxima of the dB trace, strongest first.

    A plateau higher than both neighbors counts once, at its center sample.
    Endpoints are never lobes.
    """
    db = _require_normalized(pattern)
    theta = pattern.theta_deg
    n = len(db)
    lobes = []
    start = 0
    while start < n:
        end = start
        while end + 1 < n and db[end + 1] == db[start]:
            end += 1
        if start > 0 and end < n - 1 and db[start - 1] < db[start] and db[end + 1] < db[end]:
            center = (start + end) // 2
            lobes.append((float(theta[center]), float(db[center])))
        start = end + 1
    lobes.sort(key=lambda tv: -tv[1])
    return lobes


def _interp_crossing(x0, y0, x1, y1, level) -> float:
    y0 = max(y0, DB_FLOOR)
    y1 = max(y1, DB_FLOOR)
    return float(x0 + (x1 - x0) * (level - y0) / (y1 - y0))


def _half_power_span(x: np.ndarray, db: np.ndarray, peak_idx: int):
    """Contiguous interval around the peak where db >= peak - 3 dB.

    Crossings are linearly interpolated in dB; an interval running into the
    grid edge is clipped there.
    """
    threshold = db[peak_idx] - 3.0
    left = peak_idx
    while left > 0 and db[left - 1] >= threshold:
        left -= 1
    right = peak_idx
    while right < len(db) - 1 and db[right + 1] >= threshold:
        right += 1
    clipped_low = left == 0
    clipped_high = right == len(db) - 1
    lo = x[0] if clipped_low else _interp_crossing(
        x[left - 1], db[left - 1], x[left], db[left], threshold
    )
    hi = x[-1] if clipped_high else _interp_crossing(
        x[right], db[right], x[right + 1], db[right + 1], threshold
    )
    return float(lo), float(hi), clipped_low, clipped_high


def pattern_metrics(pattern: BeamPattern, target_theta: float) -> PatternMetrics:
    """Extract pointing, SLL, and 3-dB beamwidth from a normalized cut.

    The main lobe is the global maximum; local maxima inside its 3-dB span
    are shoulders, not sidelobes. Without any sidelobe, sll_db is math.inf.
    """
    db = _require_normalized(pattern)
    peak_idx = int(np.argmax(db))
    peak_theta = float(pattern.theta_deg[peak_idx])
    lo, hi, _, _ = _half_power_span(pattern.theta_deg, db, peak_idx)
    sidelobes = [v for t, v in find_lobes(pattern) if t < lo or t > hi]
    sll = float(db[peak_idx] - sidelobes[0]) if sidelobes else math.inf
    return PatternMetrics(
        peak_theta=peak_theta,
        pointing_error=abs(peak_theta - target_theta),
        peak_gain_linear=float(np.abs(pattern.gain[peak_idx])),
        sll_db=sll,
        beamwidth_3db=hi - lo,
    )


def gain_bandwidth(
    geometry: ArrayGeometry,
    config,
    feed: FeedSpec,
    target: tuple[float, float],
    f_range: tuple[float, float],
    n_freqs: int,
    center_frequency: float = 102e9,
    probe_radius_factor: float = 100.0,
) -> BandwidthReport:
    """Sweep frequency with a fixed configuration and find the 3-dB gain band.

    The physical geometry and the configuration stay fixed; only the
    wavelength (and the far-field probe distance) track the frequency.
    Band edges hitting the sweep boundary are flagged as clipped.
    """
    f_lo, f_hi = f_range
    if not 0 < f_lo < f_hi:
        raise ValueError("f_range must be positive and increasing")
    if n_freqs < 2:
        raise ValueError("n_freqs must be >= 2 to bracket a band")
    theta, phi = target
    freqs = np.linspace(f_lo, f_hi, n_freqs)
    gains = np.empty(n_freqs)
    for i, f in enumerate(freqs):
        lam = wavelength(f)
        d_f = fraunhofer_distance(geometry, f)
        radius = probe_radius_factor * d_f if d_f > 0 else 100.0 * lam
        p = _cut_probe(geometry, theta, phi, radius)
        gains[i] = abs(beam_gain(config, cascaded_vector(geometry, p, feed.position, lam)))
    peak = gains.max()
    if peak == 0.0:
        raise ValueError("target gain is zero across the whole sweep")
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(gains / peak)
    peak_idx = int(np.argmax(db))
    f_low, f_high, clipped_low, clipped_high = _half_power_span(freqs, db, peak_idx)
    return BandwidthReport(
        center_frequency=center_frequency,
        frequencies=freqs,
        peak_gain_db=db,
        peak_frequency=float(freqs[peak_idx]),
        f_low=f_low,
        f_high=f_high,
        fractional_bandwidth=(f_high - f_low) / center_frequency,
        clipped_low=clipped_low,
        clipped_high=clipped_high,
    )
