"""Weight synthesis for discrete-phase reflecting surfaces.

The continuous optimum is the conjugate of the cascaded steering vector.
Discretization onto a finite phase set is done either by per-element
nearest-level rounding or by penalized gradient ascent: the target-gain
objective is relaxed over unconstrained phases, a growing penalty pulls
each phase toward the discrete set, and the final iterate is projected
onto it. Because the gain objective is invariant under a global phase
rotation while the projection is not, the ascent is restarted from a
deterministic grid of rotated initializations and the best projected
candidate wins; a nearest-rounding fallback makes the result never worse
than the baseline.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import PatternMetrics, normalize_db, pattern_metrics
from .geometry import ArrayGeometry, FeedSpec, Position, fraunhofer_distance, wavelength as _wavelength
from .steering import SteeringVector, beam_gain, cascaded_vector, pattern_cut, _cut_probe

TWO_PI = 2.0 * math.pi


class CapacityExceededError(Exception):
    """The exhaustive search space is larger than the allowed limit."""


@dataclass(frozen=True)
class ContinuousWeights:
    """Unit-amplitude weights stored as phases wrapped to [0, 2*pi)."""

    phases: np.ndarray = field(repr=False)

    def __post_init__(self):
        ph = np.mod(np.asarray(self.phases, dtype=float), TWO_PI)
        ph.flags.writeable = False
        object.__setattr__(self, "phases", ph)

    @property
    def weights(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    def __len__(self) -> int:
        return len(self.phases)


@dataclass(frozen=True)
class PhaseSet:
    """Sorted distinct phase levels in [0, 2*pi)."""

    levels: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float)
        if lv.ndim != 1 or lv.size < 2:
            raise ValueError("a phase set needs at least 2 levels")
        if np.any(lv < 0.0) or np.any(lv >= TWO_PI):
            raise ValueError("levels must lie in [0, 2*pi)")
        if np.any(np.diff(lv) <= 0):
            raise ValueError("levels must be sorted and distinct")
        lv.flags.writeable = False
        object.__setattr__(self, "levels", lv)

    @classmethod
    def one_bit(cls) -> "PhaseSet":
        return cls(np.array([0.0, math.pi]))

    @classmethod
    def uniform(cls, n_levels: int) -> "PhaseSet":
        if n_levels < 2:
            raise ValueError("n_levels must be >= 2")
        return cls(TWO_PI * np.arange(n_levels) / n_levels)

    @property
    def n_levels(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class RISConfiguration:
    """Per-element indices into a phase set; a bit vector for the 1-bit set."""

    states: np.ndarray = field(repr=False)
    phase_set: PhaseSet

    def __post_init__(self):
        st = np.asarray(self.states, dtype=np.int64)
        if st.ndim != 1:
            raise ValueError("states must be a flat vector")
        if np.any(st < 0) or np.any(st >= self.phase_set.n_levels):
            raise ValueError("state indices out of range for the phase set")
        st.flags.writeable = False
        object.__setattr__(self, "states", st)

    @property
    def phases(self) -> np.ndarray:
        return self.phase_set.levels[self.states]

    @property
    def weights(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class PgdParams:
    """Knobs for the penalized-ascent discretizer.

    step_size of None means 0.5 / M. Rotated restarts cover the global
    phase gauge; n_starts > 1 adds seeded Gaussian jitter (sigma 0.3 rad)
    on top of each rotation.
    """

    n_iter: int = 500
    step_size: float | None = None
    penalty_initial: float = 0.01
    penalty_growth: float = 1.01
    seed: int = 0
    n_rotations: int = 16
    n_starts: int = 1

    def __post_init__(self):
        if self.n_iter < 1:
            raise ValueError("n_iter must be >= 1")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.penalty_initial < 0:
            raise ValueError("penalty_initial must be >= 0")
        if not self.penalty_growth > 0:
            raise ValueError("penalty_growth must be positive")
        if self.n_rotations < 1 or self.n_starts < 1:
            raise ValueError("n_rotations and n_starts must be >= 1")


@dataclass(frozen=True)
class CodebookEntry:
    target_theta: float
    target_phi: float
    configuration: RISConfiguration
    metrics: PatternMetrics
    target_gain: float


@dataclass(frozen=True)
class Codebook:
    entries: tuple[CodebookEntry, ...]
    geometry_fingerprint: str
    frequency: float
    feed: FeedSpec

    def __post_init__(self):
        targets = [(e.target_theta, e.target_phi) for e in self.entries]
        if len(set(targets)) != len(targets):
            raise ValueError("codebook target angles must be unique")


def _wrap_pm_pi(x: np.ndarray) -> np.ndarray:
    """Wrap angles to (-pi, pi]."""
    return -np.mod(-np.asarray(x) + np.pi, TWO_PI) + np.pi


def _nearest_states(phases: np.ndarray, levels: np.ndarray) -> np.ndarray:
    """Index of the circularly nearest level, ties toward the lower index."""
    dist = np.abs(_wrap_pm_pi(phases[..., None] - levels))
    return np.argmin(dist, axis=-1)


def conjugate_weights(b: SteeringVector) -> ContinuousWeights:
    """Continuous beamformer: each phase cancels its cascaded channel phase."""
    return ContinuousWeights(np.mod(-np.angle(b.entries), TWO_PI))


def quantize_nearest(weights: ContinuousWeights, phase_set: PhaseSet) -> RISConfiguration:
    """Round each phase to the circularly nearest level of the set."""
    states = _nearest_states(weights.phases, phase_set.levels)
    return RISConfiguration(states=states, phase_set=phase_set)


def configuration_gain(config_or_weights, b: SteeringVector) -> float:
    """|G| toward the point b was built for."""
    return abs(beam_gain(config_or_weights, b))


def pgd_discretize(
    geometry: ArrayGeometry,
    p_tx: Position,
    p_target: Position,
    phase_set: PhaseSet,
    params: PgdParams | None,
    wavelength: float,
) -> RISConfiguration:
    """Discretize the conjugate beamformer by penalized gradient ascent.

    Maximizes |sum_m exp(j phi_m) b_m|^2 - lambda(t) * sum_m d(phi_m, K)^2
    over unconstrained phases, with d the circular distance to the nearest
    level and lambda growing geometrically per iteration, then projects
    onto the set. Never returns a configuration with lower target gain
    than nearest-level rounding of the conjugate weights.
    """
    if params is None:
        params = PgdParams()
    b_vec = cascaded_vector(geometry, p_target, p_tx, wavelength)
    b = b_vec.entries
    levels = phase_set.levels
    m = geometry.num_elements
    step = params.step_size if params.step_size is not None else 0.5 / m

    phi0 = np.mod(-np.angle(b), TWO_PI)
    baseline = RISConfiguration(_nearest_states(phi0, levels), phase_set)
    baseline_gain = configuration_gain(baseline, b_vec)

    # One ascent trajectory per (jitter start, rotation); rotations span one
    # level period since rotating by it permutes the levels.
    period = TWO_PI / phase_set.n_levels
    rotations = period * np.arange(params.n_rotations) / params.n_rotations
    rng = np.random.default_rng(params.seed)
    inits = []
    for s in range(params.n_starts):
        jitter = rng.normal(0.0, 0.3, m) if s > 0 else np.zeros(m)
        for rot in rotations:
            inits.append(phi0 + rot + jitter)
    phi = np.stack(inits)

    penalty = params.penalty_initial
    for _ in range(params.n_iter):
        e = np.exp(1j * phi)
        s_tot = e @ b
        grad_gain = -2.0 * np.imag(np.conj(s_tot)[:, None] * e * b[None, :])
        residual = _wrap_pm_pi(phi - levels[_nearest_states(phi, levels)])
        phi = phi + step * (grad_gain - penalty * 2.0 * residual)
        penalty *= params.penalty_growth

    candidate_states = _nearest_states(np.mod(phi, TWO_PI), levels)
    gains = np.abs(np.exp(1j * levels[candidate_states]) @ b)
    best = int(np.argmax(gains))
    if gains[best] > baseline_gain:
        return RISConfiguration(candidate_states[best], phase_set)
    return baseline


def brute_force_oracle(
    geometry: ArrayGeometry,
    p_tx: Position,
    p_target: Position,
    phase_set: PhaseSet,
    wavelength: float,
    limit: int = 2**20,
) -> RISConfiguration:
    """Exhaustive search over all configurations, for small arrays.

    Returns a global maximizer of |G(p_target)|; among ties, the
    lexicographically smallest state vector.
    """
    m = geometry.num_elements
    n_levels = phase_set.n_levels
    total = n_levels**m
    if total > limit:
        raise CapacityExceededError(
            f"{n_levels}^{m} = {total} configurations exceed the limit {limit}"
        )
    b_vec = cascaded_vector(geometry, p_target, p_tx, wavelength)
    b = b_vec.entries
    unit = np.exp(1j * phase_set.levels)
    # Most-significant digit first: numeric order == lexicographic state order.
    place = n_levels ** np.arange(m - 1, -1, -1, dtype=np.int64)

    best_gain = -1.0
    best_states = None
    chunk = 1 << 14
    for start in range(0, total, chunk):
        ks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        states = (ks[:, None] // place[None, :]) % n_levels
        gains = np.abs(unit[states] @ b)
        i = int(np.argmax(gains))
        if gains[i] > best_gain:
            best_gain = float(gains[i])
            best_states = states[i]
    return RISConfiguration(states=best_states, phase_set=phase_set)


def geometry_fingerprint(geometry: ArrayGeometry) -> str:
    h = hashlib.sha256()
    h.update(np.int64([geometry.rows, geometry.cols]).tobytes())
    h.update(np.float64(geometry.spacing).tobytes())
    h.update(geometry.element_positions.tobytes())
    return h.hexdigest()[:16]


def build_codebook(
    geometry: ArrayGeometry,
    feed: FeedSpec,
    targets: list[tuple[float, float]],
    method: str,
    frequency: float,
    phase_set: PhaseSet | None = None,
    params: PgdParams | None = None,
    probe_radius_factor: float = 100.0,
    theta_samples: int = 1801,
) -> Codebook:
    """One discretized configuration plus pattern metrics per target angle."""
    if not targets:
        raise ValueError("targets must be non-empty")
    if len(set(targets)) != len(targets):
        raise ValueError("duplicate targets")
    if method not in ("nearest", "pgd"):
        raise ValueError(f"unknown method {method!r}")
    for th, _ in targets:
        if not -90.0 <= th <= 90.0:
            raise ValueError(f"target theta {th} outside [-90, 90] degrees")
    if phase_set is None:
        phase_set = PhaseSet.one_bit()

    lam = _wavelength(frequency)
    d_f = fraunhofer_distance(geometry, frequency)
    radius = probe_radius_factor * d_f if d_f > 0 else 100.0 * lam

    entries = []
    for th, ph in targets:
        p_target = _cut_probe(geometry, th, ph, radius)
        b = cascaded_vector(geometry, p_target, feed.position, lam)
        if method == "pgd":
            config = pgd_discretize(geometry, feed.position, p_target, phase_set, params, lam)
        else:
            config = quantize_nearest(conjugate_weights(b), phase_set)
        pattern = pattern_cut(
            geometry, config, feed.position, ph, (-90.0, 90.0), theta_samples, radius, lam
        )
        metrics = pattern_metrics(normalize_db(pattern), th)
        entries.append(
            CodebookEntry(
                target_theta=th,
                target_phi=ph,
                configuration=config,
                metrics=metrics,
                target_gain=configuration_gain(config, b),
            )
        )
    return Codebook(
        entries=tuple(entries),
        geometry_fingerprint=geometry_fingerprint(geometry),
        frequency=frequency,
        feed=feed,
    )
