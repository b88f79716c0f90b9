"""Command-line front end: design, pattern, codebook, and sweep subcommands.

Scenario configs are JSON; synthesized configurations and codebooks are
JSON; pattern and sweep traces are CSV for external plotting. Angles are
degrees at every external interface. Exit codes: 0 success, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import gain_bandwidth, normalize_db, pattern_metrics
from .beamformer import (
    CapacityExceededError,
    PgdParams,
    PhaseSet,
    RISConfiguration,
    build_codebook,
    configuration_gain,
    conjugate_weights,
    pgd_discretize,
    quantize_nearest,
)
from .geometry import ArrayGeometry, build_grid_aperture, feed_position, fraunhofer_distance, wavelength
from .steering import cascaded_vector, pattern_cut, _cut_probe

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

DEFAULT_CENTER_FREQUENCY_GHZ = 102.0

PATTERN_CSV_HEADER = "theta_deg,gain_linear,gain_db"
SWEEP_CSV_HEADER = "freq_ghz,peak_gain_db"

BIT_ORDER_NOTE = "row-major: element m = r * cols + c; 0 -> 0 rad, 1 -> pi rad"


class ConfigError(Exception):
    """Unreadable, malformed, or inconsistent configuration input."""


_SCENARIO_KEYS = {
    "rows",
    "cols",
    "spacing_mm",
    "center_frequency_ghz",
    "f_over_D",
    "cut_phi_deg",
    "theta_grid",
    "probe_radius_factor",
    "pgd",
}

_PGD_KEYS = {
    "n_iter",
    "step_size",
    "penalty_initial",
    "penalty_growth",
    "seed",
    "n_rotations",
    "n_starts",
}


@dataclass
class ScenarioConfig:
    """Scenario description; defaults reproduce the 31x31, f/D = 0.5, 102 GHz setup."""

    rows: int = 31
    cols: int = 31
    spacing_mm: float | None = None  # None -> half a wavelength at the center frequency
    center_frequency_ghz: float = DEFAULT_CENTER_FREQUENCY_GHZ
    f_over_D: float = 0.5
    cut_phi_deg: float = 0.0
    theta_grid: tuple[float, float, float] = (-90.0, 90.0, 0.1)
    probe_radius_factor: float = 100.0
    pgd: PgdParams | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("scenario config must be a JSON object")
        unknown = set(raw) - _SCENARIO_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        if "theta_grid" in kwargs:
            grid = kwargs["theta_grid"]
            if not (isinstance(grid, (list, tuple)) and len(grid) == 3):
                raise ConfigError("theta_grid must be [min_deg, max_deg, step_deg]")
            kwargs["theta_grid"] = tuple(float(v) for v in grid)
        if "pgd" in kwargs and kwargs["pgd"] is not None:
            pgd_raw = kwargs["pgd"]
            if not isinstance(pgd_raw, dict):
                raise ConfigError("pgd must be a JSON object")
            unknown = set(pgd_raw) - _PGD_KEYS
            if unknown:
                raise ConfigError(f"unknown pgd keys: {sorted(unknown)}")
            try:
                kwargs["pgd"] = PgdParams(**pgd_raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid pgd parameters: {exc}") from exc
        try:
            cfg = cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"invalid config: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str) -> "ScenarioConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
        return cls.from_dict(raw)

    def validate(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("rows and cols must be >= 1")
        if self.spacing_mm is not None and not self.spacing_mm > 0:
            raise ConfigError("spacing_mm must be positive")
        if not self.center_frequency_ghz > 0:
            raise ConfigError("center_frequency_ghz must be positive")
        if not self.f_over_D > 0:
            raise ConfigError("f_over_D must be positive")
        lo, hi, step = self.theta_grid
        if not (lo < hi and step > 0):
            raise ConfigError("theta_grid must satisfy min < max and step > 0")
        if not self.probe_radius_factor > 0:
            raise ConfigError("probe_radius_factor must be positive")

    @property
    def frequency_hz(self) -> float:
        return self.center_frequency_ghz * 1e9

    @property
    def spacing_m(self) -> float:
        if self.spacing_mm is not None:
            return self.spacing_mm * 1e-3
        return wavelength(self.frequency_hz) / 2.0

    def geometry(self) -> ArrayGeometry:
        return build_grid_aperture(self.rows, self.cols, self.spacing_m)

    def thetas(self) -> np.ndarray:
        lo, hi, step = self.theta_grid
        n = int(round((hi - lo) / step)) + 1
        return np.linspace(lo, hi, n)

    def probe_radius(self, geometry: ArrayGeometry, frequency: float | None = None) -> float:
        f = self.frequency_hz if frequency is None else frequency
        d_f = fraunhofer_distance(geometry, f)
        return self.probe_radius_factor * d_f if d_f > 0 else 100.0 * wavelength(f)


def _fmt(value: float) -> str:
    """Deterministic shortest decimal representation."""
    return repr(float(value))


def _metrics_dict(metrics, target_gain: float) -> dict:
    return {
        "peak_theta_deg": metrics.peak_theta,
        "pointing_error_deg": metrics.pointing_error,
        "peak_gain_linear": metrics.peak_gain_linear,
        "sll_db": None if math.isinf(metrics.sll_db) else metrics.sll_db,
        "beamwidth_3db_deg": metrics.beamwidth_3db,
        "target_gain_linear": target_gain,
    }


def _print_metrics(metrics, target_gain: float):
    for key, value in _metrics_dict(metrics, target_gain).items():
        print(f"{key}: {'n/a' if value is None else _fmt(value)}")


def _write_json(path: str, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_configuration(path: str, cfg: ScenarioConfig) -> tuple[RISConfiguration, dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    for key in ("rows", "cols", "phase_set_rad", "states"):
        if key not in raw:
            raise ConfigError(f"configuration file missing {key!r}")
    states = raw["states"]
    if len(states) != cfg.rows * cfg.cols:
        raise ConfigError(
            f"configuration has {len(states)} states but the scenario needs "
            f"{cfg.rows * cfg.cols}"
        )
    try:
        config = RISConfiguration(
            states=np.asarray(states, dtype=np.int64),
            phase_set=PhaseSet(np.asarray(raw["phase_set_rad"], dtype=float)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return config, raw.get("meta", {})


def _target_from_meta(meta: dict) -> tuple[float, float]:
    try:
        return float(meta["target_theta_deg"]), float(meta["target_phi_deg"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("configuration meta lacks target_theta_deg/target_phi_deg") from exc


def cmd_design(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    if not -90.0 <= args.theta <= 90.0:
        raise ConfigError("target theta must be in [-90, 90] degrees")
    phi = cfg.cut_phi_deg if args.phi is None else args.phi
    geometry = cfg.geometry()
    feed = feed_position(geometry, cfg.f_over_D)
    lam = wavelength(cfg.frequency_hz)
    radius = cfg.probe_radius(geometry)
    p_target = _cut_probe(geometry, args.theta, phi, radius)
    b = cascaded_vector(geometry, p_target, feed.position, lam)
    phase_set = PhaseSet.one_bit()

    params = cfg.pgd or PgdParams()
    if args.seed is not None:
        params = PgdParams(
            n_iter=params.n_iter,
            step_size=params.step_size,
            penalty_initial=params.penalty_initial,
            penalty_growth=params.penalty_growth,
            seed=args.seed,
            n_rotations=params.n_rotations,
            n_starts=params.n_starts,
        )
    if args.method == "pgd":
        config = pgd_discretize(geometry, feed.position, p_target, phase_set, params, lam)
    else:
        config = quantize_nearest(conjugate_weights(b), phase_set)

    thetas = cfg.thetas()
    pattern = pattern_cut(
        geometry, config, feed.position, phi,
        (float(thetas[0]), float(thetas[-1])), len(thetas), radius, lam,
    )
    metrics = pattern_metrics(normalize_db(pattern), args.theta)
    target_gain = configuration_gain(config, b)

    payload = {
        "rows": cfg.rows,
        "cols": cfg.cols,
        "frequency_ghz": cfg.center_frequency_ghz,
        "phase_set_rad": [float(v) for v in phase_set.levels],
        "states": [int(s) for s in config.states],
        "meta": {
            "bit_order": BIT_ORDER_NOTE,
            "spacing_mm": cfg.spacing_m * 1e3,
            "f_over_D": cfg.f_over_D,
            "target_theta_deg": args.theta,
            "target_phi_deg": phi,
            "method": args.method,
            "seed": params.seed,
            "metrics": _metrics_dict(metrics, target_gain),
        },
    }
    _write_json(args.out, payload)
    _print_metrics(metrics, target_gain)
    return EXIT_OK


def cmd_pattern(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    config, meta = _load_configuration(args.states, cfg)
    geometry = cfg.geometry()
    feed = feed_position(geometry, cfg.f_over_D)
    lam = wavelength(cfg.frequency_hz)
    radius = cfg.probe_radius(geometry)

    weights = config
    if args.continuous:
        th, ph = _target_from_meta(meta)
        p_target = _cut_probe(geometry, th, ph, radius)
        weights = conjugate_weights(cascaded_vector(geometry, p_target, feed.position, lam))

    thetas = cfg.thetas()
    pattern = normalize_db(
        pattern_cut(
            geometry, weights, feed.position, cfg.cut_phi_deg,
            (float(thetas[0]), float(thetas[-1])), len(thetas), radius, lam,
        )
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(PATTERN_CSV_HEADER + "\n")
        for th, g, db in zip(pattern.theta_deg, np.abs(pattern.gain), pattern.gain_db):
            fh.write(f"{_fmt(th)},{_fmt(g)},{_fmt(db)}\n")
    return EXIT_OK


def cmd_codebook(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    if len(set(args.targets)) != len(args.targets):
        raise ConfigError("duplicate targets")
    geometry = cfg.geometry()
    feed = feed_position(geometry, cfg.f_over_D)
    params = cfg.pgd or PgdParams()
    if args.seed is not None:
        params = PgdParams(
            n_iter=params.n_iter,
            step_size=params.step_size,
            penalty_initial=params.penalty_initial,
            penalty_growth=params.penalty_growth,
            seed=args.seed,
            n_rotations=params.n_rotations,
            n_starts=params.n_starts,
        )
    try:
        book = build_codebook(
            geometry,
            feed,
            [(th, cfg.cut_phi_deg) for th in args.targets],
            args.method,
            cfg.frequency_hz,
            params=params,
            probe_radius_factor=cfg.probe_radius_factor,
            theta_samples=len(cfg.thetas()),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    payload = {
        "frequency_ghz": cfg.center_frequency_ghz,
        "rows": cfg.rows,
        "cols": cfg.cols,
        "geometry_fingerprint": book.geometry_fingerprint,
        "method": args.method,
        "phase_set_rad": [float(v) for v in book.entries[0].configuration.phase_set.levels],
        "bit_order": BIT_ORDER_NOTE,
        "entries": [
            {
                "target_theta_deg": e.target_theta,
                "target_phi_deg": e.target_phi,
                "bits": [int(s) for s in e.configuration.states],
                "metrics": _metrics_dict(e.metrics, e.target_gain),
            }
            for e in book.entries
        ],
    }
    _write_json(args.out, payload)
    print(f"codebook with {len(book.entries)} entries written to {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    config, meta = _load_configuration(args.states, cfg)
    if args.n_freqs < 2:
        raise ConfigError("n_freqs must be >= 2 to bracket a band")
    if not 0 < args.f_min < args.f_max:
        raise ConfigError("need 0 < f_min < f_max")
    geometry = cfg.geometry()
    feed = feed_position(geometry, cfg.f_over_D)
    target = _target_from_meta(meta)
    report = gain_bandwidth(
        geometry,
        config,
        feed,
        target,
        (args.f_min * 1e9, args.f_max * 1e9),
        args.n_freqs,
        center_frequency=cfg.frequency_hz,
        probe_radius_factor=cfg.probe_radius_factor,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(SWEEP_CSV_HEADER + "\n")
        for f, db in zip(report.frequencies, report.peak_gain_db):
            fh.write(f"{_fmt(f / 1e9)},{_fmt(db)}\n")
    if report.clipped_low or report.clipped_high:
        edges = [e for e, c in (("low", report.clipped_low), ("high", report.clipped_high)) if c]
        print(f"warning: 3-dB band clipped at the sweep {' and '.join(edges)} edge", file=sys.stderr)
    print(
        f"f_low_ghz={_fmt(report.f_low / 1e9)} f_high_ghz={_fmt(report.f_high / 1e9)} "
        f"fractional_bandwidth={_fmt(report.fractional_bandwidth)}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risbeam",
        description="Synthesize and evaluate 1-bit reflecting-surface beam configurations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="scenario config JSON")
    common.add_argument("--out", required=True, help="output file path")
    common.add_argument("--seed", type=int, default=None, help="override the optimizer seed")

    p_design = sub.add_parser("design", parents=[common], help="synthesize one configuration")
    p_design.add_argument("--theta", type=float, required=True, help="target theta in degrees")
    p_design.add_argument("--phi", type=float, default=None, help="target phi in degrees")
    p_design.add_argument("--method", choices=("nearest", "pgd"), default="pgd")
    p_design.set_defaults(func=cmd_design)

    p_pattern = sub.add_parser("pattern", parents=[common], help="export an angular cut as CSV")
    p_pattern.add_argument("--states", required=True, help="configuration JSON from `design`")
    p_pattern.add_argument(
        "--continuous", action="store_true",
        help="pattern of the unquantized conjugate beam toward the stored target",
    )
    p_pattern.set_defaults(func=cmd_pattern)

    p_codebook = sub.add_parser("codebook", parents=[common], help="configurations for many targets")
    p_codebook.add_argument("--targets", type=float, nargs="+", required=True,
                            help="target thetas in degrees")
    p_codebook.add_argument("--method", choices=("nearest", "pgd"), default="pgd")
    p_codebook.set_defaults(func=cmd_codebook)

    p_sweep = sub.add_parser("sweep", parents=[common], help="gain-vs-frequency CSV and 3-dB band")
    p_sweep.add_argument("--states", required=True, help="configuration JSON from `design`")
    p_sweep.add_argument("--f-min", type=float, required=True, help="sweep start in GHz")
    p_sweep.add_argument("--f-max", type=float, required=True, help="sweep end in GHz")
    p_sweep.add_argument("--n-freqs", type=int, required=True, help="number of sweep points")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, CapacityExceededError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
