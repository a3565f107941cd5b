"""Command-line front end: JSON config in, CSV records and a manifest out.

Exit codes: 0 on success, 2 for config problems (unreadable, malformed,
or invalid), 3 for runtime failures. The CSV column set is fixed; a
sibling ``<out>.manifest.json`` records the config hash, master seed and
package version so a result file can be tied back to its run.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import struct
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .channel import ElaaParams
from .detectors import ALGORITHMS, DAMPING_MODES, DetectorConfig
from .exceptions import ConfigError, ConfigParseError, ConfigValidationError
from .sim import LOW_CONFIDENCE_ERRORS, ChannelSpec, SerRecord, SweepSpec, awgn_bound, \
    ser_vs_esno, ser_vs_iteration, ser_vs_load

__all__ = ["RunConfig", "parse_config", "emit_csv", "apply_profile", "main"]

EXPERIMENTS = ("ser_vs_iteration", "ser_vs_load", "ser_vs_esno", "bounds_only")

CSV_HEADER = ("algorithm", "channel", "M", "N", "modulation", "esno_db",
              "iteration", "symbol_errors", "symbols_total", "ser", "wall_time_s")

# documented defaults: the canonical convergence experiment
DEFAULT_ALGORITHMS = ("jacobi", "jacobi_dd", "gs_dd", "ngs_dd", "anpid_gs")

FAST_PROFILE_M = 64
FAST_PROFILE_MAX_TRIALS = 500


@dataclass
class RunConfig:
    experiment: str
    sweep: SweepSpec
    output_path: str = "results.csv"
    profile: str = "full"
    workers: int = 1


def _require_keys(obj: dict, allowed: Sequence[str], context: str):
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigValidationError(
            f"validation-error: unknown key(s) {unknown} in {context}")


def _get(obj: dict, key: str, kind, default, context: str):
    if key not in obj:
        return default
    val = obj[key]
    if kind is float and isinstance(val, int):
        val = float(val)
    if kind is not None and not isinstance(val, kind):
        raise ConfigValidationError(
            f"validation-error: {context}.{key} has wrong type {type(val).__name__}")
    return val


def _parse_algorithm(entry, context: str) -> DetectorConfig:
    if isinstance(entry, str):
        entry = {"algorithm": entry}
    if not isinstance(entry, dict):
        raise ConfigValidationError(f"validation-error: bad algorithm entry in {context}")
    _require_keys(entry, ("algorithm", "iterations", "stage_a_iterations",
                          "damping_mode", "rho"), context)
    name = entry.get("algorithm")
    if name not in ALGORITHMS:
        raise ConfigValidationError(f"validation-error: unknown algorithm {name!r}")
    try:
        return DetectorConfig(
            algorithm=name,
            iterations=_get(entry, "iterations", int, 10, context),
            stage_a_iterations=_get(entry, "stage_a_iterations", int, 3, context),
            damping_mode=_get(entry, "damping_mode", str, "fixed", context),
            rho=_get(entry, "rho", (int, float), None, context),
        )
    except ValueError as exc:
        raise ConfigValidationError(f"validation-error: {exc}") from exc


def _parse_channel(obj: dict) -> ChannelSpec:
    _require_keys(obj, ("model", "sigma_h", "alpha", "beta", "sigma_s",
                        "shadow_corr_length", "carrier_frequency",
                        "antenna_spacing", "perpendicular_distance",
                        "user_positions"), "channel")
    model = _get(obj, "model", str, "wssus", "channel")
    if model not in ("wssus", "elaa"):
        raise ConfigValidationError(f"validation-error: unknown channel model {model!r}")
    try:
        elaa = ElaaParams(
            alpha=_get(obj, "alpha", float, 0.020, "channel"),
            beta=_get(obj, "beta", float, 1.765, "channel"),
            sigma_s=_get(obj, "sigma_s", float, 6.053, "channel"),
            shadow_corr_length=_get(obj, "shadow_corr_length", float, 1.0, "channel"),
        )
        return ChannelSpec(
            model=model,
            sigma_h=_get(obj, "sigma_h", float, 1.0, "channel"),
            elaa=elaa,
            carrier_frequency=_get(obj, "carrier_frequency", float, 3.5e9, "channel"),
            antenna_spacing=_get(obj, "antenna_spacing", float, None, "channel"),
            perpendicular_distance=_get(obj, "perpendicular_distance", float, 15.0,
                                        "channel"),
            user_positions=_get(obj, "user_positions", list, None, "channel"),
        )
    except ValueError as exc:
        raise ConfigValidationError(f"validation-error: {exc}") from exc


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a JSON run configuration.

    Unknown keys anywhere are rejected. The empty object is a valid
    config and yields the documented defaults (256 x 64, 16-QAM, 18 dB,
    the convergence experiment).
    """
    try:
        raw = json.loads(text or "{}")
    except json.JSONDecodeError as exc:
        raise ConfigParseError(
            f"parse-error: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigValidationError("validation-error: top level must be an object")
    _require_keys(raw, ("experiment", "sweep", "output_path", "profile", "workers"),
                  "config")
    experiment = _get(raw, "experiment", str, "ser_vs_iteration", "config")
    if experiment not in EXPERIMENTS:
        raise ConfigValidationError(
            f"validation-error: unknown experiment {experiment!r}")
    profile = _get(raw, "profile", str, "full", "config")
    if profile not in ("full", "fast"):
        raise ConfigValidationError(f"validation-error: unknown profile {profile!r}")
    workers = _get(raw, "workers", int, 1, "config")
    if workers < 1:
        raise ConfigValidationError("validation-error: workers must be >= 1")

    sweep_obj = _get(raw, "sweep", dict, {}, "config")
    _require_keys(sweep_obj, ("M", "N", "modulation", "esno_db", "channel",
                              "algorithms", "trials", "master_seed",
                              "max_iterations", "include_awgn_bound"), "sweep")
    m = _get(sweep_obj, "M", int, 256, "sweep")
    n = _get(sweep_obj, "N", (int, list), 64, "sweep")
    esno = _get(sweep_obj, "esno_db", (int, float, list), 18.0, "sweep")
    algorithms = sweep_obj.get("algorithms", list(DEFAULT_ALGORITHMS))
    if not isinstance(algorithms, list) or not algorithms:
        raise ConfigValidationError("validation-error: algorithms must be a nonempty list")
    configs = tuple(_parse_algorithm(a, "algorithms") for a in algorithms)
    n_values = n if isinstance(n, list) else [n]
    for nv in n_values:
        if not isinstance(nv, int):
            raise ConfigValidationError("validation-error: N entries must be integers")
        if nv > m:
            raise ConfigValidationError("validation-error: N exceeds M")
    try:
        sweep = SweepSpec(
            M=m,
            N=n,
            modulation=_get(sweep_obj, "modulation", int, 16, "sweep"),
            esno_db=esno,
            channel=_parse_channel(_get(sweep_obj, "channel", dict, {}, "sweep")),
            algorithms=configs,
            trials=_get(sweep_obj, "trials", int, 1000, "sweep"),
            master_seed=_get(sweep_obj, "master_seed", int, 0, "sweep"),
            max_iterations=_get(sweep_obj, "max_iterations", int, 10, "sweep"),
            include_awgn_bound=_get(sweep_obj, "include_awgn_bound", bool, True,
                                    "sweep"),
        )
    except ValueError as exc:
        raise ConfigValidationError(f"validation-error: {exc}") from exc
    return RunConfig(
        experiment=experiment,
        sweep=sweep,
        output_path=_get(raw, "output_path", str, "results.csv", "config"),
        profile=profile,
        workers=workers,
    )


def apply_profile(cfg: RunConfig) -> RunConfig:
    """Shrink a run to CI scale: M -> 64, N scaled to keep the load, trials capped."""
    if cfg.profile != "fast":
        return cfg
    sweep = cfg.sweep
    scale = FAST_PROFILE_M / sweep.M
    n = sweep.N
    if isinstance(n, int):
        new_n = max(2, round(n * scale))
    else:
        new_n = sorted({max(2, round(v * scale)) for v in n})
    new_sweep = replace(sweep, M=FAST_PROFILE_M, N=new_n,
                        trials=min(sweep.trials, FAST_PROFILE_MAX_TRIALS))
    return RunConfig(experiment=cfg.experiment, sweep=new_sweep,
                     output_path=cfg.output_path, profile=cfg.profile,
                     workers=cfg.workers)


def _sort_key(spec: SweepSpec):
    order = {cfg.algorithm: i for i, cfg in enumerate(spec.algorithms)}
    order.setdefault("awgn_bound", len(order))

    def key(rec: SerRecord):
        return (order.get(rec.algorithm, len(order)), rec.N, rec.esno_db, rec.iteration)

    return key


def emit_csv(records: List[SerRecord], path) -> None:
    """Write records (already sorted) to ``path`` with the fixed header."""
    if not records:
        raise ValueError("no records to write")
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([
                r.algorithm, r.channel, r.M, r.N, r.modulation,
                f"{r.esno_db:g}", r.iteration, r.symbol_errors, r.symbols_total,
                f"{r.ser:.12g}", f"{r.wall_time_s:.6f}",
            ])


def _write_manifest(path: Path, config_text: str, sweep: SweepSpec) -> None:
    manifest = {
        "config_sha256": hashlib.sha256(config_text.encode("utf-8")).hexdigest(),
        "master_seed": sweep.master_seed,
        "version": __version__,
    }
    manifest_path = path.with_name(path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _run_bounds_only(sweep: SweepSpec) -> List[SerRecord]:
    recs = []
    n = sweep.n_list()[0]
    total = sweep.trials * n
    for esno in sweep.esno_list():
        esno_bits = int.from_bytes(struct.pack("<d", esno), "little")
        seed = np.random.SeedSequence((sweep.master_seed, 0xA11, n, esno_bits))
        t0 = time.perf_counter()
        ser = awgn_bound(sweep.modulation, esno, total, seed)
        e = int(round(ser * total))
        recs.append(SerRecord(
            algorithm="awgn_bound", channel=sweep.channel.model, M=sweep.M, N=n,
            modulation=sweep.modulation, esno_db=esno, iteration=1,
            symbol_errors=e, symbols_total=total, ser=ser,
            wall_time_s=time.perf_counter() - t0,
            low_confidence=e < LOW_CONFIDENCE_ERRORS))
    return recs


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anpid",
        description="Monte Carlo SER experiments for iterative large-MIMO detectors.",
        epilog="algorithms: " + " ".join(ALGORITHMS)
               + " (plus the awgn_bound reference curve); damping modes: "
               + " ".join(DAMPING_MODES),
    )
    parser.add_argument("--config", required=True, help="path to a JSON run config")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config master seed")
    parser.add_argument("--profile", choices=("fast", "full"), default=None,
                        help="override the config profile")
    parser.add_argument("--out", default=None, help="output CSV path")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config_text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(config_text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.profile:
        cfg.profile = args.profile
    if args.seed is not None:
        if args.seed < 0:
            print("config error: validation-error: seed must be nonnegative",
                  file=sys.stderr)
            return 2
        cfg.sweep = replace(cfg.sweep, master_seed=args.seed)
    if args.out:
        cfg.output_path = args.out
    cfg = apply_profile(cfg)
    runner = {
        "ser_vs_iteration": ser_vs_iteration,
        "ser_vs_load": ser_vs_load,
        "ser_vs_esno": ser_vs_esno,
    }
    try:
        if cfg.experiment == "bounds_only":
            records = _run_bounds_only(cfg.sweep)
        else:
            records = runner[cfg.experiment](cfg.sweep, workers=cfg.workers)
        records.sort(key=_sort_key(cfg.sweep))
        out_path = Path(cfg.output_path)
        emit_csv(records, out_path)
        _write_manifest(out_path, config_text, cfg.sweep)
    except Exception as exc:  # noqa: BLE001 -- boundary: report and set exit code
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {len(records)} records to {cfg.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
