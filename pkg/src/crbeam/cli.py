"""Reproducibility front end: experiment orchestration and CSV emission.

Every subcommand resolves a scenario from defaults, an optional flat
JSON config file, and command-line flags (in that order), runs one
experiment, and writes a CSV whose bytes are a pure function of the
resolved request.  Each CSV starts with a comment line recording the
seed, trial count and software version, followed by a header row.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, fields
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .analysis import lagrangian, sumrate_hessian
from .fitting import fit_user_count_surface
from .model import DEFAULT_SEED, ScenarioConfig, generate_channels, sum_rate
from .precoders import SCHEMES, zf_equalpower, zf_waterfill
from .simulation import optimal_user_count, run_ber, run_capacity, UserCountPoint

__all__ = ["ExperimentSpec", "run", "main"]

COMMANDS = ("capacity", "ber", "kstar", "fit", "hessian", "lagrangian")
SEED_ENV_VAR = "CRBEAM_SEED"


@dataclass(frozen=True)
class ExperimentSpec:
    """One fully-resolved experiment request."""

    command: str
    scenario: ScenarioConfig
    output_path: str
    schemes: Tuple[str, ...] = ("ZFWF", "ZFEP")
    workers: int = 1
    nbs_grid: Tuple[int, ...] = ()
    input_path: Optional[str] = None
    instances: int = 100
    step: float = 1e-4
    apply_tan: bool = True
    probe_p_bs: Optional[float] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}; choose from {COMMANDS}")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}; choose from {sorted(SCHEMES)}")


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def parse_grid(text: str) -> Tuple[float, ...]:
    """Parse 'start:step:stop' (inclusive stop) or a comma list of values."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} must be start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(round((stop - start) / step))
        values = [start + i * step for i in range(n + 1) if start + i * step <= stop + 1e-9]
        return tuple(values)
    return tuple(float(p) for p in text.split(","))


def _comment_line(seed, trials) -> str:
    return f"# crbeam={__version__} seed={seed} trials={trials}"


def _write_csv(path: str, comment: str, header: str, rows: List[str]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(comment + "\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _load_config_file(path: Optional[str]) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a flat JSON object")
    valid = {f.name for f in fields(ScenarioConfig)}
    unknown = set(data) - valid
    if unknown:
        raise ValueError(f"unknown config keys {sorted(unknown)}; valid keys: {sorted(valid)}")
    return data


def _resolve_scenario(args: argparse.Namespace) -> ScenarioConfig:
    overrides = _load_config_file(getattr(args, "config", None))
    if "seed" not in overrides:
        overrides["seed"] = _default_seed()
    flag_map = {
        "k": "n_su",
        "m": "n_pu",
        "nbs_single": "n_bs",
        "snr": "snr_grid_db",
        "ip_db": "i_p_db",
        "noise": "noise_power",
        "trials": "trials",
        "seed": "seed",
        "pbs": "p_bs",
        "target_errors": "target_bit_errors",
        "symbols": "ber_symbols",
    }
    for flag, field_name in flag_map.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field_name] = value
    if "snr_grid_db" in overrides and isinstance(overrides["snr_grid_db"], str):
        overrides["snr_grid_db"] = parse_grid(overrides["snr_grid_db"])
    return ScenarioConfig(**overrides)


def _build_spec(args: argparse.Namespace) -> ExperimentSpec:
    scenario = _resolve_scenario(args)
    schemes = tuple(getattr(args, "schemes", "ZFWF,ZFEP").split(","))
    nbs_grid: Tuple[int, ...] = ()
    if getattr(args, "nbs_grid", None) is not None:
        nbs_grid = tuple(int(v) for v in parse_grid(args.nbs_grid))
    return ExperimentSpec(
        command=args.command,
        scenario=scenario,
        output_path=args.out,
        schemes=schemes,
        workers=getattr(args, "workers", 1),
        nbs_grid=nbs_grid,
        input_path=getattr(args, "input", None),
        instances=getattr(args, "instances", 100),
        step=getattr(args, "step", 1e-4),
        apply_tan=not getattr(args, "no_tan", False),
        probe_p_bs=getattr(args, "pbs", None),
    )


def _run_capacity(spec: ExperimentSpec) -> Tuple[str, str, List[str]]:
    cfg = spec.scenario
    rows = []
    for scheme in spec.schemes:
        curve = run_capacity(cfg, scheme, workers=spec.workers)
        for snr, mean, se in zip(curve.snr_db, curve.mean_rate, curve.std_err):
            rows.append(f"{_fmt(snr)},{scheme},{_fmt(mean)},{_fmt(se)},{curve.trials}")
    return _comment_line(cfg.seed, cfg.trials), "snr_db,scheme,mean_rate,std_err,trials", rows


def _run_ber(spec: ExperimentSpec) -> Tuple[str, str, List[str]]:
    cfg = spec.scenario
    rows = []
    for scheme in spec.schemes:
        curve = run_ber(cfg, scheme, workers=spec.workers)
        for snr, ber, bits in zip(curve.snr_db, curve.ber, curve.bits_simulated):
            rows.append(f"{_fmt(snr)},{scheme},{_fmt(ber)},{bits}")
    return _comment_line(cfg.seed, cfg.trials), "snr_db,scheme,ber,bits", rows


def _run_kstar(spec: ExperimentSpec) -> Tuple[str, str, List[str]]:
    cfg = spec.scenario
    grid = spec.nbs_grid or (cfg.n_bs,)
    rows = []
    for snr in cfg.snr_grid_db:
        for n_bs in grid:
            point = optimal_user_count(
                n_bs=n_bs,
                snr_db=snr,
                n_pu=cfg.n_pu,
                trials=cfg.trials,
                seed=cfg.seed,
                noise_power=cfg.noise_power,
                i_p_db=cfg.i_p_db,
                workers=spec.workers,
            )
            rows.append(f"{point.n_bs},{_fmt(point.snr_db)},{point.k_best},{_fmt(point.peak_rate)}")
    return _comment_line(cfg.seed, cfg.trials), "n_bs,snr_db,k_star,peak_rate", rows


def _read_kstar_csv(path: str) -> Tuple[List[UserCountPoint], str, str]:
    points = []
    seed = trials = "unknown"
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if token.startswith("seed="):
                        seed = token[5:]
                    elif token.startswith("trials="):
                        trials = token[7:]
                continue
            if line.startswith("n_bs"):
                continue
            n_bs, snr_db, k_star, peak = line.split(",")
            points.append(
                UserCountPoint(
                    n_bs=int(n_bs),
                    snr_db=float(snr_db),
                    k_best=int(k_star),
                    peak_rate=float(peak),
                )
            )
    if not points:
        raise ValueError(f"no argmax records found in {path}")
    return points, seed, trials


def _run_fit(spec: ExperimentSpec) -> Tuple[str, str, List[str]]:
    if spec.input_path is None:
        raise ValueError("fit requires --input pointing at a kstar CSV")
    points, seed, trials = _read_kstar_csv(spec.input_path)
    surrogate = fit_user_count_surface(points, apply_tan=spec.apply_tan)
    rows = [
        f"{_fmt(lf.snr_db)},{_fmt(lf.slope)},{_fmt(lf.intercept)},{_fmt(lf.rmse)}"
        for lf in surrogate.linear_fits
    ]
    rows.append("target,a,b,c,rmse")
    for pl in (surrogate.slope_fit, surrogate.intercept_fit):
        rows.append(f"{pl.target},{_fmt(pl.a)},{_fmt(pl.b)},{_fmt(pl.c)},{_fmt(pl.rmse)}")
    return _comment_line(seed, trials), "snr_db,slope,intercept,rmse", rows


def _probe_budget(spec: ExperimentSpec) -> float:
    """Single-point probes take --pbs when given, else the first grid point."""
    if spec.probe_p_bs is not None:
        return spec.probe_p_bs
    cfg = spec.scenario
    return cfg.p_bs_for(cfg.snr_grid_db[0]) if cfg.snr_grid_db else cfg.p_bs


def _run_hessian(spec: ExperimentSpec) -> Tuple[str, str, List[str]]:
    cfg = spec.scenario
    cfg.require_zf_feasible()
    p_bs = _probe_budget(spec)
    rows = []
    for i in range(spec.instances):
        ch = generate_channels(cfg, i)
        report = sumrate_hessian(ch, zf_equalpower(ch, p_bs), step=spec.step)
        rows.append(f"{i},{_fmt(report.min_eig)},{_fmt(report.max_eig)},{int(report.indefinite)}")
    return _comment_line(cfg.seed, spec.instances), "instance,min_eig,max_eig,indefinite", rows


def _run_lagrangian(spec: ExperimentSpec) -> Tuple[str, str, List[str]]:
    cfg = spec.scenario
    cfg.require_zf_feasible()
    p_bs = _probe_budget(spec)
    zeros_k = np.zeros(cfg.n_su)
    zeros_m = np.zeros(cfg.n_pu)
    rows = []
    for i in range(spec.instances):
        ch = generate_channels(cfg, i)
        prec = zf_waterfill(ch, p_bs)
        lag = lagrangian(ch, prec, zeros_k, zeros_m, p_bs)
        rate = sum_rate(ch, prec)
        rows.append(f"{i},{_fmt(lag)},{_fmt(rate)},{_fmt(abs(lag - rate))}")
    return _comment_line(cfg.seed, spec.instances), "instance,lagrangian,sum_rate,abs_diff", rows


_RUNNERS = {
    "capacity": _run_capacity,
    "ber": _run_ber,
    "kstar": _run_kstar,
    "fit": _run_fit,
    "hessian": _run_hessian,
    "lagrangian": _run_lagrangian,
}


def run(spec: ExperimentSpec) -> int:
    """Execute one experiment; returns a process exit status."""
    started = time.perf_counter()
    try:
        comment, header, rows = _RUNNERS[spec.command](spec)
        _write_csv(spec.output_path, comment, header, rows)
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - started
    parts = [spec.command]
    if spec.command in ("capacity", "ber"):
        parts.append(f"schemes={','.join(spec.schemes)}")
    parts.append(f"rows={len(rows)}")
    parts.append(f"elapsed={elapsed:.2f}s -> {spec.output_path}")
    print(" ".join(parts))
    return 0


def _add_scenario_flags(p: argparse.ArgumentParser, nbs_is_grid: bool = False) -> None:
    p.add_argument("--config", help="flat JSON file with scenario fields")
    p.add_argument("--k", type=int, help="number of secondary users")
    p.add_argument("--m", type=int, help="number of primary users")
    if nbs_is_grid:
        p.add_argument("--nbs", dest="nbs_grid", help="antenna grid, start:step:stop or comma list")
    else:
        p.add_argument("--nbs", dest="nbs_single", type=int, help="number of BS antennas")
    p.add_argument("--snr", help="SNR grid in dB, start:step:stop or comma list")
    p.add_argument("--ip-db", dest="ip_db", type=float, help="primary interference power in dB")
    p.add_argument("--noise", type=float, help="receiver noise power (linear)")
    p.add_argument("--trials", type=int, help="channel draws per grid point")
    p.add_argument("--seed", type=int, help=f"base seed (default from ${SEED_ENV_VAR} or {DEFAULT_SEED})")
    p.add_argument("--pbs", type=float, help="power budget for single-point probes")
    p.add_argument("--workers", type=int, default=1, help="parallel trial workers")
    p.add_argument("--out", required=True, help="output CSV path")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crbeam",
        description="Underlay cognitive downlink experiments: capacity, BER, user-count sweeps and fits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="ergodic sum-capacity curves")
    _add_scenario_flags(p)
    p.add_argument("--schemes", default="ZFWF,ZFEP", help="comma list from ZFWF,ZFEP,MMSE")

    p = sub.add_parser("ber", help="bit error rate curves (4-QAM)")
    _add_scenario_flags(p)
    p.add_argument("--schemes", default="ZFWF,ZFEP", help="comma list from ZFWF,ZFEP,MMSE")
    p.add_argument("--target-errors", dest="target_errors", type=int, help="stopping error count")
    p.add_argument("--symbols", type=int, help="symbols per user per channel draw")

    p = sub.add_parser("kstar", help="search the rate-maximizing served-user count")
    _add_scenario_flags(p, nbs_is_grid=True)

    p = sub.add_parser("fit", help="fit the closed-form user-count surrogate")
    p.add_argument("--input", required=True, help="kstar CSV produced by the kstar command")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--no-tan", action="store_true", help="use the affine slope instead of its tangent")

    p = sub.add_parser("hessian", help="sum-rate curvature probes at equal-power points")
    _add_scenario_flags(p)
    p.add_argument("--instances", type=int, default=100, help="number of seeded channel draws")
    p.add_argument("--step", type=float, default=1e-4, help="finite-difference step")

    p = sub.add_parser("lagrangian", help="zero-multiplier dual value against the sum rate")
    _add_scenario_flags(p)
    p.add_argument("--instances", type=int, default=100, help="number of seeded channel draws")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = _build_spec(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
