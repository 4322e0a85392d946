"""Command-line front end: scenario-driven runs, sweeps, estimation, ensembles.

Subcommands
-----------
propagate    closed-dynamics time series from a scenario file
sweep-beta   closed-form probability / concurrence sweep over the
             adiabaticity parameter, optionally numerically verified
estimate     invert measured probabilities into coupling parameters
noise-mc     Monte Carlo ensemble for a noisy-ramp scenario
decay        sweep with irreversibly decaying up states
exact-check  agreement audit of closed-form vs numeric block amplitudes

All randomness is seeded and floats are written with 12 significant
digits, so identical inputs give byte-identical outputs.  Exit codes:
0 success, 2 input/schema error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Optional

import numpy as np

from .errors import (
    ConfigurationError,
    EstimationError,
    IntegrationError,
    InvalidInputError,
    LmszError,
    PoleError,
    RangeError,
)
from .estimation import ProbabilityMeasurement, invert_probabilities
from .model import NoisyRamp, Ramp
from .observables import exact_ramp_trajectory
from .openquantum import NoiseSpec, run_noisy_lmsz
from .propagation import (
    EffectiveBlock,
    Window,
    numeric_lmsz_probability,
    propagate_block,
    propagate_two_qubit,
)
from .scenario import ScenarioFile, load_scenario
from .specfun import exact_amplitudes_grid

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_INPUT_ERRORS = (ConfigurationError, InvalidInputError, RangeError, PoleError, OSError)
_NUMERICAL_ERRORS = (IntegrationError, EstimationError, FloatingPointError)


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _json_round(obj):
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _json_round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_round(v) for v in obj]
    return obj


def _write_table(path: str, fmt: str, header: list[str], rows: list[list], meta: dict) -> None:
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([c if isinstance(c, str) else _fmt(c) for c in row])
    else:
        columns = {name: [] for name in header}
        for row in rows:
            for name, cell in zip(header, row):
                columns[name].append(cell if isinstance(cell, str) else float(_fmt(cell)))
        doc = {"meta": _json_round(meta), "columns": columns}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.write("\n")


def _parse_window_flag(value: str) -> tuple[float, float, Optional[int]]:
    parts = value.split(":")
    if len(parts) not in (2, 3):
        raise ConfigurationError(f"--window expects TAU_I:TAU_F[:POINTS], got {value!r}")
    try:
        tau_i, tau_f = float(parts[0]), float(parts[1])
        n = int(parts[2]) if len(parts) == 3 else None
    except ValueError:
        raise ConfigurationError(f"--window expects numbers, got {value!r}")
    return tau_i, tau_f, n


def _apply_overrides(scn: ScenarioFile, args) -> ScenarioFile:
    """CLI flags take precedence over scenario-file values."""
    updates = {}
    if getattr(args, "tolerance", None) is not None:
        updates["tolerance"] = args.tolerance
    if getattr(args, "window", None) is not None:
        tau_i, tau_f, n = _parse_window_flag(args.window)
        updates["window"] = Window.uniform(tau_i, tau_f, n or 2001)
    if getattr(args, "seed", None) is not None and isinstance(scn.field, NoisyRamp):
        updates["field"] = NoisyRamp(
            alpha=scn.field.alpha, noise_strength_G=scn.field.noise_strength_G,
            seed=args.seed, applied_to=scn.field.applied_to,
        )
    if not updates:
        return scn
    from dataclasses import replace

    return replace(scn, **updates)


# --------------------------------------------------------------------------
# propagate
# --------------------------------------------------------------------------

_COLUMN_GROUPS = {
    "populations": ["p_pp", "p_pm", "p_mp", "p_mm"],
    "concurrence": ["concurrence"],
    "amplitudes": ["re_pp", "im_pp", "re_pm", "im_pm", "re_mp", "im_mp", "re_mm", "im_mm"],
    "norm": ["norm"],
}


def _trajectory_columns(traj, outputs) -> dict:
    amps = traj.amplitudes
    cols = {}
    for group in outputs:
        if group == "populations":
            pops = traj.populations
            for j, name in enumerate(_COLUMN_GROUPS["populations"]):
                cols[name] = pops[:, j]
        elif group == "concurrence":
            cols["concurrence"] = np.clip(
                2.0 * np.abs(amps[:, 0] * amps[:, 3] - amps[:, 1] * amps[:, 2]), 0.0, 1.0
            )
        elif group == "amplitudes":
            for j, state in enumerate(("pp", "pm", "mp", "mm")):
                cols[f"re_{state}"] = amps[:, j].real
                cols[f"im_{state}"] = amps[:, j].imag
        elif group == "norm":
            cols["norm"] = traj.norm
    return cols


def cmd_propagate(args) -> int:
    scn = _apply_overrides(load_scenario(args.scenario), args)
    if isinstance(scn.field, NoisyRamp):
        raise ConfigurationError("scenario has a noisy_ramp field; use the noise-mc subcommand")
    if scn.decay is not None:
        raise ConfigurationError("scenario has a decay block; use the decay subcommand")
    if args.verify and not isinstance(scn.field, Ramp):
        raise ConfigurationError("--verify needs the closed-form engine, "
                                 "which requires a pure ramp field")

    engines = ["numeric", "exact"] if scn.engine == "both" else [scn.engine]
    results = {}
    for engine in set(engines) | ({"numeric", "exact"} if args.verify else set()):
        if engine == "numeric":
            results[engine] = propagate_two_qubit(scn.coupling, scn.field, scn.initial_state,
                                                  scn.window, scn.tolerance)
        else:
            results[engine] = exact_ramp_trajectory(scn.coupling, scn.field,
                                                    scn.initial_state, scn.window)

    header = ["tau"]
    for engine in engines:
        suffix = f"_{engine}" if len(engines) > 1 else ""
        for group in scn.outputs:
            header += [c + suffix for c in _COLUMN_GROUPS[group]]

    rows = []
    if scn.outputs:
        taus = scn.window.grid
        all_cols = []
        for engine in engines:
            cols = _trajectory_columns(results[engine], scn.outputs)
            for group in scn.outputs:
                for name in _COLUMN_GROUPS[group]:
                    all_cols.append(cols[name])
        for i in range(len(taus)):
            rows.append([taus[i]] + [col[i] for col in all_cols])

    meta = {"command": "propagate", "scenario": args.scenario, "engine": scn.engine,
            "tolerance": scn.tolerance}
    if args.verify:
        num = results["numeric"].amplitudes
        exa = results["exact"].amplitudes
        worst = float(np.max(np.abs(
            2.0 * np.abs(num[:, 0] * num[:, 3] - num[:, 1] * num[:, 2])
            - 2.0 * np.abs(exa[:, 0] * exa[:, 3] - exa[:, 1] * exa[:, 2]))))
        meta["max_verify_deviation"] = worst
    _write_table(args.out, args.format, header, rows, meta)
    print(f"wrote {len(rows)} rows to {args.out}")
    if args.verify:
        print(f"engine cross-check: max concurrence deviation {worst:.3e}")
        if worst > 1e-5:
            print("verification failed: engines disagree beyond 1e-5", file=sys.stderr)
            return EXIT_NUMERICAL
    return EXIT_OK


# --------------------------------------------------------------------------
# sweep-beta
# --------------------------------------------------------------------------

def cmd_sweep_beta(args) -> int:
    if not (0.0 <= args.min < args.max):
        raise InvalidInputError(f"need 0 <= min < max, got [{args.min}, {args.max}]")
    if args.steps < 2:
        raise InvalidInputError("need at least two sweep steps")
    betas = np.linspace(args.min, args.max, args.steps)
    header = ["beta", "P", "C_asymptotic"]
    verify_at = set()
    if args.verify:
        header.append("P_numeric")
        idx = np.unique(np.linspace(0, args.steps - 1, min(args.verify_points, args.steps)).astype(int))
        verify_at = set(int(i) for i in idx)

    worst = 0.0
    rows = []
    for i, beta in enumerate(betas):
        p = -math.expm1(-2.0 * math.pi * beta)
        c = 2.0 * math.sqrt(p * (1.0 - p))
        row = [beta, p, c]
        if args.verify:
            if i in verify_at:
                p_num = numeric_lmsz_probability(float(beta), tolerance=args.tolerance or 1e-10)
                worst = max(worst, abs(p_num - p))
                row.append(p_num)
            else:
                row.append("")
        rows.append(row)

    meta = {"command": "sweep-beta", "sector": args.sector, "verified": bool(args.verify)}
    if args.verify:
        meta["max_verify_deviation"] = worst
    _write_table(args.out, args.format, header, rows, meta)
    print(f"wrote {len(rows)} rows to {args.out}")
    if args.verify and worst > 5e-3:
        print(f"verification failed: numeric deviates from closed form by {worst:.2e}",
              file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# --------------------------------------------------------------------------
# estimate
# --------------------------------------------------------------------------

def _load_measurements(path: str) -> list[dict]:
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            try:
                records = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})")
        if not isinstance(records, list):
            raise ConfigurationError("measurement file must contain a list of records")
        return records
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return [dict(r) for r in csv.DictReader(fh)]


def _record_to_measurement(rec: dict) -> ProbabilityMeasurement:
    def num(key):
        if key not in rec or rec[key] in (None, ""):
            raise ConfigurationError(f"missing field {key!r}")
        return float(rec[key])

    def counts(prefix):
        k_key, n_key = f"n_success_{prefix}", f"n_total_{prefix}"
        if rec.get(k_key) in (None, "") or rec.get(n_key) in (None, ""):
            return None
        return (int(float(rec[k_key])), int(float(rec[n_key])))

    return ProbabilityMeasurement(
        p_plus=num("p_plus"), p_minus=num("p_minus"), alpha=num("alpha"),
        counts_plus=counts("plus"), counts_minus=counts("minus"),
    )


def cmd_estimate(args) -> int:
    records = _load_measurements(args.measurements)
    rows, errors = [], []
    note = ""
    for i, rec in enumerate(records):
        try:
            est = invert_probabilities(_record_to_measurement(rec))
        except (LmszError, ValueError) as exc:
            errors.append(f"record {i}: {exc}")
            continue
        note = est.note
        rows.append([
            est.gamma_x, est.gamma_y,
            "" if est.gamma_x_stderr is None else est.gamma_x_stderr,
            "" if est.gamma_y_stderr is None else est.gamma_y_stderr,
        ])
    if errors:
        for line in errors:
            print(line, file=sys.stderr)
        return EXIT_INPUT
    header = ["gamma_x", "gamma_y", "gamma_x_stderr", "gamma_y_stderr"]
    _write_table(args.out, args.format, header, rows, {"command": "estimate", "note": note})
    print(f"wrote {len(rows)} rows to {args.out}")
    print(f"note: {note}")
    return EXIT_OK


# --------------------------------------------------------------------------
# noise-mc
# --------------------------------------------------------------------------

def cmd_noise_mc(args) -> int:
    scn = _apply_overrides(load_scenario(args.scenario), args)
    if not isinstance(scn.field, NoisyRamp):
        raise ConfigurationError("noise-mc requires a scenario with a noisy_ramp field")
    if scn.noise_realizations is None:
        raise ConfigurationError("noise-mc requires a noise block with n_realizations")
    geometry = "spin1_only" if scn.field.applied_to == "spin1" else "both_homogeneous"
    spec = NoiseSpec(G=scn.field.noise_strength_G, n_realizations=scn.noise_realizations,
                     base_seed=scn.field.seed)
    result = run_noisy_lmsz(scn.coupling, scn.field.alpha, spec, scn.initial_state,
                            scn.window, field_geometry=geometry, n_steps=scn.noise_steps)
    meta = {
        "command": "noise-mc", "scenario": args.scenario,
        "noise_strength_G": scn.field.noise_strength_G, "base_seed": scn.field.seed,
        "n_realizations": result.n_realizations, "field_geometry": geometry,
    }
    header = ["state", "mean_population", "standard_error"]
    rows = [[name, result.mean_populations[i], result.standard_error[i]]
            for i, name in enumerate(("pp", "pm", "mp", "mm"))]
    _write_table(args.out, args.format, header, rows, meta)
    print(f"wrote ensemble of {result.n_realizations} realizations to {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# decay
# --------------------------------------------------------------------------

def cmd_decay(args) -> int:
    scn = _apply_overrides(load_scenario(args.scenario), args)
    if scn.decay is None:
        raise ConfigurationError("decay subcommand requires a scenario with a decay block")
    if "concurrence" in scn.outputs:
        raise ConfigurationError("open-system runs report populations only; "
                                 "drop 'concurrence' from outputs")
    traj = propagate_two_qubit(scn.coupling, scn.field, scn.initial_state,
                               scn.window, scn.tolerance, decay=scn.decay)
    outputs = tuple(scn.outputs) or ("populations", "norm")
    header = ["tau"]
    for group in outputs:
        header += _COLUMN_GROUPS[group]
    cols = _trajectory_columns(traj, outputs)
    rows = [[traj.taus[i]] + [cols[name][i] for name in header[1:]]
            for i in range(len(traj.taus))]
    meta = {"command": "decay", "scenario": args.scenario,
            "xi_1": scn.decay.xi_1, "xi_2": scn.decay.xi_2}
    _write_table(args.out, args.format, header, rows, meta)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# exact-check
# --------------------------------------------------------------------------

def cmd_exact_check(args) -> int:
    betas = [float(b) for b in args.betas.split(",")]
    if any(b <= 0 for b in betas):
        raise InvalidInputError("exact-check betas must be positive")
    tau_i, tau_f, n = _parse_window_flag(args.window or "-100:100:9")
    taus = np.linspace(tau_i, tau_f, n or 9)
    window = Window(tau_i, tau_f, tuple(taus))
    tol = args.tolerance or 1e-6

    header = ["beta", "tau", "d_a", "d_b", "unitarity_deviation"]
    rows = []
    worst = 0.0
    for beta in betas:
        block = EffectiveBlock(sector="plus", gamma_block=math.sqrt(beta),
                               energy_shift=0.0, field=Ramp(alpha=1.0))
        traj = propagate_block(block, window, tolerance=1e-11)
        exact = exact_amplitudes_grid(beta, taus, tau_i)
        for k, tau in enumerate(taus):
            da = abs(exact[k, 0] - traj.a[k])
            db = abs(exact[k, 1] - traj.b[k])
            unit = abs(abs(exact[k, 0]) ** 2 + abs(exact[k, 1]) ** 2 - 1.0)
            worst = max(worst, da, db)
            rows.append([beta, tau, da, db, unit])
    meta = {"command": "exact-check", "max_amplitude_deviation": worst, "tolerance": tol}
    _write_table(args.out, args.format, header, rows, meta)
    print(f"max amplitude deviation {worst:.3e} (tolerance {tol:g})")
    if worst > tol:
        print("exact-check failed", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# --------------------------------------------------------------------------
# parser / entry point
# --------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, *, window: bool = True) -> None:
    p.add_argument("--out", required=True, help="output file path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--tolerance", type=float, default=None,
                   help="integration tolerance override")
    if window:
        p.add_argument("--window", default=None, metavar="TAU_I:TAU_F[:POINTS]",
                       help="window override")
    p.add_argument("--seed", type=int, default=None, help="noise seed override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmszpair",
        description="Two coupled spin qubits under linear-sweep drives",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("propagate", help="time series from a scenario file")
    p.add_argument("scenario")
    p.add_argument("--verify", action="store_true",
                   help="cross-check the numeric engine against the closed form")
    _add_common(p)
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("sweep-beta", help="closed-form sweep over the adiabaticity parameter")
    p.add_argument("--min", type=float, required=True)
    p.add_argument("--max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--sector", choices=("plus", "minus"), default="plus")
    p.add_argument("--verify", action="store_true",
                   help="cross-check a subset of rows numerically")
    p.add_argument("--verify-points", type=int, default=5)
    _add_common(p, window=False)
    p.set_defaults(func=cmd_sweep_beta)

    p = sub.add_parser("estimate", help="invert measured probabilities into couplings")
    p.add_argument("measurements", help="CSV or JSON measurement records")
    _add_common(p, window=False)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("noise-mc", help="Monte Carlo ensemble for a noisy-ramp scenario")
    p.add_argument("scenario")
    _add_common(p)
    p.set_defaults(func=cmd_noise_mc)

    p = sub.add_parser("decay", help="sweep with decaying up states")
    p.add_argument("scenario")
    _add_common(p)
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("exact-check", help="closed-form vs numeric amplitude audit")
    p.add_argument("--betas", default="0.05,0.11,0.5,1,2",
                   help="comma-separated adiabaticity parameters")
    _add_common(p)
    p.set_defaults(func=cmd_exact_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
