"""Command-line front end: configuration, orchestration, artifact emission.

Every command reads an optional JSON config (--config); each config key has
a mirror flag and flags win.  Artifacts are plot-ready CSV and JSON with
provenance (config hash, seed, artifact version), written atomically.  Seeds
are always materialized: a run without one draws a seed, uses it, and
records it, so every artifact can be reproduced exactly.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 result below
the configured acceptance floor.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .basis import end_pair_partition
from .controllability import dynamical_lie_dimension, strongly_regular_connected_check
from .hamiltonians import (
    ChainSpec,
    build_h0,
    build_h1,
    ground_state,
    operator_from_json,
    operator_to_json,
)
from .metrics import concurrence, reduced_end_density
from .optimizer import (
    OptimizeOptions,
    OptimizerStatus,
    ensemble_problem,
    ground_problem,
    min_time_scan,
    multistart_optimize,
    recommended_horizon,
)
from .propagation import DephasingModel, StepRefinementError, evolve_pure
from .pulses import Pulse, pulse_from_json, pulse_to_csv, pulse_to_json
from .robustness import (
    sweep_dephasing,
    sweep_disorder,
    sweep_filename,
    sweep_leakage,
    sweep_thermal,
    sweep_to_csv,
    sweep_to_json,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_FLOOR = 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

_COMMON_KEYS = {
    "n_spins", "coupling", "n_exc", "seed", "out", "format", "jobs",
}
_COMMAND_KEYS = {
    "optimize": _COMMON_KEYS | {
        "steps", "t_f", "dt", "bound", "restarts", "max_iterations",
        "grad_tol", "value_tol", "target_fidelity", "fidelity_floor",
        "initial", "kt_over_j", "name",
    },
    "evolve": _COMMON_KEYS | {"pulse", "max_tracked"},
    "sweep-thermal": _COMMON_KEYS | {"pulse", "grid"},
    "sweep-leakage": _COMMON_KEYS | {"pulse", "grid", "reoptimize", "restarts"},
    "sweep-disorder": _COMMON_KEYS | {
        "pulse", "grid", "samples", "reoptimize", "restarts",
    },
    "sweep-dephasing": _COMMON_KEYS | {"pulse", "grid", "model"},
    "controllability": _COMMON_KEYS | {"h0_file", "h1_file", "max_lie_dim", "tol"},
    "min-time": _COMMON_KEYS | {
        "n_list", "threshold", "steps", "restarts", "grids", "grid_points",
    },
    "export-operators": _COMMON_KEYS,
}


def _load_config(path: str | None, command: str) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path} is not valid JSON: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    unknown = set(doc) - _COMMAND_KEYS[command]
    if unknown:
        raise ConfigError(
            f"config {path} has keys unknown to '{command}': {sorted(unknown)}"
        )
    return doc


def _merge(config: dict, args: argparse.Namespace, keys) -> dict:
    merged = dict(config)
    for key in keys:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            merged[key] = flag_val
    return merged


def _materialize_seed(cfg: dict) -> int:
    if cfg.get("seed") is None:
        cfg["seed"] = int(np.random.SeedSequence().generate_state(1)[0])
    return int(cfg["seed"])


def _config_hash(cfg: dict) -> str:
    # identity of the computation: where results land is not part of it
    core = {k: v for k, v in cfg.items() if k not in ("out", "format", "jobs")}
    return hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()[:16]


def _provenance(cfg: dict) -> dict:
    return {
        "artifact_version": __version__,
        "config_hash": _config_hash(cfg),
        "seed": cfg.get("seed"),
    }


def _parse_grid(raw) -> list[float]:
    if isinstance(raw, str):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"grid is not valid JSON: {exc.msg}") from exc
    if isinstance(raw, dict):
        try:
            return np.linspace(float(raw["start"]), float(raw["stop"]), int(raw["num"])).tolist()
        except KeyError as exc:
            raise ConfigError("grid object needs keys start, stop, num") from exc
    if isinstance(raw, (list, tuple)) and raw:
        return [float(x) for x in raw]
    raise ConfigError("grid must be a non-empty list or {start, stop, num}")


def _chain_spec(cfg: dict) -> ChainSpec:
    if "n_spins" not in cfg:
        raise ConfigError("n_spins is required")
    try:
        return ChainSpec(int(cfg["n_spins"]), float(cfg.get("coupling", 1.0)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _sector(cfg: dict, spec: ChainSpec) -> int:
    n_exc = int(cfg.get("n_exc", spec.largest_sector()))
    if not 0 <= n_exc <= spec.n_spins:
        raise ConfigError(f"n_exc={n_exc} outside [0, {spec.n_spins}]")
    return n_exc


# ---------------------------------------------------------------------------
# artifact writing
# ---------------------------------------------------------------------------

def _atomic_write(path: str, text: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_artifacts(outdir: str, named_texts: dict[str, str]) -> dict[str, str]:
    hashes = {}
    for name, text in named_texts.items():
        _atomic_write(os.path.join(outdir, name), text)
        hashes[name] = hashlib.sha256(text.encode()).hexdigest()
    return hashes


def _write_manifest(outdir: str, cfg: dict, hashes: dict[str, str]):
    manifest = {"provenance": _provenance(cfg), "artifacts": hashes}
    _atomic_write(
        os.path.join(outdir, "manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True),
    )


def _load_pulse(cfg: dict, spec: ChainSpec, n_exc: int) -> Pulse:
    path = cfg.get("pulse")
    if not path:
        raise ConfigError("a pulse file is required (key 'pulse')")
    try:
        with open(path) as fh:
            pulse, context = pulse_from_json(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read pulse {path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"pulse file {path} is malformed: {exc}") from exc
    mismatch = []
    if context["n_spins"] != spec.n_spins:
        mismatch.append(f"n_spins {context['n_spins']} != {spec.n_spins}")
    if abs(context["coupling"] - spec.coupling) > 1e-12:
        mismatch.append(f"coupling {context['coupling']} != {spec.coupling}")
    if context["n_exc"] != n_exc:
        mismatch.append(f"n_exc {context['n_exc']} != {n_exc}")
    if mismatch:
        raise ConfigError(f"pulse {path} does not match the run: " + "; ".join(mismatch))
    return pulse


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_optimize(cfg: dict) -> int:
    spec = _chain_spec(cfg)
    n_exc = _sector(cfg, spec)
    seed = _materialize_seed(cfg)
    steps = int(cfg.get("steps", 64))
    if "t_f" in cfg and "dt" in cfg:
        if abs(float(cfg["t_f"]) - steps * float(cfg["dt"])) > 1e-12:
            raise ConfigError("t_f and dt are inconsistent with steps")
    if "dt" in cfg:
        duration = steps * float(cfg["dt"])
    elif "t_f" in cfg:
        duration = float(cfg["t_f"])
    else:
        duration = recommended_horizon(spec.n_spins)
    if duration <= 0:
        raise ConfigError("pulse duration must be positive")

    initial = cfg.get("initial", "ground")
    if initial == "ground":
        problem = ground_problem(spec, n_exc)
    elif initial == "thermal":
        if "kt_over_j" not in cfg:
            raise ConfigError("initial='thermal' needs kt_over_j")
        problem = ensemble_problem(spec, float(cfg["kt_over_j"]))
    else:
        raise ConfigError(f"initial must be 'ground' or 'thermal', got {initial!r}")

    options = OptimizeOptions(
        max_iterations=int(cfg.get("max_iterations", 5000)),
        grad_tol=float(cfg.get("grad_tol", 1e-8)),
        value_tol=float(cfg.get("value_tol", 1e-10)),
        bound=float(cfg["bound"]) if cfg.get("bound") is not None else None,
        target_fidelity=(
            float(cfg["target_fidelity"]) if cfg.get("target_fidelity") is not None else None
        ),
    )
    t0 = time.perf_counter()
    result = multistart_optimize(
        problem, steps, duration,
        restarts=int(cfg.get("restarts", 5)), seed=seed, options=options,
    )
    wall = time.perf_counter() - t0

    name = cfg.get("name", f"pulse_N{spec.n_spins}_n{n_exc}")
    provenance = dict(
        _provenance(cfg),
        options={
            "steps": steps, "duration": duration,
            "restarts": int(cfg.get("restarts", 5)),
            "initial": initial, "kt_over_j": cfg.get("kt_over_j"),
            "bound": cfg.get("bound"),
        },
        fidelity=result.final_fidelity,
    )
    pulse_doc = pulse_to_json(
        result.pulse, n_spins=spec.n_spins, coupling=spec.coupling, n_exc=n_exc,
        provenance=provenance,
    )
    trace_lines = ["iteration,fidelity"] + [
        f"{i},{k:.15g}" for i, k in enumerate(result.fidelity_trace)
    ]
    summary = {
        "final_fidelity": result.final_fidelity,
        "final_concurrence": result.final_concurrence,
        "iterations": result.iterations,
        "status": result.status.value,
        "gradient_norm_at_exit": result.gradient_norm_at_exit,
        "wall_time_s": wall,
        "provenance": _provenance(cfg),
    }
    outdir = cfg.get("out", ".")
    hashes = _write_artifacts(outdir, {
        f"{name}.json": pulse_doc,
        f"{name}_trace.csv": "\n".join(trace_lines) + "\n",
        f"{name}_amplitudes.csv": pulse_to_csv(result.pulse),
        f"{name}_summary.json": json.dumps(summary, indent=2, sort_keys=True),
    })
    _write_manifest(outdir, cfg, hashes)
    print(
        f"optimize: fidelity={result.final_fidelity:.6f} "
        f"concurrence={result.final_concurrence:.6f} status={result.status.value}"
    )
    floor = float(cfg.get("fidelity_floor", 0.0))
    if result.status is not OptimizerStatus.CONVERGED or result.final_fidelity < floor:
        return EXIT_FLOOR
    return EXIT_OK


def cmd_evolve(cfg: dict) -> int:
    spec = _chain_spec(cfg)
    n_exc = _sector(cfg, spec)
    _materialize_seed(cfg)
    pulse = _load_pulse(cfg, spec, n_exc)
    h0 = build_h0(spec, n_exc)
    h1 = build_h1(spec, n_exc)
    _, psi0, _ = ground_state(h0)
    _, states = evolve_pure(pulse, psi0, h0, h1, spec.coupling, trajectory=True)
    part = end_pair_partition(h0.basis)

    max_tracked = int(cfg.get("max_tracked", 64))
    tracked = list(range(h0.dim)) if h0.dim <= max_tracked else []
    labels = [h0.basis.label(i) for i in tracked]
    header = ["t", "B"] + labels + ["concurrence"]
    rows = [",".join(header)]
    amps = pulse.amplitudes
    for m, t in enumerate(pulse.times()):
        b_amp = amps[min(m, len(amps) - 1)]
        pops = [f"{abs(states[m][i]) ** 2:.12g}" for i in tracked]
        conc = concurrence(reduced_end_density(states[m], part))
        rows.append(",".join([f"{t:.12g}", f"{b_amp:.12g}"] + pops + [f"{conc:.12g}"]))

    outdir = cfg.get("out", ".")
    name = cfg.get("name", f"trajectory_N{spec.n_spins}_n{n_exc}")
    hashes = _write_artifacts(outdir, {f"{name}.csv": "\n".join(rows) + "\n"})
    _write_manifest(outdir, cfg, hashes)
    print(f"evolve: wrote {name}.csv (final concurrence {conc:.6f})")
    return EXIT_OK


def _emit_sweep(cfg: dict, result) -> int:
    outdir = cfg.get("out", ".")
    fmt = cfg.get("format", "both")
    if fmt not in ("csv", "json", "both"):
        raise ConfigError(f"format must be csv|json|both, got {fmt!r}")
    texts = {}
    if fmt in ("csv", "both"):
        texts[sweep_filename(result, "csv")] = sweep_to_csv(result)
    if fmt in ("json", "both"):
        texts[sweep_filename(result, "json")] = sweep_to_json(result)
    hashes = _write_artifacts(outdir, texts)
    _write_manifest(outdir, cfg, hashes)
    for name in hashes:
        print(f"sweep: wrote {name}")
    return EXIT_OK


def cmd_sweep(kind: str, cfg: dict) -> int:
    spec = _chain_spec(cfg)
    n_exc = _sector(cfg, spec)
    seed = _materialize_seed(cfg)
    pulse = _load_pulse(cfg, spec, n_exc)
    if "grid" not in cfg:
        raise ConfigError("a parameter grid is required (key 'grid')")
    grid = _parse_grid(cfg["grid"])
    provenance = dict(_provenance(cfg), n_spins=spec.n_spins, pulse=cfg.get("pulse"))

    if kind == "thermal":
        result = sweep_thermal(pulse, spec, grid, provenance=provenance)
    elif kind == "leakage":
        result = sweep_leakage(
            pulse, spec, grid,
            reoptimize=bool(cfg.get("reoptimize", False)),
            restarts=int(cfg.get("restarts", 5)),
            seed=seed, provenance=provenance,
        )
    elif kind == "disorder":
        result = sweep_disorder(
            pulse, spec, grid,
            samples=int(cfg.get("samples", 100)),
            master_seed=seed,
            reoptimize=bool(cfg.get("reoptimize", False)),
            restarts=int(cfg.get("restarts", 1)),
            provenance=provenance,
        )
    else:
        model_name = str(cfg.get("model", "end_spins")).lower()
        try:
            model = DephasingModel(model_name)
        except ValueError:
            raise ConfigError(f"model must be end_spins|all_spins, got {model_name!r}")
        result = sweep_dephasing(pulse, spec, grid, model, provenance=provenance)
    return _emit_sweep(cfg, result)


def cmd_controllability(cfg: dict) -> int:
    _materialize_seed(cfg)
    if cfg.get("h0_file") or cfg.get("h1_file"):
        if not (cfg.get("h0_file") and cfg.get("h1_file")):
            raise ConfigError("both h0_file and h1_file are required together")
        try:
            with open(cfg["h0_file"]) as fh:
                h0 = operator_from_json(fh.read())
            with open(cfg["h1_file"]) as fh:
                h1 = operator_from_json(fh.read())
        except OSError as exc:
            raise ConfigError(str(exc)) from exc
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConfigError(f"operator file malformed: {exc}") from exc
        label = "files"
    else:
        spec = _chain_spec(cfg)
        n_exc = _sector(cfg, spec)
        h0 = build_h0(spec, n_exc)
        h1 = build_h1(spec, n_exc)
        label = f"N{spec.n_spins}_n{n_exc}"

    tol = float(cfg.get("tol", 1e-8))
    reg = strongly_regular_connected_check(h0, h1, tol=tol)
    report = {
        "subspace_dim": h0.dim,
        "regularity": {
            "effectively_strongly_regular": reg.effectively_strongly_regular,
            "connected": reg.connected,
            "controllable_by_criterion": reg.controllable_by_criterion,
            "witness": reg.witness,
            "eigenvalues": reg.eigenvalues.tolist(),
        },
        "provenance": _provenance(cfg),
    }
    max_dim = int(cfg.get("max_lie_dim", 20))
    if h0.dim <= max_dim:
        lie = dynamical_lie_dimension(h0, h1)
        report["lie_algebra"] = {
            "dimension": lie.lie_dimension,
            "full_dimension": lie.full_dimension,
            "closed": lie.closed,
            "controllable": lie.controllable,
            "growth": list(lie.growth),
        }
    else:
        report["lie_algebra"] = None
        report["notice"] = (
            f"subspace dim {h0.dim} exceeds max_lie_dim={max_dim}; "
            "Lie-algebra computation skipped"
        )
    outdir = cfg.get("out", ".")
    name = f"controllability_{label}.json"
    hashes = _write_artifacts(outdir, {name: json.dumps(report, indent=2, sort_keys=True)})
    _write_manifest(outdir, cfg, hashes)
    print(
        f"controllability: criterion={reg.controllable_by_criterion} "
        + (f"lie_dim={report['lie_algebra']['dimension']}" if report.get("lie_algebra") else "lie skipped")
    )
    return EXIT_OK


def cmd_min_time(cfg: dict) -> int:
    if "n_list" not in cfg:
        raise ConfigError("n_list is required")
    n_list = [int(n) for n in cfg["n_list"]]
    if not n_list:
        raise ConfigError("n_list is empty")
    threshold = float(cfg.get("threshold", 0.99))
    steps = int(cfg.get("steps", 64))
    restarts = int(cfg.get("restarts", 3))
    seed = _materialize_seed(cfg)
    grids = cfg.get("grids", {})
    grid_points = int(cfg.get("grid_points", 7))

    outdir = cfg.get("out", ".")
    t_cs = {}
    texts = {}
    for n in n_list:
        spec = ChainSpec(n, float(cfg.get("coupling", 1.0)))
        if str(n) in grids:
            grid = _parse_grid(grids[str(n)])
        elif n in grids:
            grid = _parse_grid(grids[n])
        else:
            center = recommended_horizon(n, margin=1.0)
            grid = np.linspace(0.55 * center, 1.45 * center, grid_points).tolist()
        problem = ground_problem(spec)
        scan = min_time_scan(
            problem, threshold, grid, restarts=restarts, rng_seed=seed, steps=steps
        )
        t_cs[n] = scan.t_c
        lines = ["t_f,best_fidelity"] + [
            f"{t:.12g},{f:.12g}" for t, f in scan.table()
        ]
        texts[f"min_time_N{n}.csv"] = "\n".join(lines) + "\n"
        print(f"min-time: N={n} T_C={scan.t_c}")

    summary = {
        "threshold": threshold,
        "t_c": {str(n): t_cs[n] for n in n_list},
        "provenance": _provenance(cfg),
    }
    reached = [(n, t) for n, t in t_cs.items() if t is not None]
    if len(reached) >= 2:
        ns = np.array([n for n, _ in reached], dtype=float)
        ts = np.array([t for _, t in reached])
        coef = np.polyfit(ns ** 2, ts, 1)
        fit = np.polyval(coef, ns ** 2)
        ss_res = float(np.sum((ts - fit) ** 2))
        ss_tot = float(np.sum((ts - ts.mean()) ** 2))
        summary["quadratic_fit"] = {
            "slope": float(coef[0]),
            "intercept": float(coef[1]),
            "r_squared": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
        }
    else:
        summary["quadratic_fit"] = None
        summary["notice"] = "fit skipped: fewer than two chain lengths reached threshold"
    texts["min_time_summary.json"] = json.dumps(summary, indent=2, sort_keys=True)
    hashes = _write_artifacts(outdir, texts)
    _write_manifest(outdir, cfg, hashes)
    return EXIT_OK


def cmd_export_operators(cfg: dict) -> int:
    """Write the drift/control pair as operator JSON (controllability input)."""
    spec = _chain_spec(cfg)
    n_exc = _sector(cfg, spec)
    _materialize_seed(cfg)
    outdir = cfg.get("out", ".")
    hashes = _write_artifacts(outdir, {
        f"h0_N{spec.n_spins}_n{n_exc}.json": operator_to_json(build_h0(spec, n_exc)),
        f"h1_N{spec.n_spins}_n{n_exc}.json": operator_to_json(build_h1(spec, n_exc)),
    })
    _write_manifest(outdir, cfg, hashes)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON config file; flags override its keys")
    parser.add_argument("--n-spins", dest="n_spins", type=int)
    parser.add_argument("--coupling", type=float)
    parser.add_argument("--n-exc", dest="n_exc", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--out", help="output directory (default .)")
    parser.add_argument("--format", choices=["csv", "json", "both"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinctrl",
        description="Optimal single-spin control of antiferromagnetic Heisenberg chains",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="optimize a pulse for singlet generation")
    _add_common(p)
    p.add_argument("--steps", type=int)
    p.add_argument("--t-f", dest="t_f", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--bound", type=float)
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--grad-tol", dest="grad_tol", type=float)
    p.add_argument("--value-tol", dest="value_tol", type=float)
    p.add_argument("--target-fidelity", dest="target_fidelity", type=float)
    p.add_argument("--fidelity-floor", dest="fidelity_floor", type=float)
    p.add_argument("--initial", choices=["ground", "thermal"])
    p.add_argument("--kt-over-j", dest="kt_over_j", type=float)
    p.add_argument("--name")

    p = sub.add_parser("evolve", help="propagate a pulse and write the trajectory")
    _add_common(p)
    p.add_argument("--pulse", help="pulse JSON file")
    p.add_argument("--max-tracked", dest="max_tracked", type=int)
    p.add_argument("--name")

    for kind in ("thermal", "leakage", "disorder", "dephasing"):
        p = sub.add_parser(f"sweep-{kind}", help=f"{kind} robustness sweep")
        _add_common(p)
        p.add_argument("--pulse")
        p.add_argument("--grid", help='JSON list or {"start":..,"stop":..,"num":..}')
        if kind in ("leakage", "disorder"):
            p.add_argument("--reoptimize", action="store_const", const=True)
            p.add_argument("--restarts", type=int)
        if kind == "disorder":
            p.add_argument("--samples", type=int)
        if kind == "dephasing":
            p.add_argument("--model", choices=["end_spins", "all_spins"])

    p = sub.add_parser("controllability", help="subspace controllability reports")
    _add_common(p)
    p.add_argument("--h0-file", dest="h0_file")
    p.add_argument("--h1-file", dest="h1_file")
    p.add_argument("--max-lie-dim", dest="max_lie_dim", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("min-time", help="minimum-horizon scan over chain lengths")
    _add_common(p)
    p.add_argument("--n-list", dest="n_list", type=int, nargs="+")
    p.add_argument("--threshold", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--grid-points", dest="grid_points", type=int)

    p = sub.add_parser("export-operators", help="write drift/control operator JSON")
    _add_common(p)
    return parser


_HANDLERS = {
    "optimize": cmd_optimize,
    "evolve": cmd_evolve,
    "sweep-thermal": lambda cfg: cmd_sweep("thermal", cfg),
    "sweep-leakage": lambda cfg: cmd_sweep("leakage", cfg),
    "sweep-disorder": lambda cfg: cmd_sweep("disorder", cfg),
    "sweep-dephasing": lambda cfg: cmd_sweep("dephasing", cfg),
    "controllability": cmd_controllability,
    "min-time": cmd_min_time,
    "export-operators": cmd_export_operators,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    keys = _COMMAND_KEYS.get(command, _COMMON_KEYS) | {"name"}
    try:
        cfg = _load_config(args.config, command) if command in _COMMAND_KEYS else {}
        cfg = _merge(cfg, args, keys)
        if cfg.get("jobs") is not None and int(cfg["jobs"]) < 1:
            raise ConfigError("jobs must be >= 1")
        return _HANDLERS[command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (np.linalg.LinAlgError, StepRefinementError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
