"""Batch experiment harness.

    maxavg <command> --config path.json [--set key=value]... [--out DIR]

Commands: region | eval | search | probe | tf | calibrate | report.
Each run writes report.json (and report.csv / grid.csv where applicable)
atomically; identical config plus identical fixtures give byte-identical
outputs, for any MAXAVG_THREADS.  Exit codes: 0 success, 2 config error,
3 check failure; errors go to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .jsonio import dump_json, format_float, format_rational, load_json, write_atomic
from .regions import (
    AveragingMatrix,
    ExponentTuple,
    complexity,
    complexity_threshold,
    extend_matrix,
    nondegeneracy_rank,
    region_contains,
    vertex_set,
)
from .signals import Signal


class ConfigError(Exception):
    pass


class CheckFailure(Exception):
    pass


def _set_path(config: dict, dotted: str, raw: str) -> None:
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    keys = dotted.split(".")
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot descend into non-object at {key!r}")
    node[keys[-1]] = value


def _load_config(args) -> dict:
    try:
        config = load_json(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}")
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    for override in args.set or []:
        if "=" not in override:
            raise ConfigError(f"--set expects key=value, got {override!r}")
        dotted, raw = override.split("=", 1)
        _set_path(config, dotted, raw)
    return config


def _provenance(config: dict, fixtures_version=None) -> dict:
    return {
        "package_version": __version__,
        "config": copy.deepcopy(config),
        "fixtures_version": fixtures_version,
    }


def _matrix(config) -> AveragingMatrix:
    try:
        return AveragingMatrix.from_json(config["matrix"])
    except KeyError:
        raise ConfigError("config needs a 'matrix' object")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad matrix: {exc}")


def _signals(config) -> list[Signal]:
    out = []
    for entry in config.get("signals", []):
        if isinstance(entry, dict):
            out.append(Signal.from_json(entry))
        elif isinstance(entry, str):
            out.append(Signal.from_text(entry))
        else:
            raise ConfigError(f"bad signal entry: {entry!r}")
    return out


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float):
                cells.append(format_float(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    write_atomic(path, "\n".join(lines) + "\n")


def cmd_region(config: dict, out_dir: str) -> int:
    a = _matrix(config)
    extended = extend_matrix(a)
    report = {
        "command": "region",
        "provenance": _provenance(config),
        "rank_star": nondegeneracy_rank(a),
        "rank_star_extended": nondegeneracy_rank(extended),
        "complexity": complexity(a),
        "halfspace_threshold": format_rational(complexity_threshold(a)),
    }
    vertex_sets = {}
    for eps_raw in config.get("epsilons", []):
        eps = Fraction(str(eps_raw))
        vs = vertex_set(a, eps)
        vertex_sets[format_rational(eps)] = sorted(
            [format_rational(c) for c in v] for v in vs.vertices
        )
    report["vertex_sets"] = vertex_sets
    resolution = int(config.get("resolution", 1024))
    verdicts = []
    for point in config.get("points", []):
        x = ExponentTuple.from_values(point)
        verdict = region_contains(a, x, resolution)
        verdicts.append(
            {
                "point": [format_rational(c) for c in x.reciprocals],
                "dual": format_rational(x.dual),
                **verdict.to_json(),
            }
        )
    report["verdicts"] = verdicts
    grid_step = config.get("grid_step")
    if grid_step is not None:
        step = Fraction(str(grid_step))
        if a.rows != 2:
            raise ConfigError("membership grids are emitted for two-exponent matrices")
        count = int(1 / step)
        rows = []
        for i in range(count):
            for j in range(count):
                x = ExponentTuple((i * step, j * step))
                verdict = region_contains(a, x, resolution)
                rows.append(
                    [
                        format_rational(i * step),
                        format_rational(j * step),
                        1 if verdict.inside else 0,
                        format_rational(verdict.witness_epsilon)
                        if verdict.witness_epsilon is not None
                        else "",
                    ]
                )
        _write_csv(
            os.path.join(out_dir, "grid.csv"),
            ["x1", "x2", "inside", "witness_epsilon"],
            rows,
        )
        report["grid_points"] = len(rows)
    dump_json(report, os.path.join(out_dir, "report.json"))
    return 0


def cmd_eval(config: dict, out_dir: str) -> int:
    from .averaging import maximal_at, maximal_operator

    a = _matrix(config)
    signals = _signals(config)
    if len(signals) != a.rows:
        raise ConfigError(f"need {a.rows} signals, got {len(signals)}")
    window = config.get("window")
    if not window or len(window) != 2:
        raise ConfigError("config needs 'window': [lo, hi]")
    lo, hi = int(window[0]), int(window[1])
    rows = []
    for x in range(lo, hi + 1):
        value, arg_n = maximal_at(a, signals, x)
        rows.append([x, float(value), int(arg_n)])
    _write_csv(os.path.join(out_dir, "report.csv"), ["x", "value", "argmax_N"], rows)
    report = {
        "command": "eval",
        "provenance": _provenance(config),
        "window": [lo, hi],
        "max_value": format_float(max((r[1] for r in rows), default=0.0)),
    }
    dump_json(report, os.path.join(out_dir, "report.json"))
    return 0


def cmd_search(config: dict, out_dir: str) -> int:
    from .search import norm_search

    a = _matrix(config)
    exponents = ExponentTuple.from_values(config.get("exponents", ["1/2"] * a.rows))
    radius = int(config.get("radius", 32))
    trials = int(config.get("trials", 50))
    seed = int(config.get("seed", 0))
    report_obj = norm_search(a, exponents, radius, trials, seed)
    rows = [
        [seed, t, float(r), " ".join(format_rational(v) for v in exponents.reciprocals)]
        for t, r in enumerate(report_obj.trial_ratios)
    ]
    _write_csv(
        os.path.join(out_dir, "report.csv"), ["seed", "trial", "ratio", "p_vector"], rows
    )
    report = {
        "command": "search",
        "provenance": _provenance(config),
        "result": report_obj.to_json(),
    }
    dump_json(report, os.path.join(out_dir, "report.json"))
    return 0


def cmd_probe(config: dict, out_dir: str) -> int:
    import numpy as np

    from .ergodic import CubeSpec, FiniteSystem, convergence_probe

    size = int(config.get("system_size", 31))
    system = FiniteSystem(size)
    schedule = [int(v) for v in config.get("L_schedule", [15, 155, 1550])]
    seed = int(config.get("seed", 0))
    instances = int(config.get("instances", 1))
    if "cube_m" in config:
        spec = CubeSpec(int(config["cube_m"]))
        n_functions = len(spec.index_set)
    else:
        spec = _matrix(config)
        n_functions = spec.rows
    rows = []
    for instance in range(instances):
        rng = np.random.default_rng(seed + instance)
        functions = [rng.standard_normal(size).tolist() for _ in range(n_functions)]
        deviations = convergence_probe(system, functions, spec, schedule)
        for L, dev in zip(schedule, deviations):
            rows.append([instance, L, float(dev)])
    _write_csv(os.path.join(out_dir, "report.csv"), ["instance", "L", "deviation"], rows)
    report = {
        "command": "probe",
        "provenance": _provenance(config),
        "system_size": size,
        "L_schedule": schedule,
        "instances": instances,
    }
    dump_json(report, os.path.join(out_dir, "report.json"))
    return 0


def cmd_calibrate(config: dict, out_dir: str) -> int:
    from .fixtures import calibrate, write_fixtures

    seeds = [int(s) for s in config.get("seeds", list(range(1, 21)))]
    out_path = config.get("out", os.path.join(out_dir, "fixtures", "constants.json"))
    fixtures = calibrate(seeds)
    write_fixtures(fixtures, out_path)
    report = {
        "command": "calibrate",
        "provenance": _provenance(config, fixtures_version=fixtures["version"]),
        "fixtures_path": out_path,
        "checks": sorted(fixtures["checks"]),
    }
    dump_json(report, os.path.join(out_dir, "report.json"))
    return 0


def cmd_tf(config: dict, out_dir: str) -> int:
    from .fixtures import load_fixtures, run_checks

    fixtures_path = config.get("fixtures", "fixtures/constants.json")
    try:
        fixtures = load_fixtures(fixtures_path)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc))
    seeds = [int(s) for s in config.get("seeds", [1])]
    rows = run_checks(seeds, fixtures)
    csv_rows = [
        [
            r["check"],
            r["seed"],
            r["stat"] if isinstance(r["stat"], float) else json.dumps(r["stat"]),
            json.dumps(r["bound"]) if isinstance(r["bound"], list) else r["bound"],
            r["kind"],
            int(r["pass"]),
        ]
        for r in rows
    ]
    _write_csv(
        os.path.join(out_dir, "report.csv"),
        ["check", "seed", "stat", "bound", "kind", "pass"],
        csv_rows,
    )
    failures = [r for r in rows if not r["pass"]]
    report = {
        "command": "tf",
        "provenance": _provenance(config, fixtures_version=fixtures["version"]),
        "checks_run": len(rows),
        "failures": len(failures),
    }
    dump_json(report, os.path.join(out_dir, "report.json"))
    if failures:
        raise CheckFailure(f"{len(failures)} of {len(rows)} checks failed")
    return 0


def cmd_report(config: dict, out_dir: str) -> int:
    path = config.get("path")
    if not path:
        raise ConfigError("config needs 'path' pointing at a report.json")
    try:
        report = load_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report: {exc}")
    for key in ("command", "provenance"):
        if key not in report:
            raise CheckFailure(f"report is missing the {key!r} field")
    summary = {
        "command": "report",
        "provenance": _provenance(config),
        "validated": path,
        "reported_command": report["command"],
    }
    dump_json(summary, os.path.join(out_dir, "report.json"))
    return 0


_COMMANDS = {
    "region": cmd_region,
    "eval": cmd_eval,
    "search": cmd_search,
    "probe": cmd_probe,
    "tf": cmd_tf,
    "calibrate": cmd_calibrate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="maxavg", description=__doc__)
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config entry (dotted path, JSON value)",
    )
    parser.add_argument("--out", default=".", help="output directory")
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.command](config, args.out)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(json.dumps({"error": "check", "message": str(exc)}), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
