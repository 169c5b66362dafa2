"""Command-line harness: ``tgp run``, ``tgp report`` and ``tgp sweep``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

from .core import GATE_SETS, ContractError
from .engine import RunConfig, RunRecord, run_many
from .metrics import DEFAULT_Z, effort_report
from .parity import ParityProblem
from .results import RecordsError, read_records, write_records, write_report, write_solutions

SWEEP_HEADER = (
    "problem", "pop_size", "generations", "runs", "solved",
    "min_effort", "at_generation", "mean_solve_seconds",
)


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    k: int
    pop_size: int
    generations: int
    runs: int = 100


PRESETS = {
    p.name: p
    for p in (
        ExperimentPreset("even-3", 3, 50, 200),
        ExperimentPreset("even-4", 4, 100, 500),
        ExperimentPreset("even-5", 5, 500, 1000),
        ExperimentPreset("even-6", 6, 1000, 2500),
        ExperimentPreset("even-7", 7, 2000, 5000),
        ExperimentPreset("even-8", 8, 5000, 10000, runs=10),
    )
}


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("expected a probability in [0, 1]")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _add_evolution_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--runs", type=_positive, help="independent runs (default: preset or 100)")
    p.add_argument("--p-insert", type=_probability, default=0.05)
    p.add_argument("--tournament", type=_positive, default=2)
    p.add_argument("--gates", choices=sorted(GATE_SETS), default="koza4")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--z", type=float, default=DEFAULT_Z)
    p.add_argument("--trace", action="store_true", help="record programs and export solutions")
    p.add_argument("--stop-on-solve", action="store_true")
    p.add_argument("--parsimony", action="store_true", help="break fitness ties by gate count")
    p.add_argument("--no-elitism", dest="elitism", action="store_false",
                   help="do not carry the best individual into the next generation")
    p.add_argument("--jobs", type=_positive, default=None,
                   help="worker processes (default: available CPUs)")
    p.add_argument("--out", type=Path, default=Path("results"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tgp", description="Traceless GP on even-parity problems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment and write records + effort report")
    p_run.add_argument("--preset", choices=sorted(PRESETS))
    p_run.add_argument("--k", type=_positive)
    p_run.add_argument("--pop", type=_positive)
    p_run.add_argument("--gens", type=_positive)
    _add_evolution_flags(p_run)

    p_rep = sub.add_parser("report", help="recompute the effort report from a records file")
    p_rep.add_argument("records", type=Path, help="records.jsonl or a run output directory")
    p_rep.add_argument("--z", type=float, default=DEFAULT_Z)
    p_rep.add_argument("--pop", type=_positive, help="population size (default: from config.json)")
    p_rep.add_argument("--gens", type=_positive, help="generations (default: from config.json)")
    p_rep.add_argument("--out", type=Path, help="output directory (default: next to records)")

    p_sw = sub.add_parser("sweep", help="run presets even-3 upward and summarise")
    p_sw.add_argument("--through", choices=sorted(PRESETS), default="even-5")
    _add_evolution_flags(p_sw)
    return parser


def _config(args, k, pop, gens) -> RunConfig:
    return RunConfig(
        k=k, pop_size=pop, generations=gens, p_insert=args.p_insert,
        tournament_size=args.tournament, gate_set=args.gates, seed=args.seed,
        tracing=args.trace, parsimony=args.parsimony, elitism=args.elitism,
        stop_on_solve=args.stop_on_solve,
    )


def _config_json(cfg: RunConfig, runs: int, z: float, preset: str | None) -> dict:
    d = asdict(cfg)
    d["gate_set"] = cfg.gate_set.name
    d.update(runs=runs, z=z, preset=preset)
    return d


def _check_z(parser, z):
    if not 0.0 < z < 1.0:
        parser.error("--z must be in (0, 1)")


def execute(cfg: RunConfig, runs: int, z: float, out: Path, jobs: int | None,
            preset: str | None = None) -> list[RunRecord]:
    """Run an experiment and write every output file into ``out``."""
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    records = run_many(cfg, ParityProblem.even(cfg.k), runs, jobs)
    wall = time.perf_counter() - t0

    out.mkdir(parents=True, exist_ok=True)
    write_records(out / "records.jsonl", records)
    (out / "config.json").write_text(
        json.dumps(_config_json(cfg, runs, z, preset), indent=2) + "\n", encoding="utf-8"
    )
    write_report(out, effort_report(records, cfg.pop_size, cfg.generations, z))
    if cfg.tracing:
        write_solutions(out, records)
    solve_times = [r.solve_seconds for r in records if r.solve_seconds is not None]
    meta = {
        "started_utc": started.isoformat(),
        "wall_seconds": wall,
        "jobs": jobs,
        "mean_solve_seconds": sum(solve_times) / len(solve_times) if solve_times else None,
        "run_seconds": [r.elapsed_seconds for r in records],
        "solve_seconds": [r.solve_seconds for r in records],
    }
    (out / "metadata.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return records


def cmd_run(args, parser) -> int:
    explicit = [args.k, args.pop, args.gens]
    if args.preset and any(v is not None for v in explicit):
        parser.error("--preset cannot be combined with --k/--pop/--gens")
    if args.preset:
        pre = PRESETS[args.preset]
        k, pop, gens, default_runs = pre.k, pre.pop_size, pre.generations, pre.runs
    elif all(v is not None for v in explicit):
        k, pop, gens = explicit
        default_runs = 100
    else:
        parser.error("give --preset or all of --k, --pop, --gens")
    _check_z(parser, args.z)
    try:
        cfg = _config(args, k, pop, gens)
    except ContractError as exc:
        parser.error(str(exc))
    runs = args.runs or default_runs
    records = execute(cfg, runs, args.z, args.out, args.jobs, args.preset)
    solved = sum(r.solved_at is not None for r in records)
    print(f"{solved}/{runs} runs solved; results in {args.out}")
    return 0


def _resolve_records(path: Path) -> Path:
    return path / "records.jsonl" if path.is_dir() else path


def cmd_report(args, parser) -> int:
    _check_z(parser, args.z)
    rec_path = _resolve_records(args.records)
    records = read_records(rec_path)
    if not records:
        raise RecordsError(f"{rec_path} holds no records")
    pop, gens = args.pop, args.gens
    cfg_path = rec_path.parent / "config.json"
    if (pop is None or gens is None) and cfg_path.exists():
        saved = json.loads(cfg_path.read_text(encoding="utf-8"))
        pop = pop or saved["pop_size"]
        gens = gens or saved["generations"]
    if pop is None or gens is None:
        parser.error("no config.json next to the records; pass --pop and --gens")
    report = effort_report(records, pop, gens, args.z)
    out = args.out or rec_path.parent
    out.mkdir(parents=True, exist_ok=True)
    write_report(out, report)
    best = report.min_effort
    print("no successful runs" if best is None else f"minimum effort {best[0]} at generation {best[1]}")
    return 0


def cmd_sweep(args, parser) -> int:
    _check_z(parser, args.z)
    names = sorted(PRESETS, key=lambda n: PRESETS[n].k)
    names = names[: names.index(args.through) + 1]
    rows = []
    for name in names:
        pre = PRESETS[name]
        cfg = _config(args, pre.k, pre.pop_size, pre.generations)
        runs = args.runs or pre.runs
        records = execute(cfg, runs, args.z, args.out / name, args.jobs, name)
        report = effort_report(records, pre.pop_size, pre.generations, args.z)
        times = [r.solve_seconds for r in records if r.solve_seconds is not None]
        best = report.min_effort
        rows.append({
            "problem": name,
            "pop_size": pre.pop_size,
            "generations": pre.generations,
            "runs": runs,
            "solved": sum(r.solved_at is not None for r in records),
            "min_effort": "" if best is None else best[0],
            "at_generation": "" if best is None else best[1],
            "mean_solve_seconds": f"{sum(times) / len(times):.4f}" if times else "",
        })
        print(", ".join(f"{k}={v}" for k, v in rows[-1].items()), flush=True)
    with open(args.out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_HEADER, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return 0


COMMANDS = {"run": cmd_run, "report": cmd_report, "sweep": cmd_sweep}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser)
    except RecordsError as exc:
        print(f"tgp: cannot parse records: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"tgp: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
