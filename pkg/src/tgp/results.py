"""On-disk formats: run records (JSON lines), effort CSV + JSON summary,
solution text and netlists."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

from .engine import RunRecord
from .metrics import EffortReport

EFFORT_HEADER = ("generation", "ns", "p", "r", "effort")


class RecordsError(ValueError):
    """A records file could not be parsed."""


def record_to_json(rec: RunRecord) -> str:
    obj = {
        "run": rec.run_index,
        "seed": rec.seed_used,
        "solved_at": rec.solved_at,
        "best_fitness": list(rec.best_fitness_per_generation),
        "solution": rec.solution,
    }
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def record_from_json(line: str) -> RunRecord:
    try:
        obj = json.loads(line)
        solved = obj["solved_at"]
        best = obj["best_fitness"]
        if solved is not None and (not isinstance(solved, int) or solved < 0):
            raise RecordsError(f"bad solved_at {solved!r}")
        if not isinstance(best, list) or not all(isinstance(b, int) for b in best):
            raise RecordsError("best_fitness must be a list of integers")
        return RunRecord(
            solved_at=solved,
            best_fitness_per_generation=tuple(best),
            seed_used=int(obj["seed"]),
            run_index=int(obj["run"]),
            solution=obj.get("solution"),
        )
    except RecordsError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise RecordsError(f"malformed record: {exc}") from exc


def dumps_records(records: Iterable[RunRecord]) -> str:
    return "".join(record_to_json(r) + "\n" for r in records)


def loads_records(text: str) -> list[RunRecord]:
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(record_from_json(line))
        except RecordsError as exc:
            raise RecordsError(f"line {n}: {exc}") from None
    return out


def write_records(path: Path, records: Sequence[RunRecord]) -> None:
    Path(path).write_text(dumps_records(records), encoding="utf-8")


def read_records(path: Path) -> list[RunRecord]:
    return loads_records(Path(path).read_text(encoding="utf-8"))


def _cell(v) -> str:
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def effort_csv(report: EffortReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EFFORT_HEADER)
    for row in report.rows:
        w.writerow([_cell(row.generation), _cell(row.ns), _cell(row.p),
                    _cell(row.r), _cell(row.effort)])
    return buf.getvalue()


def summary_dict(report: EffortReport) -> dict:
    best = report.min_effort
    return {
        "min_effort": None if best is None else best[0],
        "at_generation": None if best is None else best[1],
        "z": report.z,
        "m": report.pop_size,
        "n_total": report.n_total,
    }


def write_report(out_dir: Path, report: EffortReport) -> None:
    out_dir = Path(out_dir)
    (out_dir / "effort.csv").write_text(effort_csv(report), encoding="utf-8")
    (out_dir / "summary.json").write_text(
        json.dumps(summary_dict(report), indent=2) + "\n", encoding="utf-8"
    )


def write_solutions(out_dir: Path, records: Sequence[RunRecord]) -> int:
    """Write rendered expressions and netlists of solved, traced runs."""
    solved = [r for r in records if r.solution is not None]
    lines = [f"run {r.run_index} generation {r.solved_at}: {r.solution}\n" for r in solved]
    nets = [
        {"run": r.run_index, "solved_at": r.solved_at, "netlist": r.netlist}
        for r in solved
    ]
    out_dir = Path(out_dir)
    (out_dir / "solutions.txt").write_text("".join(lines), encoding="utf-8")
    (out_dir / "solutions.json").write_text(
        json.dumps(nets, separators=(",", ":")) + "\n", encoding="utf-8"
    )
    return len(solved)
