"""Report serialization: ranking CSV/JSON, trajectory export, run manifest.

Typographic conventions follow the ranking-table style: percentages with
four significant digits in the CSV, raw full-precision values in the
JSON.  Every emitted report embeds its run manifest: config echo, code
version, seed, rejection and clamp counters.  Wall-clock duration and
worker count are deliberately not part of any file: reports must be
byte-identical for identical (inputs, seed) regardless of scheduling, so
timing goes to standard output only.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ._version import __version__
from .risk import RankingReport
from .simulation import Trajectory

CSV_HEADER = (
    "priority_rank",
    "element",
    "breakers",
    "r_a_percent",
    "stderr_percent",
    "n_unstable",
    "n_lg",
    "n_llg",
    "n_ll",
    "n_lll",
)

PLACEHOLDER = "-"


@dataclass(frozen=True)
class RunManifest:
    """Run metadata block embedded in every report."""

    code_version: str
    seed: int
    config: dict
    rejected_by_element: dict[str, int]
    n_load_clamps: int
    n_fct_clamps: int

    def to_dict(self) -> dict:
        return asdict(self)


def build_manifest(report: RankingReport) -> RunManifest:
    return RunManifest(
        code_version=__version__,
        seed=report.config.seed,
        config=report.config.to_dict(),
        rejected_by_element=dict(report.rejected_by_element),
        n_load_clamps=report.n_load_clamps,
        n_fct_clamps=report.n_fct_clamps,
    )


def format_percent(value: float) -> str:
    """Fraction rendered as percent with 4 significant digits."""
    return f"{100.0 * value:.4g}"


def render_report_csv(report: RankingReport) -> str:
    """Ranked rows, then excluded elements with placeholder cells, then
    the manifest as a trailing comment line."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for e in report.entries:
        writer.writerow(
            (
                e.priority_rank,
                e.element,
                ";".join(e.breakers) if e.breakers else PLACEHOLDER,
                format_percent(e.r_a),
                format_percent(e.stderr),
                e.n_unstable,
                e.n_unstable_lg,
                e.n_unstable_llg,
                e.n_unstable_ll,
                e.n_unstable_lll,
            )
        )
    for x in report.excluded:
        writer.writerow(
            (
                PLACEHOLDER,
                x.element,
                ";".join(x.breakers) if x.breakers else PLACEHOLDER,
            )
            + (PLACEHOLDER,) * 7
        )
    manifest = json.dumps(
        build_manifest(report).to_dict(), sort_keys=True, separators=(",", ":")
    )
    buf.write(f"# manifest={manifest}\n")
    return buf.getvalue()


def render_report_json(report: RankingReport) -> str:
    payload = {
        "mode": report.mode,
        "entries": [asdict(e) for e in report.entries],
        "excluded": [
            {
                "element": x.element,
                "breakers": list(x.breakers),
                "n_rejected": x.n_rejected,
                "reasons": dict(x.reasons),
            }
            for x in report.excluded
        ],
        "manifest": build_manifest(report).to_dict(),
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def emit_report(report: RankingReport, out_stem: "str | Path") -> tuple[Path, Path]:
    """Write ``<out>.csv`` and ``<out>.json``; returns the two paths."""
    stem = Path(out_stem)
    csv_path = stem.with_suffix(".csv")
    json_path = stem.with_suffix(".json")
    csv_path.write_text(render_report_csv(report))
    json_path.write_text(render_report_json(report))
    return csv_path, json_path


@dataclass(frozen=True)
class ParsedReportRow:
    priority_rank: "int | None"
    element: str
    breakers: tuple[str, ...]
    r_a_percent: "float | None"
    stderr_percent: "float | None"
    n_unstable: "int | None"
    n_lg: "int | None"
    n_llg: "int | None"
    n_ll: "int | None"
    n_lll: "int | None"


def parse_report_csv(path: "str | Path") -> tuple[list[ParsedReportRow], dict]:
    """Read back an emitted CSV: data rows plus the embedded manifest."""
    rows: list[ParsedReportRow] = []
    manifest: dict = {}
    with open(path, newline="") as f:
        lines = f.read().splitlines()
    if not lines or tuple(lines[0].split(",")) != CSV_HEADER:
        raise ValueError(f"{path}: not a ranking report (bad header)")
    for line in lines[1:]:
        if line.startswith("# manifest="):
            manifest = json.loads(line[len("# manifest=") :])
            continue
        if not line or line.startswith("#"):
            continue
        cells = next(csv.reader([line]))

        def opt_int(c: str) -> "int | None":
            return None if c == PLACEHOLDER else int(c)

        def opt_float(c: str) -> "float | None":
            return None if c == PLACEHOLDER else float(c)

        rows.append(
            ParsedReportRow(
                priority_rank=opt_int(cells[0]),
                element=cells[1],
                breakers=() if cells[2] == PLACEHOLDER else tuple(cells[2].split(";")),
                r_a_percent=opt_float(cells[3]),
                stderr_percent=opt_float(cells[4]),
                n_unstable=opt_int(cells[5]),
                n_lg=opt_int(cells[6]),
                n_llg=opt_int(cells[7]),
                n_ll=opt_int(cells[8]),
                n_lll=opt_int(cells[9]),
            )
        )
    return rows, manifest


def render_top5(report: RankingReport) -> str:
    """Small fixed-width table of the top five ranked elements."""
    head = f"{'rank':>4}  {'element':<20} {'R_A %':>12} {'stderr %':>12} {'unstable':>8}"
    lines = [head, "-" * len(head)]
    for e in report.entries[:5]:
        lines.append(
            f"{e.priority_rank:>4}  {e.element:<20} {format_percent(e.r_a):>12} "
            f"{format_percent(e.stderr):>12} {e.n_unstable:>8}"
        )
    return "\n".join(lines)


def emit_trajectory(trajectory: Trajectory, path: "str | Path") -> Path:
    """Angle time series as CSV for external plotting.

    One column per machine (degrees), trailing comment lines carrying
    delta_max and the verdict.  Requires a recorded trajectory.
    """
    if trajectory.times_s is None or trajectory.delta_rad is None:
        raise ValueError("trajectory was run without recording; nothing to export")
    out = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ("t_s",) + tuple(f"delta_deg_{b:04d}" for b in trajectory.machine_buses)
    )
    deg = np.degrees(trajectory.delta_rad)
    for t, row in zip(trajectory.times_s, deg):
        writer.writerow((f"{t:.9g}",) + tuple(f"{v:.9g}" for v in row))
    buf.write(f"# delta_max_deg={trajectory.delta_max_deg:.9g}\n")
    buf.write(f"# unstable={'true' if trajectory.unstable else 'false'}\n")
    out.write_text(buf.getvalue())
    return out
