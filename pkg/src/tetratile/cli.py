"""Command-line driver: analyze single tetrahedra, reproduce the all-2pi/n
table, minimize the Goldberg families, and run the elimination campaign.

Every command emits a JSON report (text/CSV renderings are derived from the
same payload); campaign runs persist per-case results for resumability.

Exit codes: 0 success, 2 input or geometry error, 3 unresolved proof gap,
4 interval budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import casework, dihunt, goldberg, lengraph, rigor, taxonomy
from .geom import (
    AngleSextuple,
    EdgeSextuple,
    GeometryError,
    SOMMERVILLE_1_NORMALIZED_AREA,
    dihedral_angles,
    edges_from_angles,
    normalized_area,
    validate_edges,
)

__all__ = ["main", "RunConfig", "Report", "build_report", "render_text"]

SCHEMA_TAG = "tetratile-report-v1"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PROOF_GAP = 3
EXIT_BUDGET = 4


@dataclass
class RunConfig:
    width_floor: float = 1e-4
    budget: int = 10 ** 6
    workers: int = 1
    out_dir: Path = field(default_factory=lambda: Path(
        os.environ.get("TETRATILE_OUT", "tetratile-out")))
    formats: tuple = ("json", "text")

    def __post_init__(self):
        if self.width_floor <= 0 or self.budget <= 0 or self.workers <= 0:
            raise ValueError("width_floor, budget and workers must be positive")
        unknown = set(self.formats) - {"json", "text", "csv"}
        if unknown:
            raise ValueError(f"unknown report formats: {sorted(unknown)}")
        self.out_dir = Path(self.out_dir)

    def casework_config(self) -> casework.CaseworkConfig:
        return casework.CaseworkConfig(width_floor=self.width_floor,
                                       budget=self.budget, workers=self.workers)


@dataclass
class Report:
    command: str
    inputs: dict
    result: dict
    schema: str = SCHEMA_TAG
    wall_time_s: float = 0.0

    def to_json(self) -> dict:
        return {
            "schema": self.schema,
            "command": self.command,
            "inputs": self.inputs,
            "result": self.result,
            "timing": {"wall_time_s": round(self.wall_time_s, 3)},
        }


def build_report(command: str, inputs: dict, result: dict, wall: float) -> Report:
    return Report(command=command, inputs=inputs, result=result, wall_time_s=wall)


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------

def parse_angle(token: str) -> tuple:
    """One angle as (radians, exact pi-fraction or None).

    Accepts radians ("1.047"), degrees ("60deg"), or pi fractions ("pi/3",
    "2pi/5").
    """
    token = token.strip().lower()
    if token.endswith("deg"):
        return math.radians(float(token[:-3])), None
    if "pi" in token:
        head, _, tail = token.partition("pi")
        num = Fraction(head) if head not in ("", "+") else Fraction(1)
        if head == "-":
            num = Fraction(-1)
        den = Fraction(1)
        if tail.startswith("/"):
            den = Fraction(tail[1:])
        frac = num / den
        return float(frac) * math.pi, frac
    return float(token), None


def parse_sextuple(text: str):
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if len(parts) != 6:
        raise GeometryError(f"need six comma-separated values, got {len(parts)}")
    return parts


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_analyze(args, config: RunConfig) -> Report:
    t0 = time.perf_counter()
    if args.edges:
        edges = EdgeSextuple.of([float(p) for p in parse_sextuple(args.edges)])
        inputs = {"edges": list(edges)}
    else:
        parsed = [parse_angle(p) for p in parse_sextuple(args.angles)]
        if all(frac is not None for _, frac in parsed):
            angles = AngleSextuple.from_pi_fractions([frac for _, frac in parsed])
        else:
            angles = AngleSextuple.from_radians([v for v, _ in parsed])
        edges = edges_from_angles(angles)
        inputs = {"angles": [v for v, _ in parsed]}
    tet = validate_edges(edges)
    type_id = taxonomy.classify(edges)
    verdict = taxonomy.known_tile_verdict(type_id, edges)
    angles_out = dihedral_angles(tet)
    result = {
        "edges": list(tet.edges),
        "volume": tet.volume,
        "face_areas": list(tet.face_areas),
        "dihedral_angles_rad": list(angles_out.values),
        "dihedral_angles_deg": [math.degrees(v) for v in angles_out.values],
        "normalized_area": normalized_area(tet),
        "type": type_id.letter,
        "group": type_id.group,
        "tile_verdict": verdict.to_json(),
    }
    return build_report("analyze", inputs, result, time.perf_counter() - t0)


def cmd_search2pin(args, config: RunConfig) -> Report:
    t0 = time.perf_counter()
    records = dihunt.search_2pi_over_n()
    cert_dir = config.out_dir / "certificates"
    rows = []
    for r in records:
        row = r.to_json()
        if r.certificate is not None:
            cert_dir.mkdir(parents=True, exist_ok=True)
            path = cert_dir / f"non-tiling-{r.name}.json"
            path.write_text(json.dumps(r.certificate.to_json(), indent=2, sort_keys=True))
            row["certificate_path"] = str(path)
            row.pop("certificate")
        rows.append(row)
    result = {
        "count": len(rows),
        "tiles": sum(1 for r in records if r.verdict == "tiles"),
        "non_tiles": sum(1 for r in records if r.verdict == "does-not-tile"),
        "rows": rows,
    }
    return build_report("search2pin", {}, result, time.perf_counter() - t0)


def cmd_goldberg(args, config: RunConfig) -> Report:
    t0 = time.perf_counter()
    families = [args.family] if args.family else [1, 2, 3]
    rows = []
    for fam in families:
        a_star, area_star = goldberg.minimize_family(fam)
        entry = {"family": fam, "a_star": a_star, "area_star": area_star}
        if fam == 1:
            angles = goldberg.family_angles(goldberg.FamilyParam(1, a_star))
            canon = taxonomy.canonicalize(
                tuple(round(v, 9) for v in angles.values))
            s1 = dihedral_angles(validate_edges(
                EdgeSextuple.of((2, 3 ** 0.5, 3 ** 0.5, 3 ** 0.5, 3 ** 0.5, 2))))
            s1_canon = taxonomy.canonicalize(tuple(round(v, 9) for v in s1.values))
            entry["is_sommerville_1"] = canon == s1_canon
        rows.append(entry)
    best = min(rows, key=lambda r: r["area_star"])
    result = {
        "families": rows,
        "overall_minimum": best,
        "identification": "Sommerville No. 1" if best["family"] == 1 else "unknown",
    }
    return build_report("goldberg", {"family": args.family}, result,
                        time.perf_counter() - t0)


class CaseStore:
    """Directory-backed per-case result store for resumable campaigns."""

    def __init__(self, root: Path):
        self.root = Path(root)
        (self.root / "cases").mkdir(parents=True, exist_ok=True)

    def _path(self, type_name: str, index: int) -> Path:
        return self.root / "cases" / f"{type_name}-{index:04d}.json"

    def load(self, case):
        p = self._path(case.code_type, case.index)
        if p.exists():
            return json.loads(p.read_text())
        return None

    def save(self, type_name: str, index: int, result: dict):
        self._path(type_name, index).write_text(
            json.dumps(result, indent=1, sort_keys=True))


def cmd_casework(args, config: RunConfig) -> Report:
    t0 = time.perf_counter()
    types = [args.type] if args.type else list(casework.CODE_TYPE_ORDER)
    store = None
    if args.resume or args.persist:
        store = CaseStore(config.out_dir / "campaign")
        (config.out_dir / "campaign" / "config.json").write_text(json.dumps({
            "width_floor": config.width_floor, "budget": config.budget,
            "workers": config.workers, "types": types}, indent=2, sort_keys=True))
    gap = None
    try:
        report = casework.run_full_casework(config.casework_config(),
                                            case_store=store, types=types)
    except casework.ProofGap as exc:
        report = exc.report
        gap = str(exc)
    result = {
        "per_type": report["per_type"],
        "total_cases": report["total_cases"],
        "proof_gaps": report["proof_gaps"],
        "verdict": report["verdict"],
    }
    if args.full:
        result["results"] = report["results"]
    out = build_report("casework", {"types": types}, result, time.perf_counter() - t0)
    if store is not None:
        summary = render_text(out)
        (config.out_dir / "campaign" / "summary.txt").write_text(summary)
        (config.out_dir / "campaign" / "report.json").write_text(
            json.dumps(out.to_json(), indent=1, sort_keys=True))
    if gap is not None:
        raise casework.ProofGap(gap, out)
    return out


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def render_text(report: Report) -> str:
    """Pure text rendering of the JSON payload (no extra data)."""
    data = report.to_json()
    lines = [f"# {data['command']}"]
    result = data["result"]
    if data["command"] == "analyze":
        lines.append(f"type ({result['type']})  group: {result['group']}")
        lines.append(f"volume {result['volume']:.9f}  normalized area "
                     f"{result['normalized_area']:.4f}")
        angles = " ".join(f"{v:.3f}" for v in result["dihedral_angles_deg"])
        lines.append(f"dihedrals (deg): {angles}")
        v = result["tile_verdict"]
        tail = f" [{v['name']}]" if v.get("name") else ""
        lines.append(f"tile verdict: {v['verdict']}{tail}")
    elif data["command"] == "search2pin":
        lines.append(f"{result['count']} tetrahedra with all dihedrals 2pi/n "
                     f"({result['tiles']} tiles, {result['non_tiles']} non-tiles)")
        for row in result["rows"]:
            ns = " ".join(f"{n:2d}" for n in row["denominators"])
            lines.append(f"  [{ns}]  area {row['normalized_area']:.2f}  "
                         f"{row['verdict']:14s} {row['name']}")
    elif data["command"] == "goldberg":
        for row in result["families"]:
            extra = ""
            if "is_sommerville_1" in row:
                extra = "  (= Sommerville No. 1)" if row["is_sommerville_1"] else ""
            lines.append(f"  family {row['family']}: a* = {row['a_star']:.6f}  "
                         f"area* = {row['area_star']:.6f}{extra}")
        best = result["overall_minimum"]
        lines.append(f"overall minimum: family {best['family']} area "
                     f"{best['area_star']:.4f} -> {result['identification']}")
    elif data["command"] == "casework":
        lines.append(f"{'type':10s} {'cases':>6s} {'int-elim':>9s} {'no-sol':>7s} "
                     f"{'2pi/n':>6s} {'goldberg':>9s} {'solid':>6s} {'area':>5s} "
                     f"{'manual':>7s}")
        for name, row in result["per_type"].items():
            t = row["tallies"]
            lines.append(
                f"{name:10s} {row['enumerated']:6d} {t['eliminated-interval']:9d} "
                f"{t['no-solution']:7d} {t['solved-2pi-n']:6d} "
                f"{t['solved-goldberg']:9d} {t['solid-angle-obstruction']:6d} "
                f"{t['area-too-large']:5d} {t['needs-manual']:7d}")
        lines.append(f"total cases: {result['total_cases']}")
        lines.append(f"verdict: {result['verdict']}")
    return "\n".join(lines) + "\n"


def render_csv(report: Report) -> str:
    data = report.to_json()
    result = data["result"]
    if data["command"] == "search2pin":
        rows = ["n12,n13,n14,n23,n24,n34,area,verdict,name"]
        for row in result["rows"]:
            rows.append(",".join(
                [*map(str, row["denominators"]), f"{row['normalized_area']}",
                 row["verdict"], row["name"].replace(",", ";")]))
        return "\n".join(rows) + "\n"
    if data["command"] == "casework":
        rows = ["code_type,enumerated," + ",".join(casework.VERDICT_KEYS)]
        for name, row in result["per_type"].items():
            t = row["tallies"]
            rows.append(",".join([name, str(row["enumerated"])]
                                 + [str(t[k]) for k in casework.VERDICT_KEYS]))
        return "\n".join(rows) + "\n"
    if data["command"] == "goldberg":
        rows = ["family,a_star,area_star"]
        for r in result["families"]:
            rows.append(f"{r['family']},{r['a_star']},{r['area_star']}")
        return "\n".join(rows) + "\n"
    # analyze: flat key,value
    rows = ["key,value"]
    for k, v in result.items():
        rows.append(f"{k},\"{v}\"")
    return "\n".join(rows) + "\n"


def emit(report: Report, config: RunConfig, stdout=None) -> None:
    out = stdout or sys.stdout
    if "json" in config.formats:
        print(json.dumps(report.to_json(), indent=1, sort_keys=True), file=out)
    if "text" in config.formats:
        print(render_text(report), end="", file=out)
    if "csv" in config.formats:
        print(render_csv(report), end="", file=out)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tetratile",
        description="Certified search for the least-area tetrahedral tile of space")
    parser.add_argument("--out-dir", default=None,
                        help="output directory (default $TETRATILE_OUT or ./tetratile-out)")
    parser.add_argument("--format", default="text", dest="formats",
                        help="comma list of report formats: json,text,csv")
    parser.add_argument("--width-floor", type=float, default=1e-4)
    parser.add_argument("--budget", type=int, default=10 ** 6)
    parser.add_argument("--workers", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="classify one tetrahedron")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--edges", help="six comma-separated edge lengths")
    group.add_argument("--angles",
                       help="six comma-separated dihedrals (rad, deg, or pi/N)")

    sub.add_parser("search2pin", help="all tetrahedra with dihedrals 2pi/n")

    p = sub.add_parser("goldberg", help="minimize the Goldberg families")
    p.add_argument("--family", type=int, choices=(1, 2, 3), default=None)
    p.add_argument("--all", action="store_true", help="all three families (default)")

    p = sub.add_parser("casework", help="run the elimination campaign")
    p.add_argument("--type", choices=casework.CODE_TYPE_ORDER, default=None)
    p.add_argument("--all", action="store_true", help="all nine code types (default)")
    p.add_argument("--resume", action="store_true",
                   help="reuse persisted per-case results")
    p.add_argument("--persist", action="store_true",
                   help="write per-case results and certificates")
    p.add_argument("--full", action="store_true",
                   help="embed every per-case resolution in the report")
    return parser


COMMANDS = {
    "analyze": cmd_analyze,
    "search2pin": cmd_search2pin,
    "goldberg": cmd_goldberg,
    "casework": cmd_casework,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig(
            width_floor=args.width_floor, budget=args.budget, workers=args.workers,
            out_dir=args.out_dir or os.environ.get("TETRATILE_OUT", "tetratile-out"),
            formats=tuple(args.formats.split(",")))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = COMMANDS[args.command](args, config)
    except casework.ProofGap as exc:
        if exc.report is not None:
            emit(exc.report, config)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROOF_GAP
    except rigor.BudgetExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (GeometryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    emit(report, config)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
