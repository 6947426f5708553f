"""Command line: ``sclab run <manifest.toml>`` and ``sclab report <dir>``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .mc import default_workers, write_results_csv
from .suite import RUNNERS, ManifestError, Outcome, parse_manifest

ROWS = [
    ("nishimori-identity", "odd and even bracket moments agree", ["nishimori-identity"]),
    ("logz-increment", "adding a check changes ln Z by [-ln 2, 0]; even-moment series", ["logz-increment-bound", "logz-increment-routes", "logz-increment-series", "logz-increment-mean-bound"]),
    ("check-average-vs-overlap", "check average vs overlap product, collision bound", ["check-average-vs-overlap", "product-set-equals-overlap"]),
    ("jensen-chain", "conn <= coup <= disc overlap forms", ["jensen-chain"]),
    ("admissibility", "T random types leave m free sockets everywhere", ["admissibility"]),
    ("interpolation-ordering", "E[ln Z] conn-mix <= coup-mix <= disc-mix", ["interpolation-ordering"]),
    ("simple-to-conn-transformation", "edit census and shrinking edit fraction", ["simple-to-conn-transformation"]),
    ("two-position-superadditivity", "weighted two-position interpolation", ["two-position-superadditivity", "superadditivity-fit"]),
    ("coupling-trend", "coupled thresholds and entropies approach the uncoupled MAP values", ["coupled-threshold-trend", "coupled-gap-trend", "map-threshold-near-area"]),
    ("thresholds", "BP and area thresholds", ["bp-below-area", "threshold-bp", "threshold-area"]),
    ("map-gexit-below-bp", "empirical MAP-GEXIT under BP-GEXIT", ["map-below-bp"]),
    ("graph-sampling", "sampled graphs use every socket at most once", ["socket-distinctness"]),
]


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def write_outcome(out_dir: Path, stem: str, man, outcome: Outcome) -> bool:
    passed = all(c.passed for c in outcome.claims.values())
    record = {
        "kind": man.kind,
        "manifest": Path(man.path).name,
        "manifest_digest": man.digest,
        "seed": man.seed,
        "tolerance_scale": man.tolerance_scale,
        "claims": {k: c.to_dict() for k, c in outcome.claims.items()},
        "passed": passed,
        "result": outcome.result,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{stem}.json").write_text(_dump_json(record))
    if outcome.rows:
        write_results_csv(out_dir / f"{stem}.csv", outcome.rows)
    for name, text in outcome.files.items():
        (out_dir / f"{stem}.{name}").write_text(text)
    return passed


def cmd_run(args) -> int:
    path = Path(args.manifest)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return 2
    try:
        man = parse_manifest(text, str(path))
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        man.seed = args.seed
    man.tolerance_scale = args.tolerance_scale
    workers = args.threads if args.threads is not None else default_workers()
    try:
        outcome = RUNNERS[man.kind](man, workers)
    except (ManifestError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return 2
    passed = write_outcome(Path(args.out), path.stem, man, outcome)
    for name, c in outcome.claims.items():
        print(f"{'PASS' if c.passed else 'FAIL'} {name}: {c.detail}")
    return 0 if passed else 1


def build_report(results_dir: Path) -> dict:
    claims, sources, unreadable = {}, {}, []
    for f in sorted(results_dir.glob("*.json")) if results_dir.is_dir() else []:
        try:
            rec = json.loads(f.read_text())
            items = rec["claims"].items()
            parsed = [(k, bool(v["passed"]), v["margin"]) for k, v in items]
        except (OSError, ValueError, KeyError, TypeError, AttributeError):
            unreadable.append(f.name)
            continue
        for k, ok, margin in parsed:
            claims.setdefault(k, []).append((ok, margin))
            sources.setdefault(k, []).append(f.name)
    rows = []
    for row_id, text, ids in ROWS:
        seen = [(k, v) for k in ids for v in claims.get(k, [])]
        if not seen:
            status, margin, files = "not run", None, []
        else:
            status = "pass" if all(ok for _, (ok, _) in seen) else "fail"
            numeric = [m for _, (_, m) in seen if isinstance(m, (int, float))]
            margin = min(numeric) if numeric else None
            files = sorted({s for k in ids for s in sources.get(k, [])})
        rows.append({"claim": row_id, "description": text, "status": status, "margin": margin, "files": files})
    for name in unreadable:
        rows.append({"claim": name, "description": "result file could not be parsed", "status": "unreadable", "margin": None, "files": [name]})
    return {"rows": rows, "ok": all(r["status"] in ("pass", "not run") for r in rows)}


def cmd_report(args) -> int:
    rep = build_report(Path(args.results))
    width = max(len(r["claim"]) for r in rep["rows"])
    for r in rep["rows"]:
        margin = "" if r["margin"] is None else f"{r['margin']:.3g}"
        print(f"{r['claim']:<{width}}  {r['status']:<10}  {margin:>10}  {r['description']}")
    if args.json:
        Path(args.json).write_text(_dump_json(rep))
    return 0 if rep["ok"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sclab", description="Spatially coupled LDPC ensemble laboratory.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment manifest")
    run.add_argument("manifest")
    run.add_argument("--seed", type=int, default=None, help="override the manifest's master seed")
    run.add_argument("--threads", type=int, default=None, help="worker processes (default: all CPUs)")
    run.add_argument("--out", default="results", help="output directory")
    run.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every tolerance")
    run.set_defaults(func=cmd_run)
    rep = sub.add_parser("report", help="summarize result files per claim")
    rep.add_argument("results")
    rep.add_argument("--json", default=None, help="also write the summary here")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
