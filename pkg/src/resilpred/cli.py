"""Command-line front end: corpus generation, labeling, features, training, prediction, evaluation.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import generate_kernel
from .features import FEATURE_NAMES, format_vector, stream_feature_vector
from .inject import (DEFAULT_CAMPAIGN_SIZE, CampaignError, Verifier, golden_run,
                     required_sample_size, run_campaign)
from .interp import UsageError as ExecUsageError
from .interp import execute
from .ir import IRSyntaxError, parse_program
from .learn import PipelineConfig, TrainedPredictor, fit_pipeline, prediction_accuracy
from .learn.predictor import dumps as dump_model
from .learn.predictor import load_model
from .trace import TraceFormatError, emit_trace

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
D = len(FEATURE_NAMES)
MANIFEST_VERSION = 1
LABEL_HEADER = ["id", "status", "n", "success_count", "sdc_count", "interruption_count",
                "success", "sdc", "interruption"]
DATASET_HEADER = ["id"] + [f"f{i}" for i in range(D)] + ["success", "interruption"]
REPORT_HEADER = ["id", "obs_sr", "obs_sdc", "obs_ir", "pred_sr", "pred_sdc", "pred_ir",
                 "acc_sr", "acc_sdc", "acc_ir"]
MIN_TRAIN_ROWS = 10


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def g9(x: float) -> str:
    return f"{x:.9g}"


# --------------------------------------------------------------------------- files

def atomic_write(path: Path, text: str) -> None:
    """Temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def read_csv(path: Path) -> list[dict]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return list(csv.DictReader(fh))
    except FileNotFoundError:
        raise DataError(f"missing file {path}") from None


def read_json(path: Path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise DataError(f"missing file {path}") from None
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: invalid JSON ({e})") from None


# --------------------------------------------------------------------------- manifest

@dataclass(frozen=True)
class ManifestEntry:
    id: str
    program: Path
    inputs: Path
    tolerance: float = 1e-6
    n: int = DEFAULT_CAMPAIGN_SIZE
    seed: int = 0


def load_manifest(path) -> list[ManifestEntry]:
    path = Path(path)
    doc = read_json(path)
    if not isinstance(doc, dict) or "entries" not in doc:
        raise DataError(f"{path}: not a corpus manifest")
    root = path.parent
    out, seen = [], set()
    for i, e in enumerate(doc["entries"]):
        try:
            entry = ManifestEntry(str(e["id"]), root / e["program"], root / e["inputs"],
                                  float(e.get("tolerance", 1e-6)),
                                  int(e.get("n", DEFAULT_CAMPAIGN_SIZE)), int(e.get("seed", 0)))
        except (KeyError, TypeError, ValueError) as err:
            raise DataError(f"{path}: entry {i} malformed ({err})") from None
        if entry.id in seen:
            raise DataError(f"{path}: duplicate id {entry.id}")
        seen.add(entry.id)
        if entry.n < 1:
            raise DataError(f"{path}: entry {entry.id} has n < 1")
        for p in (entry.program, entry.inputs):
            if not p.exists():
                raise DataError(f"{path}: entry {entry.id}: missing {p}")
        out.append(entry)
    return out


def manifest_text(entries: list[dict]) -> str:
    return json.dumps({"version": MANIFEST_VERSION, "entries": entries}, indent=1,
                      sort_keys=True) + "\n"


# --------------------------------------------------------------------------- gen corpus

def gen_corpus(out_dir: Path, seed: int, count: int, start: int = 0, n: int | None = None,
               name: str = "manifest.json") -> Path:
    out_dir = Path(out_dir)
    n = n if n is not None else DEFAULT_CAMPAIGN_SIZE
    entries = []
    for i in range(start, start + count):
        k = generate_kernel(seed, i)
        atomic_write(out_dir / "programs" / f"{k.name}.ir", k.source)
        atomic_write(out_dir / "inputs" / f"{k.name}.json", json.dumps(k.inputs, sort_keys=True) + "\n")
        entries.append({"id": k.name, "program": f"programs/{k.name}.ir",
                        "inputs": f"inputs/{k.name}.json", "tolerance": k.tolerance,
                        "n": n, "seed": seed})
    path = out_dir / name
    atomic_write(path, manifest_text(entries))
    return path


# --------------------------------------------------------------------------- label

def _load_program(entry: ManifestEntry):
    try:
        text = entry.program.read_text(encoding="utf-8")
        return text, parse_program(text)
    except IRSyntaxError as e:
        raise DataError(f"{entry.program}: {e}") from None


def _entry_key(entry: ManifestEntry, text: str, inputs: dict) -> str:
    blob = json.dumps({"program": text, "inputs": inputs, "n": entry.n, "seed": entry.seed,
                       "tolerance": entry.tolerance, "version": __version__}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def label_entry(entry: ManifestEntry, out_dir: Path) -> dict:
    """Golden run, trace file, campaign; cached by content hash so reruns skip finished work."""
    text, program = _load_program(entry)
    inputs = read_json(entry.inputs)
    key = _entry_key(entry, text, inputs)
    cache = out_dir / "cache" / f"{entry.id}.json"
    trace_path = out_dir / "traces" / f"{entry.id}.trace"
    if cache.exists() and trace_path.exists():
        try:
            hit = json.loads(cache.read_text(encoding="utf-8"))
            if hit.get("key") == key:
                return hit["row"]
        except (json.JSONDecodeError, KeyError):
            pass
    try:
        g = golden_run(program, inputs)
    except (CampaignError, ExecUsageError) as e:
        row = {"id": entry.id, "status": f"unusable: {e}"}
    else:
        atomic_write(trace_path, emit_trace(g.outcome.trace))
        rates = run_campaign(program, inputs, entry.n, entry.seed,
                             verifier=Verifier(entry.tolerance), golden=g)
        c = rates.counts()
        row = {"id": entry.id, "status": "ok", "n": rates.n,
               "counts": [c[k] for k in c], "rates": [rates.success, rates.sdc, rates.interruption]}
    atomic_write(cache, json.dumps({"key": key, "row": row}, sort_keys=True) + "\n")
    return row


def _label_job(args):
    entry, out_dir = args
    return label_entry(entry, out_dir)


def label_manifest(manifest, out_dir: Path, jobs: int = 1) -> tuple[Path, list[dict]]:
    entries = load_manifest(manifest)
    out_dir = Path(out_dir)
    work = [(e, out_dir) for e in entries]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_label_job, work))
    else:
        rows = [_label_job(w) for w in work]
    lines = [LABEL_HEADER]
    for r in rows:
        if r["status"] == "ok":
            lines.append([r["id"], "ok", r["n"], *r["counts"], *(g9(x) for x in r["rates"])])
        else:
            lines.append([r["id"], r["status"], "", "", "", "", "", "", ""])
    path = out_dir / "labels.csv"
    atomic_write(path, csv_text(lines))
    if rows and all(r["status"] != "ok" for r in rows):
        raise DataError("every manifest entry failed its golden run")
    return path, rows


def read_labels(path: Path) -> dict[str, dict]:
    out = {}
    for r in read_csv(path):
        if r.get("status") != "ok":
            continue
        # rebuild the rates from integer counts so they partition 1 exactly
        try:
            n = int(r["n"])
            c = [int(r[k]) for k in ("success_count", "sdc_count", "interruption_count")]
        except (KeyError, ValueError):
            raise DataError(f"{path}: malformed label row {r.get('id')!r}") from None
        out[r["id"]] = {"success": c[0] / n, "sdc": c[1] / n, "interruption": c[2] / n}
    return out


# --------------------------------------------------------------------------- features

def trace_features(path: Path) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            return stream_feature_vector(fh)
    except FileNotFoundError:
        raise DataError(f"missing trace {path}") from None
    except TraceFormatError as e:
        raise DataError(f"{path}: {e}") from None


def build_dataset(manifest, out_dir: Path, labels: Path | None = None) -> Path:
    entries = load_manifest(manifest)
    out_dir = Path(out_dir)
    lab = read_labels(labels or out_dir / "labels.csv")
    lines = [DATASET_HEADER]
    for e in entries:
        tp = out_dir / "traces" / f"{e.id}.trace"
        if not tp.exists():
            raise DataError(f"missing trace for {e.id}: {tp}")
        if e.id not in lab:
            raise DataError(f"no usable label row for trace id {e.id}")
        v = trace_features(tp)
        if len(v) != D:
            raise DataError(f"feature width mismatch for {e.id}: {len(v)} != {D}")
        lines.append([e.id, *format_vector(v), g9(lab[e.id]["success"]),
                      g9(lab[e.id]["interruption"])])
    path = out_dir / "dataset.csv"
    atomic_write(path, csv_text(lines))
    return path


def read_dataset(path: Path) -> tuple[list[str], np.ndarray, np.ndarray]:
    rows = read_csv(path)
    if not rows:
        raise DataError(f"{path}: empty dataset")
    fcols = [c for c in rows[0] if c.startswith("f") and c[1:].isdigit()]
    if len(fcols) != D:
        raise DataError(f"{path}: expected {D} feature columns, found {len(fcols)}")
    try:
        X = np.array([[float(r[c]) for c in fcols] for r in rows])
        Y = np.array([[float(r["success"]), float(r["interruption"])] for r in rows])
    except (KeyError, ValueError) as e:
        raise DataError(f"{path}: malformed dataset ({e})") from None
    return [r["id"] for r in rows], X, Y


# --------------------------------------------------------------------------- train

def train_model(dataset: Path, target: str, out_dir: Path, seed: int = 0,
                config: PipelineConfig | None = None) -> tuple[Path, Path]:
    if target not in ("success", "interruption"):
        raise UsageError("target must be success or interruption")
    _ids, X, Y = read_dataset(dataset)
    if len(X) < MIN_TRAIN_ROWS:
        raise DataError(f"too few rows to train: {len(X)} < {MIN_TRAIN_ROWS}")
    y = Y[:, 0 if target == "success" else 1]
    cfg = config or PipelineConfig()
    cfg.k_cv = min(cfg.k_cv, len(X))
    pred, report = fit_pipeline(X, y, seed, cfg, target=target)
    out_dir = Path(out_dir)
    mp = out_dir / f"model-{target}.json"
    rp = out_dir / f"train-report-{target}.json"
    atomic_write(mp, dump_model(pred))
    atomic_write(rp, json.dumps(report, sort_keys=True, indent=1) + "\n")
    return mp, rp


# --------------------------------------------------------------------------- predict / evaluate

def _load(path) -> TrainedPredictor:
    try:
        return load_model(path)
    except FileNotFoundError:
        raise DataError(f"missing model {path}") from None
    except (ValueError, KeyError) as e:
        raise DataError(f"{path}: {e}") from None


def predict_rates(sr: TrainedPredictor, ir: TrainedPredictor, x) -> tuple[float, float, float]:
    if sr.d != ir.d:
        raise DataError(f"models disagree on feature width ({sr.d} vs {ir.d})")
    if len(x) != sr.d:
        raise DataError(f"width mismatch: models expect {sr.d} features, trace gives {len(x)}")
    p_sr = float(sr.predict(x))
    p_ir = float(ir.predict(x))
    return p_sr, p_ir, max(0.0, 1.0 - p_sr - p_ir)


def program_features(program: Path, inputs: Path, budget: int = 10_000_000) -> np.ndarray:
    """Fault-free run only; no injections."""
    try:
        p = parse_program(Path(program).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"missing program {program}") from None
    except IRSyntaxError as e:
        raise DataError(f"{program}: {e}") from None
    out = execute(p, read_json(Path(inputs)), budget)
    if out.status.value != "completed":
        raise DataError(f"{program}: fault-free run {out.status.value}")
    return stream_feature_vector(io.StringIO(emit_trace(out.trace)))


def cmd_predict(sr_model, ir_model, trace=None, program=None, inputs=None
                ) -> tuple[float, float, float]:
    """(SR, IR, SDCR) from a stored trace, or from a fresh fault-free run of ``program``."""
    sr, ir = _load(sr_model), _load(ir_model)
    if trace is not None:
        x = trace_features(Path(trace))
    elif program is not None and inputs is not None:
        x = program_features(Path(program), Path(inputs))
    else:
        raise UsageError("predict needs a trace, or a program with inputs")
    return predict_rates(sr, ir, x)


def _acc(p: float, o: float) -> float | None:
    return prediction_accuracy(p, o)


def _fmt(a: float | None) -> str:
    return "N/A" if a is None else f"{a:.6f}"


def evaluate(sr_model, ir_model, manifest, out_dir: Path, labels: Path | None = None
             ) -> tuple[Path, Path, dict]:
    entries = load_manifest(manifest)
    if not entries:
        raise DataError("empty held-out set")
    out_dir = Path(out_dir)
    lab = read_labels(labels or out_dir / "labels.csv")
    sr, ir = _load(sr_model), _load(ir_model)
    rows = []
    for e in entries:
        if e.id not in lab:
            raise DataError(f"no usable label row for held-out id {e.id}")
        tp = out_dir / "traces" / f"{e.id}.trace"
        x = trace_features(tp) if tp.exists() else program_features(e.program, e.inputs)
        p_sr, p_ir, p_sdc = predict_rates(sr, ir, x)
        o = lab[e.id]
        rows.append({"id": e.id, "obs": (o["success"], o["sdc"], o["interruption"]),
                     "pred": (p_sr, p_sdc, p_ir),
                     "acc": (_acc(p_sr, o["success"]), _acc(p_sdc, o["sdc"]),
                             _acc(p_ir, o["interruption"]))})
    agg = {}
    for j, name in enumerate(("sr", "sdc", "ir")):
        vals = [r["acc"][j] for r in rows if r["acc"][j] is not None]
        agg[name] = (float(np.mean(vals)), float(np.var(vals))) if vals else (None, None)
    machine = [REPORT_HEADER]
    for r in rows:
        machine.append([r["id"], *(g9(v) for v in r["obs"]), *(g9(v) for v in r["pred"]),
                        *(_fmt(a) for a in r["acc"])])
    machine.append(["Average(var)", "", "", "", "", "", "",
                    *(f"{_fmt(agg[k][0])}({_fmt(agg[k][1])})" for k in ("sr", "sdc", "ir"))])
    human = [f"{'id':<20} {'SR obs':>7} {'pred':>7} {'accy':>9}   {'SDCR obs':>8} {'pred':>7} "
             f"{'accy':>9}   {'IR obs':>7} {'pred':>7} {'accy':>9}"]
    for r in rows:
        (osr, osdc, oir), (psr, psdc, pir), (asr, asdc, air) = r["obs"], r["pred"], r["acc"]
        human.append(f"{r['id']:<20} {osr:7.3f} {psr:7.3f} {_fmt(asr):>9}   {osdc:8.3f} "
                     f"{psdc:7.3f} {_fmt(asdc):>9}   {oir:7.3f} {pir:7.3f} {_fmt(air):>9}")
    human.append("Average(var): " + "  ".join(
        f"{k.upper()} {_fmt(agg[k][0])}({_fmt(agg[k][1])})" for k in ("sr", "sdc", "ir")))
    cp = out_dir / "report.csv"
    hp = out_dir / "report.txt"
    atomic_write(cp, csv_text(machine))
    atomic_write(hp, "\n".join(human) + "\n")
    return cp, hp, {"rows": rows, "aggregate": agg}


# --------------------------------------------------------------------------- fi run

def fi_run(program: Path, inputs: Path, n: int, seed: int, budget: int | None,
           tolerance: float) -> dict:
    try:
        p = parse_program(Path(program).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"missing program {program}") from None
    except IRSyntaxError as e:
        raise DataError(f"{program}: {e}") from None
    try:
        r = run_campaign(p, read_json(Path(inputs)), n, seed, budget, Verifier(tolerance))
    except (CampaignError, ExecUsageError) as e:
        raise DataError(str(e)) from None
    c = r.counts()
    return {"program": str(program), "n": r.n, "seed": seed,
            "success": r.success, "sdc": r.sdc, "interruption": r.interruption,
            "counts": {k.value: v for k, v in c.items()}}


# --------------------------------------------------------------------------- argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="resilpred", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out-dir", default=".")
    ap.add_argument("--config", help="key=value file; keys are long option names")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="verb", parser_class=_Parser)

    g = sub.add_parser("gen", help="generate inputs").add_subparsers(dest="what", parser_class=_Parser)
    gc = g.add_parser("corpus", help="write generated kernels and a manifest")
    gc.add_argument("--count", type=int, required=True)
    gc.add_argument("--start", type=int, default=0)
    gc.add_argument("--n", type=int, help="campaign size recorded per entry "
                    "(default: 95%% confidence, 5%% margin, capped at 1000)")
    gc.add_argument("--name", default="manifest.json")

    lb = sub.add_parser("label", help="golden runs, traces, fault-injection campaigns")
    lb.add_argument("--manifest", required=True)

    ft = sub.add_parser("features", help="feature dataset from traces and labels")
    ft.add_argument("--manifest", required=True)
    ft.add_argument("--labels")

    tr = sub.add_parser("train", help="tune and fit a predictor")
    tr.add_argument("--dataset", required=True)
    tr.add_argument("--target", choices=["success", "interruption"], required=True)
    tr.add_argument("--model", default="auto", choices=["auto", "ridge", "knn", "tree", "forest", "gbrt"])
    tr.add_argument("--bags", type=int, default=10)
    tr.add_argument("--k-cv", type=int, default=10)
    tr.add_argument("--no-whiten", action="store_true")

    pr = sub.add_parser("predict", help="predict rates without fault injection")
    pr.add_argument("--sr-model", required=True)
    pr.add_argument("--ir-model", required=True)
    src = pr.add_mutually_exclusive_group(required=True)
    src.add_argument("--trace")
    src.add_argument("--program")
    pr.add_argument("--inputs")

    ev = sub.add_parser("evaluate", help="held-out accuracy report")
    ev.add_argument("--sr-model", required=True)
    ev.add_argument("--ir-model", required=True)
    ev.add_argument("--manifest", required=True)
    ev.add_argument("--labels")

    fi = sub.add_parser("fi", help="fault injection").add_subparsers(dest="what", parser_class=_Parser)
    fr = fi.add_parser("run", help="one campaign")
    fr.add_argument("--program", required=True)
    fr.add_argument("--inputs", required=True)
    fr.add_argument("--n", type=int, default=DEFAULT_CAMPAIGN_SIZE)
    fr.add_argument("--budget", type=int)
    fr.add_argument("--tolerance", type=float, default=1e-6)
    return ap


def _subparsers(p: argparse.ArgumentParser):
    yield p
    for a in p._actions:
        if isinstance(a, argparse._SubParsersAction):
            for child in a.choices.values():
                yield from _subparsers(child)


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use option spelling."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UsageError(f"missing config file {path}") from None
    for no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.lstrip("-").replace("-", "_")] = v
    return out


def parse_args(argv) -> argparse.Namespace:
    ap = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = read_config(known.config)
        parsers = list(_subparsers(ap))
        dests = {}
        for p in parsers:
            for a in p._actions:
                if a.dest not in ("help", "version", "config", "verb", "what"):
                    dests.setdefault(a.dest, []).append((p, a))
        for k, v in cfg.items():
            if k not in dests:
                raise UsageError(f"unknown config key {k!r}")
            for p, a in dests[k]:
                if isinstance(a, argparse._StoreTrueAction):
                    val = v.lower() in ("1", "true", "yes", "on")
                else:
                    try:
                        val = a.type(v) if a.type else v
                    except ValueError:
                        raise UsageError(f"config key {k}: bad value {v!r}") from None
                a.required = False
                p.set_defaults(**{k: val})
    return ap.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        return _dispatch(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, TraceFormatError, IRSyntaxError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


def _dispatch(args) -> int:
    out = Path(args.out_dir)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    if args.verb is None:
        raise UsageError("missing command")
    if args.verb == "gen":
        if args.what != "corpus":
            raise UsageError("expected: gen corpus")
        n = args.n if args.n is not None else min(required_sample_size(0.95, 0.05), 1000)
        path = gen_corpus(out, args.seed, args.count, args.start, n, args.name)
        print(path)
    elif args.verb == "label":
        path, rows = label_manifest(args.manifest, out, args.jobs)
        bad = sum(r["status"] != "ok" for r in rows)
        print(f"{path} ({len(rows) - bad} labeled, {bad} unusable)")
    elif args.verb == "features":
        print(build_dataset(args.manifest, out, Path(args.labels) if args.labels else None))
    elif args.verb == "train":
        if args.bags < 1 or args.k_cv < 2:
            raise UsageError("--bags must be >= 1 and --k-cv >= 2")
        cfg = PipelineConfig(kind=args.model, bags=args.bags, k_cv=args.k_cv,
                             whiten=not args.no_whiten)
        mp, rp = train_model(Path(args.dataset), args.target, out, args.seed, cfg)
        print(mp)
        print(rp)
    elif args.verb == "predict":
        sr, ir = _load(args.sr_model), _load(args.ir_model)
        if args.trace:
            x = trace_features(Path(args.trace))
            ident = Path(args.trace).stem
        else:
            if not args.inputs:
                raise UsageError("--program needs --inputs")
            x = program_features(Path(args.program), Path(args.inputs))
            ident = Path(args.program).stem
        p_sr, p_ir, p_sdc = predict_rates(sr, ir, x)
        sys.stdout.write(csv_text([["id", "pred_sr", "pred_sdc", "pred_ir"],
                                   [ident, g9(p_sr), g9(p_sdc), g9(p_ir)]]))
    elif args.verb == "evaluate":
        cp, hp, _ = evaluate(args.sr_model, args.ir_model, args.manifest, out,
                             Path(args.labels) if args.labels else None)
        sys.stdout.write(Path(hp).read_text(encoding="utf-8"))
        print(cp)
    elif args.verb == "fi":
        if args.what != "run":
            raise UsageError("expected: fi run")
        if args.n < 1:
            raise UsageError("--n must be >= 1")
        rec = fi_run(Path(args.program), Path(args.inputs), args.n, args.seed, args.budget,
                     args.tolerance)
        print(json.dumps(rec, sort_keys=True))
    return EXIT_OK


# operation-level names
cmd_label = label_manifest
cmd_features = build_dataset
cmd_train = train_model
cmd_evaluate = evaluate


if __name__ == "__main__":
    sys.exit(main())
