"""``drifteval`` command line: ``run``, ``diagnose`` and ``synth``.

Failures exit with status 2 and print one JSON object ``{"code", "message"}``
to stderr; any outputs written by the failed command are removed.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import shutil
import sys
import time
import warnings
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from .data import first_entry_filter, load_dataset, parse_schema
from .diagnostics import build_report, render_report
from .engine import ExperimentConfig, ResultTable, run_experiment
from .errors import ConfigError, DataError, DriftEvalError
from .models import TrainedModel
from .regimes import RegimeKind
from .synthgen import DegenerateScriptWarning, ShiftScript, generate

logger = logging.getLogger("drifteval")

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID = 0, 1, 2


def _tool_version():
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class _Outputs:
    """Tracks created paths so a failed command can remove them."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.created_dir = not self.dir.exists()
        self.paths = []

    def prepare(self):
        try:
            self.dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise DataError(f"cannot create output directory {self.dir}: {exc}") from exc
        return self

    def write_text(self, name, text):
        path = self.dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.paths.append(path)
        return path

    def rollback(self):
        for p in self.paths:
            p.unlink(missing_ok=True)
        if self.created_dir:
            shutil.rmtree(self.dir, ignore_errors=True)


def _read_json(path, what):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} {path} is not valid JSON: {exc}") from exc


def _split_list(text):
    return [p.strip() for p in text.split(",") if p.strip()]


def load_config(config_file, seeds=None, window=None, regimes=None, models=None):
    """Read the JSON config, apply flag overrides, and return ``(config, schema)``."""
    raw = _read_json(config_file, "config")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if seeds is not None:
        raw["seeds"] = [int(s) for s in _split_list(seeds)]
    if window is not None:
        raw["window"] = int(window)
        raw["regimes"] = [r if isinstance(r, str) else {**r, "window": int(window)}
                          for r in raw.get("regimes", [k.value for k in RegimeKind])]
    if regimes is not None:
        raw["regimes"] = _split_list(regimes)
    if models is not None:
        by_kind = {(m if isinstance(m, str) else m["kind"]): m for m in raw.get("models", [])}
        raw["models"] = [by_kind.get(k, k) for k in _split_list(models)]
    if "schema" not in raw:
        raise ConfigError("config lacks a 'schema' entry")
    schema = raw["schema"]
    if isinstance(schema, str):
        schema = Path(config_file).parent / schema
    return ExperimentConfig.from_dict(raw), parse_schema(schema)


def _schema_json(schema: dict) -> dict:
    out = dict(schema)
    out["features"] = [{"name": s.name, "kind": s.kind} for s in schema["features"]]
    return out


def model_filename(key) -> str:
    regime, kind, seed, deploy = key
    return f"{regime}__{kind}__seed{seed}__t{deploy}.json"


def parse_model_filename(name: str):
    regime, kind, seed, deploy = Path(name).stem.split("__")
    return regime, kind, int(seed[4:]), int(deploy[1:])


def cmd_run(config_file, data_file, out_dir, seeds=None, window=None, regimes=None, models=None,
            jobs=1) -> int:
    out = _Outputs(out_dir)
    t0 = time.monotonic()
    try:
        config, schema = load_config(config_file, seeds, window, regimes, models)
        if not Path(data_file).is_file():
            raise DataError(f"dataset file not found: {data_file}")
        dataset = first_entry_filter(load_dataset(data_file, schema))
        table = run_experiment(config, dataset, jobs=jobs)
        out.prepare()
        out.write_text("results.csv", table.to_csv())
        out.write_text("results.json", table.to_json())
        for key in sorted(table.models):
            out.write_text(f"models/{model_filename(key)}", table.models[key].to_json())
        manifest = {
            "config_path": str(Path(config_file).resolve()),
            "dataset_path": str(Path(data_file).resolve()),
            "output_dir": str(Path(out_dir).resolve()),
            "tool_version": _tool_version(),
            "dataset_digest": file_digest(data_file),
            "fingerprint": table.fingerprint,
            "schema": _schema_json(schema),
            "skipped": [list(s) for s in table.skipped],
            "duration_seconds": round(time.monotonic() - t0, 3),
        }
        out.write_text("manifest.json", json.dumps(manifest, indent=2))
        ResultTable.from_csv(out.dir / "results.csv")
        json.loads((out.dir / "results.json").read_text(encoding="utf-8"))
    except BaseException:
        out.rollback()
        raise
    logger.info("wrote %d records to %s", len(table), out.dir)
    return EXIT_OK


def load_models(models_dir) -> dict:
    models = {}
    for path in sorted(Path(models_dir).glob("*.json")):
        models[parse_model_filename(path.name)] = TrainedModel.from_json(path)
    return models


def cmd_diagnose(results_dir, data_file, out_dir, regime=RegimeKind.SLIDING_WINDOW.value, k=5) -> int:
    results_dir = Path(results_dir)
    for need in ("results.csv", "manifest.json"):
        if not (results_dir / need).is_file():
            raise DataError(f"missing {results_dir / need}")
    models_dir = results_dir / "models"
    if not models_dir.is_dir():
        raise DataError(f"missing models directory {models_dir}")
    manifest = _read_json(results_dir / "manifest.json", "manifest")
    if not Path(data_file).is_file():
        raise DataError(f"dataset file not found: {data_file}")
    if file_digest(data_file) != manifest.get("dataset_digest"):
        raise DataError(f"{data_file} does not match the dataset digest recorded in the manifest")
    dataset = first_entry_filter(load_dataset(data_file, manifest["schema"]))
    table = ResultTable.from_csv(results_dir / "results.csv")
    report = build_report(table, dataset, load_models(models_dir), regime=regime, k=k)
    render_report(report, table, out_dir)
    return EXIT_OK


def cmd_synth(script_file, out_file) -> int:
    script = ShiftScript.from_json(script_file)
    out_file = Path(out_file)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateScriptWarning)
        dataset = generate(script)
    for w in caught:
        logger.warning("%s", w.message)
    schema_file = out_file.with_suffix(".schema.json")
    written = []
    try:
        out_file.parent.mkdir(parents=True, exist_ok=True)
        dataset.to_csv(out_file)
        written.append(out_file)
        schema_file.write_text(json.dumps(script.schema(), indent=2), encoding="utf-8")
        written.append(schema_file)
    except BaseException as exc:
        for p in written:
            p.unlink(missing_ok=True)
        if isinstance(exc, OSError):
            raise DataError(f"cannot write {out_file}: {exc}") from exc
        raise
    logger.info("wrote %d rows to %s", len(dataset), out_file)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"usage: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="drifteval", description=__doc__.splitlines()[0])
    p.add_argument("--log-level", default=os.environ.get("DRIFTEVAL_LOG", "WARNING"))
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an evaluation-over-time experiment")
    run.add_argument("--config", required=True)
    run.add_argument("--data", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--seeds", help="comma-separated seeds")
    run.add_argument("--window", type=int)
    run.add_argument("--regimes", help="comma-separated regime names")
    run.add_argument("--models", help="comma-separated model kinds (LR,GBDT,MLP)")
    run.add_argument("--jobs", type=int, default=1)

    diag = sub.add_parser("diagnose", help="render diagnostic panels for a finished run")
    diag.add_argument("--results", required=True)
    diag.add_argument("--data", required=True)
    diag.add_argument("--out", required=True)
    diag.add_argument("--regime", default=RegimeKind.SLIDING_WINDOW.value)
    diag.add_argument("--top-k", type=int, default=5)

    syn = sub.add_parser("synth", help="generate a dataset from a shift script")
    syn.add_argument("--script", required=True)
    syn.add_argument("--out", required=True)

    for sp in (run, diag, syn):
        sp.add_argument("--log-level", default=argparse.SUPPRESS)
    return p


def _fail(code, message, status):
    sys.stderr.write(json.dumps({"code": code, "message": message}) + "\n")
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        return _fail("usage_error", str(exc), EXIT_INVALID)
    logging.basicConfig(level=str(args.log_level).upper(),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return cmd_run(args.config, args.data, args.out, args.seeds, args.window,
                           args.regimes, args.models, args.jobs)
        if args.command == "diagnose":
            return cmd_diagnose(args.results, args.data, args.out, args.regime, args.top_k)
        return cmd_synth(args.script, args.out)
    except DriftEvalError as exc:
        return _fail(exc.code, str(exc), EXIT_INVALID)
    except (ValueError, KeyError) as exc:
        return _fail("invalid_input", str(exc), EXIT_INVALID)
    except Exception as exc:  # noqa: BLE001
        logger.debug("internal error", exc_info=True)
        return _fail("internal_error", f"{type(exc).__name__}: {exc}", EXIT_INTERNAL)


if __name__ == "__main__":
    sys.exit(main())
