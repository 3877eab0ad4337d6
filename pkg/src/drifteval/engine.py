"""Evaluation-over-time loop and the staleness-aligned result table."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .data import TemporalDataset, fit_encoder, transform
from .errors import ConfigError, DriftEvalError, SplitError
from .metrics import METRICS, aggregate_seeds, compute_metrics
from .models import ModelSpec, grid_search, predict_proba
from .models.base import LR
from .regimes import (RegimeKind, RegimeSpec, SplitRatios, eligibility, make_split,
                      out_of_period_eval_sets)

logger = logging.getLogger(__name__)

DEFAULT_SEEDS = (0, 1, 2, 3, 4)
CSV_HEADER = ("regime", "model", "seed", "deploy_time", "eval_time", "staleness", "metric",
              "value", "n_eval", "n_pos_eval", "in_period")


@dataclass
class ExperimentConfig:
    regimes: list
    model_specs: list
    ratios: SplitRatios = field(default_factory=lambda: SplitRatios(0.8, 0.1, 0.1))
    seeds: tuple = DEFAULT_SEEDS
    metrics: tuple = METRICS
    deploy_range: tuple = None

    def __post_init__(self):
        self.regimes = [r if isinstance(r, RegimeSpec) else RegimeSpec(r) for r in self.regimes]
        self.model_specs = [m if isinstance(m, ModelSpec) else ModelSpec(m) for m in self.model_specs]
        self.ratios = SplitRatios.parse(self.ratios)
        self.seeds = tuple(int(s) for s in self.seeds)
        self.metrics = tuple(self.metrics)
        if not self.regimes or not self.model_specs or not self.seeds or not self.metrics:
            raise ConfigError("regimes, models, seeds and metrics must all be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"seeds must be distinct: {self.seeds}")
        if len({r.name for r in self.regimes}) != len(self.regimes):
            raise ConfigError("each regime may appear once")
        if len({m.kind for m in self.model_specs}) != len(self.model_specs):
            raise ConfigError("each model kind may appear once")
        bad = set(self.metrics) - set(METRICS)
        if bad:
            raise ConfigError(f"unknown metrics {sorted(bad)}")
        if self.deploy_range is not None:
            self.deploy_range = (int(self.deploy_range[0]), int(self.deploy_range[1]))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        """Build from the JSON config layout (see README). Missing keys take defaults."""
        try:
            window = int(d.get("window", 4))
            regimes = []
            for r in d.get("regimes", ["sliding_window", "all_historical",
                                       "all_historical_subsampled", "all_period"]):
                if isinstance(r, str):
                    regimes.append(RegimeSpec(r, window))
                else:
                    regimes.append(RegimeSpec(r["kind"], int(r.get("window", window))))
            models = []
            for m in d.get("models", ["LR"]):
                models.append(ModelSpec(m) if isinstance(m, str) else ModelSpec(m["kind"], m.get("grid")))
            return cls(regimes, models, SplitRatios.parse(d.get("ratios", "0.8-0.1-0.1")),
                       tuple(d.get("seeds", DEFAULT_SEEDS)), tuple(d.get("metrics", METRICS)),
                       d.get("deploy_range"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid experiment config: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "regimes": [{"kind": r.name, "window": r.window} for r in self.regimes],
            "models": [m.to_dict() for m in self.model_specs],
            "ratios": self.ratios.as_list(),
            "seeds": list(self.seeds),
            "metrics": list(self.metrics),
            "deploy_range": list(self.deploy_range) if self.deploy_range else None,
        }


@dataclass(frozen=True)
class EvalRecord:
    regime: str
    model: str
    seed: int
    deploy_time: int
    eval_time: int
    staleness: int
    metric: str
    value: float
    n_eval: int
    n_pos_eval: int
    in_period: bool

    @property
    def key(self):
        return (self.regime, self.model, self.seed, self.deploy_time, self.eval_time, self.metric)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


@dataclass
class ResultTable:
    records: list
    fingerprint: str = ""
    models: dict = field(default_factory=dict)     # (regime, model, seed, deploy_time) -> TrainedModel
    skipped: list = field(default_factory=list)    # (regime, deploy_time, seed or None, reason)

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: r.key)
        keys = [r.key for r in self.records]
        if len(set(keys)) != len(keys):
            raise DriftEvalError("duplicate result keys")

    def __len__(self):
        return len(self.records)

    def select(self, **match):
        return [r for r in self.records if all(getattr(r, k) == v for k, v in match.items())]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.records:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_HEADER])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def to_json(self, path=None) -> str:
        rows = []
        for r in self.records:
            d = asdict(r)
            if math.isnan(d["value"]):
                d["value"] = None
            rows.append(d)
        text = json.dumps(rows, indent=1)
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, path) -> "ResultTable":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader, ()))
            if header != CSV_HEADER:
                raise DriftEvalError(f"{path}: unexpected header {','.join(header)}")
            recs = []
            for row in reader:
                d = dict(zip(header, row))
                recs.append(EvalRecord(
                    d["regime"], d["model"], int(d["seed"]), int(d["deploy_time"]),
                    int(d["eval_time"]), int(d["staleness"]), d["metric"], float(d["value"]),
                    int(d["n_eval"]), int(d["n_pos_eval"]), d["in_period"] == "true"))
        return cls(recs)


# --------------------------------------------------------------------------- run loop

_WORKER = {}


def _init_worker(dataset, config):
    _WORKER["dataset"], _WORKER["config"] = dataset, config


def _run_cell(job):
    return run_cell(_WORKER["dataset"], _WORKER["config"], *job)


def run_cell(dataset: TemporalDataset, config: ExperimentConfig, regime: RegimeSpec,
             deploy_time, seed: int):
    """Train and evaluate every model spec for one (regime, deployment time, seed).

    Returns ``(records, models, skip_reason)``; ``skip_reason`` is ``None`` on success.
    """
    try:
        plan = make_split(dataset, regime, deploy_time, config.ratios, seed)
    except SplitError as exc:
        return [], {}, str(exc)
    enc = fit_encoder(dataset, plan.train_idx)
    train = transform(enc, dataset, plan.train_idx)
    val = transform(enc, dataset, plan.val_idx)
    if regime.deploys:
        eval_sets = [(int(deploy_time), plan.test_idx)] + out_of_period_eval_sets(dataset, deploy_time)
    else:
        tt = dataset.times[plan.test_idx]
        eval_sets = [(int(t), plan.test_idx[tt == t]) for t in dataset.time_points]
    encoded = [(t, transform(enc, dataset, idx)) for t, idx in eval_sets]

    records, models = [], {}
    for spec in config.model_specs:
        try:
            model = grid_search(spec, train, val, seed)
        except DriftEvalError as exc:
            return [], {}, f"{spec.kind}: {exc}"
        model.meta["encoder_flagged"] = list(enc.flagged)
        models[(regime.name, spec.kind, seed, plan.deployment_time)] = model
        for t, em in encoded:
            scores = predict_proba(model, em.rows) if len(em) else np.empty(0)
            d = t if not regime.deploys else int(deploy_time)
            for mv in compute_metrics(scores, em.labels, config.metrics):
                records.append(EvalRecord(regime.name, spec.kind, seed, d, t, t - d, mv.name,
                                          float(mv.value), mv.n, mv.n_pos, t == d))
    return records, models, None


def deployment_times(dataset: TemporalDataset, config: ExperimentConfig, regime: RegimeSpec):
    """Eligible deployment times for ``regime`` plus ``(time, reason)`` for skipped ones."""
    lo, hi = config.deploy_range or (dataset.t_min, dataset.t_max)
    lo, hi = max(lo, dataset.t_min), min(hi, dataset.t_max)
    ok, skipped = [], []
    for d in range(lo, hi + 1):
        good, why = eligibility(dataset, regime, d)
        if good:
            ok.append(d)
        else:
            skipped.append((d, why))
    return ok, skipped


def fingerprint(config: ExperimentConfig, dataset: TemporalDataset) -> str:
    h = hashlib.sha256(json.dumps(config.to_dict(), sort_keys=True).encode())
    h.update(dataset.digest().encode())
    return h.hexdigest()


def run_experiment(config: ExperimentConfig, dataset: TemporalDataset, jobs: int = 1) -> ResultTable:
    """Run every (regime, deployment time, seed) cell and collect an ordered :class:`ResultTable`.

    All-period training runs once per seed and reports its held-out test rows
    grouped by time point, with ``deploy_time == eval_time``. Output does not
    depend on ``jobs``.
    """
    jobs_list, skipped = [], []
    for regime in config.regimes:
        if not regime.deploys:
            good, why = eligibility(dataset, regime, dataset.t_max)
            if not good:
                raise DriftEvalError(f"all_period: {why}")
            jobs_list += [(regime, None, s) for s in config.seeds]
            continue
        times, skip = deployment_times(dataset, config, regime)
        for d, why in skip:
            logger.info("skip %s deploy=%d: %s", regime.name, d, why)
            skipped.append((regime.name, d, None, why))
        if not times:
            raise DriftEvalError(f"{regime.name}: no eligible deployment times")
        jobs_list += [(regime, d, s) for d in times for s in config.seeds]

    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(dataset, config)) as ex:
            outputs = list(ex.map(_run_cell, jobs_list, chunksize=1))
    else:
        outputs = [run_cell(dataset, config, *job) for job in jobs_list]

    records, models = [], {}
    for (regime, d, seed), (recs, mods, why) in zip(jobs_list, outputs):
        if why is not None:
            logger.info("skip %s deploy=%s seed=%d: %s", regime.name, d, seed, why)
            skipped.append((regime.name, d, seed, why))
            continue
        records += recs
        models.update(mods)
    return ResultTable(records, fingerprint(config, dataset), models, skipped)


# --------------------------------------------------------------------------- summaries

@dataclass(frozen=True)
class DeltaRow:
    staleness: int
    model: str
    regime: str
    mean: float
    std: float
    n_cells: int
    n_missing: int


def staleness_delta(table: ResultTable, baseline=(LR, RegimeKind.ALL_HISTORICAL.value),
                    metric: str = "auroc") -> list[DeltaRow]:
    """Per-staleness mean/std of ``metric(candidate) - metric(baseline)`` over matched cells.

    Cells are matched on ``(deploy_time, eval_time, seed)``. Cells whose
    baseline is absent or undefined are excluded and counted in ``n_missing``.
    """
    base_model, base_regime = baseline
    base = {(r.deploy_time, r.eval_time, r.seed): r.value
            for r in table.select(model=base_model, regime=base_regime, metric=metric)}
    deltas = defaultdict(list)
    missing = defaultdict(int)
    for r in table.records:
        if r.metric != metric or r.regime == RegimeKind.ALL_PERIOD.value:
            continue
        key = (r.model, r.regime, r.staleness)
        b = base.get((r.deploy_time, r.eval_time, r.seed))
        if b is None or math.isnan(b) or math.isnan(r.value):
            missing[key] += 1
            continue
        deltas[key].append(r.value - b)
    rows = []
    for key in sorted(set(deltas) | set(missing)):
        model, regime, s = key
        vals = deltas.get(key, [])
        mean, std = aggregate_seeds(vals) if vals else (float("nan"), float("nan"))
        rows.append(DeltaRow(s, model, regime, mean, std, len(vals), missing.get(key, 0)))
    return rows


def mean_curve(table: ResultTable, regime: str, model: str, metric: str = "auroc") -> dict:
    """``{(deploy_time, eval_time): (mean, std)}`` across seeds, ignoring undefined values."""
    cells = defaultdict(list)
    for r in table.select(regime=regime, model=model, metric=metric):
        if not math.isnan(r.value):
            cells[(r.deploy_time, r.eval_time)].append(r.value)
    return {k: aggregate_seeds(v) for k, v in sorted(cells.items())}


def max_auroc_drop(table: ResultTable, regime: str, model: str, metric: str = "auroc"):
    """``[(deploy_time, drop)]`` with drop = staleness-0 mean minus the lowest later mean."""
    curve = mean_curve(table, regime, model, metric)
    out = []
    for d in sorted({d for d, e in curve if d == e}):
        future = [m for (dd, e), (m, _) in curve.items() if dd == d and e > d]
        out.append((d, curve[(d, d)][0] - min(future) if future else 0.0))
    return out
