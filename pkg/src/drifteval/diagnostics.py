"""Diagnostic-plot data and rendering.

A report bundles importance trajectories (absolute LR coefficients per
deployment time), prevalence trajectories of dummy columns, the max-drop series
and the missingness grid. :func:`render_report` writes one SVG and one CSV per
panel.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import (MISSING_LEVEL, UNSEEN_LEVEL, MissingnessProfile, TemporalDataset,
                   missingness_profile)
from .engine import ResultTable, max_auroc_drop, mean_curve
from .errors import DomainError, RenderError
from .models.base import LR
from .regimes import RegimeKind

PANELS = ("auroc_over_time", "max_drop", "importance", "prevalence", "missingness")


@dataclass
class ImportanceMatrix:
    features: list
    times: list
    values: np.ndarray      # (n_features, n_times), >= 0

    def get(self, feature, t) -> float:
        return float(self.values[self.features.index(feature), self.times.index(t)])


@dataclass
class PrevalenceMatrix:
    features: list
    times: list
    positive: np.ndarray    # (n_features, n_times) int
    counts: np.ndarray      # (n_times,) int

    @property
    def values(self) -> np.ndarray:
        """Proportions, ``NaN`` where a time point has no records."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.counts > 0, self.positive / np.maximum(self.counts, 1), np.nan)


@dataclass
class DiagnosticReport:
    importance: ImportanceMatrix
    prevalence: PrevalenceMatrix
    selected_features: list
    max_drop: list
    missingness: MissingnessProfile
    regime: str = RegimeKind.SLIDING_WINDOW.value
    model: str = LR


def coefficient_trajectories(models) -> ImportanceMatrix:
    """Absolute LR coefficients per deployment time over the union of columns.

    ``models`` maps deployment time to a trained LR model. A column a given
    deployment's encoder did not produce gets importance 0.
    """
    items = sorted(dict(models).items())
    features = []
    seen = set()
    for _, m in items:
        if m.kind != LR:
            raise DomainError(f"coefficient trajectories need LR models, got {m.kind}")
        for c in m.column_names:
            if c not in seen:
                seen.add(c)
                features.append(c)
    pos = {c: i for i, c in enumerate(features)}
    values = np.zeros((len(features), len(items)))
    for j, (_, m) in enumerate(items):
        values[[pos[c] for c in m.column_names], j] = np.abs(np.asarray(m.params["coef"], float))
    return ImportanceMatrix(features, [int(t) for t, _ in items], values)


def prevalence_trajectories(dataset: TemporalDataset, features) -> PrevalenceMatrix:
    """Share of records per time point whose dummy column ``feature=level`` is 1."""
    offs = dataset.times - dataset.t_min
    n_t = dataset.t_max - dataset.t_min + 1
    counts = np.bincount(offs, minlength=n_t)
    positive = np.zeros((len(features), n_t), dtype=np.int64)
    for i, col in enumerate(features):
        name, sep, level = col.partition("=")
        if not sep or name not in dataset.levels:
            raise DomainError(f"{col!r} is not a dummy column of a categorical feature")
        codes = dataset.values[name]
        if level == MISSING_LEVEL:
            hit = codes < 0
        elif level == UNSEEN_LEVEL or level not in dataset.levels[name]:
            hit = np.zeros(len(codes), bool)
        else:
            hit = codes == dataset.levels[name].index(level)
        positive[i] = np.bincount(offs[hit], minlength=n_t)
    return PrevalenceMatrix(list(features), [int(t) for t in dataset.time_points], positive, counts)


def select_top_features(importance: ImportanceMatrix, prevalence: PrevalenceMatrix, k: int):
    """Top ``k`` features by (peak importance / global peak) x (peak prevalence).

    Only features present in both matrices are eligible; ties break
    lexicographically.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    top = float(importance.values.max()) if importance.values.size else 0.0
    prev = prevalence.values
    scored = []
    for f in set(importance.features) & set(prevalence.features):
        imp = importance.values[importance.features.index(f)].max()
        pv = prev[prevalence.features.index(f)]
        peak = float(np.nanmax(pv)) if np.any(~np.isnan(pv)) else 0.0
        scored.append((-(imp / top if top > 0 else 0.0) * peak, f))
    return [f for _, f in sorted(scored)[:k]]


def build_report(table: ResultTable, dataset: TemporalDataset, models=None,
                 regime: str = RegimeKind.SLIDING_WINDOW.value, k: int = 5, seed=None):
    """Assemble a :class:`DiagnosticReport` from a run.

    ``models`` defaults to ``table.models``; trajectories use the LR models of
    ``regime`` at the lowest available seed unless ``seed`` is given.
    """
    models = table.models if models is None else models
    lr = {key: m for key, m in models.items() if key[0] == regime and key[1] == LR}
    if not lr:
        raise DomainError(f"no LR models for regime {regime!r}")
    seed = min(key[2] for key in lr) if seed is None else seed
    per_time = {key[3]: m for key, m in lr.items() if key[2] == seed}
    importance = coefficient_trajectories(per_time)
    dummies = [c for c in importance.features
               if c.partition("=")[0] in dataset.levels and "=" in c]
    prevalence = prevalence_trajectories(dataset, dummies)
    return DiagnosticReport(importance, prevalence, select_top_features(importance, prevalence, k)
                            if dummies else [], max_auroc_drop(table, regime, LR),
                            missingness_profile(dataset), regime, LR)


# --------------------------------------------------------------------------- panel data

def _num(v) -> str:
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def panel_tables(report: DiagnosticReport, table: ResultTable) -> dict:
    """CSV text per panel, keyed by panel name."""
    rows = []
    curve = mean_curve(table, report.regime, report.model)
    for (d, e), (m, s) in curve.items():
        rows.append([f"deploy={d}", report.regime, d, e, _num(m), _num(s)])
    ref = mean_curve(table, RegimeKind.ALL_PERIOD.value, report.model)
    for (d, e), (m, s) in ref.items():
        rows.append(["reference", RegimeKind.ALL_PERIOD.value, d, e, _num(m), _num(s)])
    out = {"auroc_over_time": _csv(["series", "regime", "deploy_time", "eval_time", "mean", "std"], rows)}
    out["max_drop"] = _csv(["deploy_time", "drop"], [[d, _num(v)] for d, v in report.max_drop])
    imp = report.importance
    out["importance"] = _csv(
        ["feature", "deploy_time", "importance"],
        [[f, t, _num(imp.values[i, j])] for i, f in enumerate(imp.features) for j, t in enumerate(imp.times)])
    prev = report.prevalence
    pv = prev.values
    out["prevalence"] = _csv(
        ["feature", "time", "positive", "n", "proportion", "selected"],
        [[f, t, int(prev.positive[i, j]), int(prev.counts[j]), _num(pv[i, j]),
          int(f in report.selected_features)]
         for i, f in enumerate(prev.features) for j, t in enumerate(prev.times)])
    mp = report.missingness
    fr = mp.fraction
    out["missingness"] = _csv(
        ["feature", "time", "missing", "n", "fraction"],
        [[f, int(t), int(mp.missing[i, j]), int(mp.counts[j]), _num(fr[i, j])]
         for i, f in enumerate(mp.features) for j, t in enumerate(mp.times)])
    return out


def read_panel_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def read_matrix(path, row_key: str, col_key: str, value_key: str):
    """Rebuild ``(rows, cols, matrix)`` from a long-format panel CSV."""
    recs = read_panel_csv(path)
    rows = list(dict.fromkeys(r[row_key] for r in recs))
    cols = list(dict.fromkeys(int(r[col_key]) for r in recs))
    mat = np.full((len(rows), len(cols)), np.nan)
    ri = {k: i for i, k in enumerate(rows)}
    ci = {k: j for j, k in enumerate(cols)}
    for r in recs:
        mat[ri[r[row_key]], ci[int(r[col_key])]] = float(r[value_key])
    return rows, cols, mat


# --------------------------------------------------------------------------- rendering

def _figure():
    from matplotlib.figure import Figure
    return Figure(figsize=(7, 4.5))


def _svg_bytes(fig) -> bytes:
    import matplotlib
    buf = io.BytesIO()
    with matplotlib.rc_context({"svg.hashsalt": "drifteval", "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    return buf.getvalue()


def _plot_auroc(report, table):
    fig = _figure()
    ax = fig.add_subplot()
    curve = mean_curve(table, report.regime, report.model)
    for d in sorted({d for d, _ in curve}):
        pts = sorted((e, m, s) for (dd, e), (m, s) in curve.items() if dd == d)
        es, ms, ss = zip(*pts)
        ax.errorbar(es, ms, yerr=ss, linewidth=1, capsize=2)
        ax.plot([es[0]], [ms[0]], "o", color="black", markersize=3)
    ref = mean_curve(table, RegimeKind.ALL_PERIOD.value, report.model)
    if ref:
        es, ms = zip(*sorted((e, m) for (_, e), (m, _) in ref.items()))
        ax.plot(es, ms, ":", color="red", linewidth=2, label="all-period")
        ax.legend(loc="lower right")
    ax.set_xlabel("evaluation time")
    ax.set_ylabel("AUROC")
    ax.set_title(f"{report.model} {report.regime}")
    return fig


def _plot_drop(report):
    fig = _figure()
    ax = fig.add_subplot()
    if report.max_drop:
        ds, vs = zip(*report.max_drop)
        ax.bar(ds, vs, color="tab:gray")
    ax.set_xlabel("deployment time")
    ax.set_ylabel("max AUROC drop")
    return fig


def _plot_lines(features, times, values, ylabel, xlabel, highlight=()):
    fig = _figure()
    ax = fig.add_subplot()
    for i, f in enumerate(features):
        strong = not highlight or f in highlight
        ax.plot(times, values[i], linewidth=1.5 if strong else 0.6, alpha=1.0 if strong else 0.25,
                label=f if strong else None)
    if features:
        ax.legend(loc="upper left", fontsize=6)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig


def _plot_missingness(mp: MissingnessProfile):
    fig = _figure()
    ax = fig.add_subplot()
    im = ax.imshow(mp.fraction, aspect="auto", cmap="Greys", vmin=0, vmax=1, interpolation="nearest")
    ax.set_yticks(range(len(mp.features)), labels=list(mp.features), fontsize=6)
    step = max(1, len(mp.times) // 12)
    ax.set_xticks(range(0, len(mp.times), step), labels=[str(t) for t in mp.times[::step]])
    ax.set_xlabel("time")
    fig.colorbar(im, ax=ax, label="missing fraction")
    return fig


def render_report(report: DiagnosticReport, table: ResultTable, out_dir) -> list:
    """Write ``<panel>.svg`` and ``<panel>.csv`` for every panel; return the paths.

    Everything is rendered in memory first, so a failure leaves no partial set.
    """
    if not len(table):
        raise RenderError("result table is empty; nothing to render")
    data = panel_tables(report, table)
    imp, prev = report.importance, report.prevalence
    figures = {
        "auroc_over_time": _plot_auroc(report, table),
        "max_drop": _plot_drop(report),
        "importance": _plot_lines(imp.features, imp.times, imp.values, "|coefficient|",
                                  "deployment time", report.selected_features),
        "prevalence": _plot_lines(
            [f for f in prev.features if f in report.selected_features], prev.times,
            prev.values[[prev.features.index(f) for f in prev.features
                         if f in report.selected_features]], "positive proportion", "time"),
        "missingness": _plot_missingness(report.missingness),
    }
    blobs = {}
    for name in PANELS:
        blobs[f"{name}.svg"] = _svg_bytes(figures[name])
        blobs[f"{name}.csv"] = data[name].encode("utf-8")
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise RenderError(f"cannot create {out}: {exc}") from exc
    for fname in sorted(blobs):
        path = out / fname
        try:
            path.write_bytes(blobs[fname])
        except OSError as exc:
            for p in written:
                p.unlink(missing_ok=True)
            raise RenderError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    return written
