"""Synthetic timestamped data with scripted distribution-shift events.

Labels follow a linear-logistic model. At time ``t`` a row's label is drawn
with probability ``sigmoid(sum of active feature effects + logit(rate(t)))``,
where ``rate(t)`` is the scripted base rate. Features outside their active
window are written as missing cells. Numerical features are standard normal;
binary features take ``"yes"``/``"no"`` with equal odds and contribute
``+weight``/``-weight``.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit, logit

from .data import CATEGORICAL, NUMERICAL, FeatureSpec, TemporalDataset
from .errors import ScriptError, UnsupportedScriptError
from .metrics import auroc
from .regimes import RegimeSpec, in_period_range

NUMERIC, BINARY = "numerical", "binary"
LINEAR, QUADRATIC = "linear", "quadratic"


class DegenerateScriptWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SynthFeature:
    name: str
    weight: float = 0.0
    kind: str = NUMERIC
    effect: str = LINEAR


@dataclass(frozen=True)
class FeatureIntroduced:
    feature: str
    time: int
    weight: float
    kind: str = NUMERIC


@dataclass(frozen=True)
class FeatureRemoved:
    feature: str
    time: int


@dataclass(frozen=True)
class SampleSurge:
    time: int
    multiplier: float


@dataclass(frozen=True)
class PrevalenceDrift:
    start: int
    end: int
    start_rate: float
    end_rate: float


_EVENT_TYPES = {
    "feature_introduced": FeatureIntroduced,
    "feature_removed": FeatureRemoved,
    "sample_surge": SampleSurge,
    "prevalence_drift": PrevalenceDrift,
}
_EVENT_NAMES = {v: k for k, v in _EVENT_TYPES.items()}


@dataclass(frozen=True)
class ShiftScript:
    n_time_points: int
    rows_per_time: int
    features: tuple = ()
    events: tuple = ()
    base_rate: float = 0.5
    start_time: int = 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "events", tuple(self.events))
        self.validate()

    # ---- validation and serialization

    @property
    def t_min(self):
        return self.start_time

    @property
    def t_max(self):
        return self.start_time + self.n_time_points - 1

    @property
    def time_points(self):
        return range(self.t_min, self.t_max + 1)

    def validate(self):
        if self.n_time_points < 2:
            raise ScriptError("need at least 2 time points")
        if self.rows_per_time < 1:
            raise ScriptError("rows_per_time must be positive")
        if not 0 < self.base_rate < 1:
            raise ScriptError(f"base_rate {self.base_rate} not in (0, 1)")
        names = [f.name for f in self.features]
        for f in self.features:
            if f.kind not in (NUMERIC, BINARY) or f.effect not in (LINEAR, QUADRATIC):
                raise ScriptError(f"feature {f.name!r}: bad kind/effect")
        for ev in self.events:
            times = (ev.start, ev.end) if isinstance(ev, PrevalenceDrift) else (ev.time,)
            for t in times:
                if not self.t_min <= t <= self.t_max:
                    raise ScriptError(f"{_EVENT_NAMES[type(ev)]} time {t} outside "
                                      f"[{self.t_min}, {self.t_max}]")
            if isinstance(ev, FeatureIntroduced):
                if ev.kind not in (NUMERIC, BINARY):
                    raise ScriptError(f"feature {ev.feature!r}: bad kind {ev.kind!r}")
                if ev.feature not in names:
                    names.append(ev.feature)
            elif isinstance(ev, FeatureRemoved) and ev.feature not in names:
                raise ScriptError(f"cannot remove unknown feature {ev.feature!r}")
            elif isinstance(ev, SampleSurge) and not ev.multiplier >= 1:
                raise ScriptError(f"surge multiplier {ev.multiplier} < 1")
            elif isinstance(ev, PrevalenceDrift):
                if ev.end < ev.start:
                    raise ScriptError("prevalence drift ends before it starts")
                for r in (ev.start_rate, ev.end_rate):
                    if not 0 < r < 1:
                        raise ScriptError(f"rate {r} not in (0, 1)")
        if len(set(f.name for f in self.features)) != len(self.features):
            raise ScriptError("duplicate feature names")

    @classmethod
    def from_dict(cls, d: dict) -> "ShiftScript":
        try:
            feats = tuple(SynthFeature(**f) for f in d.get("features", ()))
            events = []
            for e in d.get("events", ()):
                e = dict(e)
                events.append(_EVENT_TYPES[e.pop("type")](**e))
            return cls(int(d["n_time_points"]), int(d["rows_per_time"]), feats, tuple(events),
                       float(d.get("base_rate", 0.5)), int(d.get("start_time", 0)),
                       int(d.get("seed", 0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScriptError(f"invalid shift script: {exc!r}") from exc

    @classmethod
    def from_json(cls, path) -> "ShiftScript":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ScriptError(f"cannot read script {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "n_time_points": self.n_time_points, "rows_per_time": self.rows_per_time,
            "base_rate": self.base_rate, "start_time": self.start_time, "seed": self.seed,
            "features": [asdict(f) for f in self.features],
            "events": [{"type": _EVENT_NAMES[type(e)], **asdict(e)} for e in self.events],
        }

    # ---- scripted quantities

    def all_features(self) -> list[SynthFeature]:
        """Base features then introduced ones, in first-appearance order."""
        out = {f.name: f for f in self.features}
        for ev in self.events:
            if isinstance(ev, FeatureIntroduced) and ev.feature not in out:
                out[ev.feature] = SynthFeature(ev.feature, ev.weight, ev.kind)
        return list(out.values())

    def active(self, t: int) -> dict:
        """``{feature: weight}`` for features observed at time ``t``."""
        introduced = {ev.feature for ev in self.events if isinstance(ev, FeatureIntroduced)}
        state = {f.name: f.weight for f in self.features if f.name not in introduced}
        timed = sorted((ev for ev in self.events if isinstance(ev, (FeatureIntroduced, FeatureRemoved))),
                       key=lambda ev: ev.time)
        for ev in timed:
            if ev.time > t:
                break
            if isinstance(ev, FeatureIntroduced):
                state[ev.feature] = ev.weight
            else:
                state.pop(ev.feature, None)
        return state

    def rows_at(self, t: int) -> int:
        m = 1.0
        for ev in self.events:
            if isinstance(ev, SampleSurge) and t >= ev.time:
                m *= ev.multiplier
        return int(round(self.rows_per_time * m))

    def rate(self, t: int) -> float:
        r = self.base_rate
        for ev in sorted((e for e in self.events if isinstance(e, PrevalenceDrift)),
                         key=lambda e: e.start):
            if t >= ev.end:
                r = ev.end_rate
            elif t >= ev.start:
                frac = (t - ev.start) / (ev.end - ev.start)
                r = ev.start_rate + frac * (ev.end_rate - ev.start_rate)
        return r

    def schema(self) -> dict:
        return {
            "entity": "entity_id", "time": "time", "label": "label",
            "features": [{"name": f.name, "kind": CATEGORICAL if f.kind == BINARY else NUMERICAL}
                         for f in self.all_features()],
            "t_min": self.t_min, "t_max": self.t_max,
        }


def _effect(f: SynthFeature, x):
    if f.kind == BINARY:
        x = 2.0 * x - 1.0
    return x * x - 1.0 if f.effect == QUADRATIC else x


def _draw(script: ShiftScript):
    """Raw draws per time point: ``[(t, {feature: values}, labels)]``."""
    rng = np.random.default_rng(script.seed)
    feats = script.all_features()
    out = []
    for t in script.time_points:
        n = script.rows_at(t)
        raw = {f.name: (rng.integers(0, 2, n).astype(float) if f.kind == BINARY
                        else rng.standard_normal(n)) for f in feats}
        act = script.active(t)
        score = np.full(n, logit(script.rate(t)))
        for f in feats:
            if f.name in act:
                score += act[f.name] * _effect(f, raw[f.name])
        y = (rng.random(n) < expit(score)).astype(np.int64)
        out.append((t, raw, y))
    return out


def generate(script: ShiftScript) -> TemporalDataset:
    feats = script.all_features()
    if not any(w != 0 for t in script.time_points for w in script.active(t).values()):
        warnings.warn("script never activates an informative feature", DegenerateScriptWarning,
                      stacklevel=2)
    ents, times, labels = [], [], []
    cols = {f.name: [] for f in feats}
    for t, raw, y in _draw(script):
        act = script.active(t)
        n = len(y)
        ents += [f"e{t}-{i}" for i in range(n)]
        times += [t] * n
        labels += y.tolist()
        for f in feats:
            if f.name not in act:
                cols[f.name] += [None] * n
            elif f.kind == BINARY:
                cols[f.name] += ["yes" if v else "no" for v in raw[f.name]]
            else:
                cols[f.name] += raw[f.name].tolist()
    specs = [FeatureSpec(f.name, CATEGORICAL if f.kind == BINARY else NUMERICAL) for f in feats]
    return TemporalDataset(specs, ents, times, labels, cols, t_min=script.t_min, t_max=script.t_max)


# --------------------------------------------------------------------------- golden reference

@dataclass(frozen=True)
class GoldenCell:
    deploy_time: int
    eval_time: int
    auroc: float
    se: float
    band: tuple = field(default=(float("nan"), float("nan")))


def hanley_mcneil_se(a: float, n_pos: int, n_neg: int) -> float:
    q1 = a / (2 - a)
    q2 = 2 * a * a / (1 + a)
    var = (a * (1 - a) + (n_pos - 1) * (q1 - a * a) + (n_neg - 1) * (q2 - a * a)) / (n_pos * n_neg)
    return float(np.sqrt(max(var, 0.0)))


def observable_features(script: ShiftScript, regime: RegimeSpec, deploy_time: int) -> set:
    lo, hi = in_period_range(regime, deploy_time, script.t_min, script.t_max)
    seen = set()
    for t in range(lo, hi + 1):
        seen |= set(script.active(t))
    return seen


def golden_scores(script: ShiftScript, dataset: TemporalDataset, weights: dict, rows) -> np.ndarray:
    """True linear score of ``rows`` from ``{feature: weight}``; missing cells contribute 0."""
    by_name = {f.name: f for f in script.all_features()}
    score = np.zeros(len(rows))
    for name in sorted(weights):
        f = by_name[name]
        col = dataset.values[name][rows]
        if f.kind == BINARY:
            levels = dataset.levels[name]
            yes = levels.index("yes") if "yes" in levels else -2
            x = np.where(col < 0, np.nan, (col == yes).astype(float))
        else:
            x = col.astype(float)
        score += np.where(np.isnan(x), 0.0, weights[name] * _effect(f, np.nan_to_num(x)))
    return score


def golden_curve(script: ShiftScript, regime: RegimeSpec, dataset: TemporalDataset = None,
                 band_sigmas: float = 3.0) -> list[GoldenCell]:
    """Bayes-score AUROC per (deploy, eval) cell.

    Eval rows are ranked by the true coefficients restricted to features the
    regime could have observed up to the deploy time. Under all-period training
    every feature is observable and one cell per time point is returned.
    ``band`` is ``auroc ± band_sigmas`` Hanley-McNeil standard errors.
    """
    feats = script.all_features()
    if any(f.effect != LINEAR for f in feats):
        raise UnsupportedScriptError("golden curve needs purely linear effects")
    if dataset is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateScriptWarning)
            dataset = generate(script)
    if regime.deploys:
        pairs = [(d, e) for d in script.time_points for e in script.time_points if e >= d]
    else:
        pairs = [(t, t) for t in script.time_points]
    cells = []
    for d, e in pairs:
        usable = (observable_features(script, regime, d) if regime.deploys
                  else {f.name for f in feats}) & set(script.active(e))
        rows = dataset.rows_at(e)
        y = dataset.labels[rows]
        n_pos = int(y.sum())
        n_neg = len(y) - n_pos
        if n_pos == 0 or n_neg == 0:
            cells.append(GoldenCell(d, e, float("nan"), float("nan")))
            continue
        weights = {k: w for k, w in script.active(e).items() if k in usable}
        a = auroc(golden_scores(script, dataset, weights, rows), y)
        se = hanley_mcneil_se(a, n_pos, n_neg)
        cells.append(GoldenCell(d, e, a, se, (a - band_sigmas * se, a + band_sigmas * se)))
    return cells
