"""Timestamped tabular data: loading, first-entry filtering, encoding, missingness.

A :class:`TemporalDataset` is stored column-wise. Numerical features are float
arrays with ``NaN`` marking a missing cell; categorical features are integer
code arrays (``-1`` = missing) into a lexicographically sorted level table.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, EmptyDatasetError, SchemaError

logger = logging.getLogger(__name__)

CATEGORICAL = "categorical"
NUMERICAL = "numerical"
MISSING_LEVEL = "<missing>"
UNSEEN_LEVEL = "<unseen>"
MISSING_TOKENS = ("", "NA")


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, NUMERICAL):
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class TemporalRecord:
    entity_id: str
    time_index: int
    raw_values: tuple
    label: int


class TemporalDataset:
    """Rows of (entity, integer time point, features, binary label).

    Parameters
    ----------
    specs : sequence of FeatureSpec
    entity_ids, times, labels : array-like, one entry per row
    columns : mapping of feature name to raw cells (``None`` = missing)
    t_min, t_max : int, optional
        Declared study range. Defaults to the observed range.
    """

    def __init__(self, specs, entity_ids, times, labels, columns, t_min=None, t_max=None):
        self.specs = tuple(specs)
        names = [s.name for s in self.specs]
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        self.entity_ids = np.asarray([str(e) for e in entity_ids], dtype=object)
        self.times = np.asarray(times, dtype=np.int64).reshape(-1)
        self.labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        n = len(self.times)
        if n == 0:
            raise EmptyDatasetError("dataset has zero rows")
        if len(self.entity_ids) != n or len(self.labels) != n:
            raise SchemaError("entity, time and label columns differ in length")
        bad = np.flatnonzero((self.labels != 0) & (self.labels != 1))
        if bad.size:
            raise DataError(f"label {self.labels[bad[0]]} is not binary", row=int(bad[0]))

        self.values: dict[str, np.ndarray] = {}
        self.levels: dict[str, tuple[str, ...]] = {}
        for spec in self.specs:
            if spec.name not in columns:
                raise SchemaError(f"missing column for feature {spec.name!r}")
            col = columns[spec.name]
            if isinstance(col, tuple) and len(col) == 2 and spec.kind == CATEGORICAL:
                # pre-coded (levels, codes) pair, used internally by subset()
                self.levels[spec.name], self.values[spec.name] = col
                continue
            cells = list(col)
            if len(cells) != n:
                raise SchemaError(f"column {spec.name!r} has {len(cells)} cells, expected {n}")
            if spec.kind == NUMERICAL:
                arr = np.array([np.nan if c is None else float(c) for c in cells], dtype=float)
                if np.isinf(arr).any():
                    raise DataError(f"non-finite value in {spec.name!r}",
                                    row=int(np.flatnonzero(np.isinf(arr))[0]))
                self.values[spec.name] = arr
            else:
                levels = tuple(sorted({str(c) for c in cells if c is not None}))
                lut = {lv: i for i, lv in enumerate(levels)}
                self.levels[spec.name] = levels
                self.values[spec.name] = np.array(
                    [-1 if c is None else lut[str(c)] for c in cells], dtype=np.int64)

        obs_min, obs_max = int(self.times.min()), int(self.times.max())
        self.t_min = obs_min if t_min is None else int(t_min)
        self.t_max = obs_max if t_max is None else int(t_max)
        if obs_min < self.t_min or obs_max > self.t_max:
            raise DataError(f"time index outside declared range [{self.t_min}, {self.t_max}]")
        if self.t_max <= self.t_min:
            raise DataError("dataset needs at least 2 distinct time points")

    @classmethod
    def from_records(cls, specs: Sequence[FeatureSpec], records: Iterable[TemporalRecord],
                     t_min=None, t_max=None) -> "TemporalDataset":
        records = list(records)
        columns = {s.name: [r.raw_values[j] for r in records] for j, s in enumerate(specs)}
        return cls(specs, [r.entity_id for r in records], [r.time_index for r in records],
                   [r.label for r in records], columns, t_min=t_min, t_max=t_max)

    def __len__(self):
        return len(self.times)

    @property
    def feature_names(self) -> list[str]:
        return [s.name for s in self.specs]

    @property
    def time_points(self) -> np.ndarray:
        return np.arange(self.t_min, self.t_max + 1)

    def spec(self, name: str) -> FeatureSpec:
        for s in self.specs:
            if s.name == name:
                return s
        raise KeyError(name)

    def cell(self, name: str, row: int):
        v = self.values[name][row]
        if name in self.levels:
            return None if v < 0 else self.levels[name][v]
        return None if np.isnan(v) else float(v)

    def missing_mask(self, name: str) -> np.ndarray:
        v = self.values[name]
        return v < 0 if name in self.levels else np.isnan(v)

    @property
    def records(self) -> list[TemporalRecord]:
        names = self.feature_names
        return [
            TemporalRecord(str(self.entity_ids[i]), int(self.times[i]),
                           tuple(self.cell(nm, i) for nm in names), int(self.labels[i]))
            for i in range(len(self))
        ]

    def rows_at(self, t: int) -> np.ndarray:
        return np.flatnonzero(self.times == t)

    def counts_per_time(self) -> dict[int, int]:
        counts = np.bincount(self.times - self.t_min, minlength=self.t_max - self.t_min + 1)
        return {int(t): int(c) for t, c in zip(self.time_points, counts)}

    def subset(self, idx) -> "TemporalDataset":
        idx = np.asarray(idx, dtype=np.int64)
        columns = {}
        for s in self.specs:
            if s.kind == CATEGORICAL:
                columns[s.name] = (self.levels[s.name], self.values[s.name][idx])
            else:
                columns[s.name] = self.values[s.name][idx]
        return TemporalDataset(self.specs, self.entity_ids[idx], self.times[idx],
                               self.labels[idx], columns, t_min=self.t_min, t_max=self.t_max)

    def schema(self, entity="entity_id", time="time", label="label") -> dict:
        return {
            "entity": entity, "time": time, "label": label,
            "features": [{"name": s.name, "kind": s.kind} for s in self.specs],
            "t_min": self.t_min, "t_max": self.t_max,
        }

    def to_csv(self, path=None, entity="entity_id", time="time", label="label") -> str:
        """Serialize in the loader's format. Numbers use ``repr`` so they round-trip."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([entity, time, label] + self.feature_names)
        for i in range(len(self)):
            cells = []
            for nm in self.feature_names:
                c = self.cell(nm, i)
                cells.append("NA" if c is None else (repr(c) if isinstance(c, float) else c))
            w.writerow([self.entity_ids[i], int(self.times[i]), int(self.labels[i])] + cells)
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(self.schema(), sort_keys=True).encode())
        h.update(self.to_csv().encode())
        return h.hexdigest()


# --------------------------------------------------------------------------- loading

def _parse_time(text: str, fmt: str) -> int:
    if fmt == "int":
        return int(text)
    if fmt == "year-month":
        year, month = text.split("-")[:2]
        m = int(month)
        if not 1 <= m <= 12:
            raise ValueError(text)
        return int(year) * 12 + m - 1
    raise SchemaError(f"unknown time_format {fmt!r}")


def parse_schema(schema) -> dict:
    """Normalize a schema given as a dict or a path to a JSON document."""
    if isinstance(schema, (str, Path)):
        try:
            schema = json.loads(Path(schema).read_text(encoding="utf-8"))
        except OSError as exc:
            raise SchemaError(f"cannot read schema {schema}: {exc}") from exc
    if not isinstance(schema, Mapping):
        raise SchemaError("schema must be a JSON object")
    for key in ("entity", "time", "label", "features"):
        if key not in schema:
            raise SchemaError(f"schema lacks {key!r}")
    feats = schema["features"]
    if isinstance(feats, Mapping):
        specs = [FeatureSpec(k, v) for k, v in feats.items()]
    else:
        specs = [f if isinstance(f, FeatureSpec) else FeatureSpec(f["name"], f["kind"]) for f in feats]
    out = dict(schema)
    out["features"] = specs
    out.setdefault("time_format", "int")
    return out


def load_dataset(path, schema) -> TemporalDataset:
    """Read a comma-separated file with a header row into a :class:`TemporalDataset`.

    ``schema`` names the entity, time and label columns and gives each feature's
    kind. Empty cells and the literal ``NA`` are missing. Raises
    :class:`SchemaError` for absent columns, :class:`DataError` (with the
    1-based data row number) for unparsable labels/times/numbers and
    :class:`EmptyDatasetError` for a file with no data rows.
    """
    sch = parse_schema(schema)
    specs: list[FeatureSpec] = sch["features"]
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyDatasetError(f"{path} is empty")
        pos = {name: j for j, name in enumerate(header)}
        wanted = [sch["entity"], sch["time"], sch["label"]] + [s.name for s in specs]
        absent = [c for c in wanted if c not in pos]
        if absent:
            raise SchemaError(f"columns not found in {path.name}: {', '.join(absent)}")
        ents, times, labels = [], [], []
        cols: dict[str, list] = {s.name: [] for s in specs}
        for rownum, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise DataError(f"expected {len(header)} cells, got {len(row)}", row=rownum)
            ents.append(row[pos[sch["entity"]]])
            try:
                times.append(_parse_time(row[pos[sch["time"]]].strip(), sch["time_format"]))
            except (ValueError, IndexError):
                raise DataError(f"time {row[pos[sch['time']]]!r} is not parsable",
                                row=rownum) from None
            lab = row[pos[sch["label"]]].strip()
            if lab not in ("0", "1"):
                raise DataError(f"label {lab!r} is not 0 or 1", row=rownum)
            labels.append(int(lab))
            for s in specs:
                raw = row[pos[s.name]]
                if raw.strip() in MISSING_TOKENS:
                    cols[s.name].append(None)
                elif s.kind == NUMERICAL:
                    try:
                        v = float(raw)
                    except ValueError:
                        raise DataError(f"{s.name}={raw!r} is not numeric", row=rownum) from None
                    if not math.isfinite(v):
                        raise DataError(f"{s.name}={raw!r} is not finite", row=rownum)
                    cols[s.name].append(v)
                else:
                    cols[s.name].append(raw)
    if not times:
        raise EmptyDatasetError(f"{path} has no data rows")
    ds = TemporalDataset(specs, ents, times, labels, cols,
                         t_min=sch.get("t_min"), t_max=sch.get("t_max"))
    logger.info("loaded %d rows from %s; rows per time point: %s",
                len(ds), path, ds.counts_per_time())
    return ds


def first_entry_filter(dataset: TemporalDataset) -> TemporalDataset:
    """Keep each entity's earliest record; ties go to the first row in input order."""
    best: dict[str, int] = {}
    for i, (e, t) in enumerate(zip(dataset.entity_ids, dataset.times)):
        j = best.get(e)
        if j is None or t < dataset.times[j]:
            best[e] = i
    keep = np.array(sorted(best.values()), dtype=np.int64)
    if len(keep) == len(dataset):
        return dataset
    return dataset.subset(keep)


# --------------------------------------------------------------------------- encoding

@dataclass(frozen=True)
class Encoder:
    """Per-feature one-hot levels and scaling statistics learned from fit rows."""

    specs: tuple
    levels: dict           # categorical name -> tuple of fitted levels (sorted)
    mean: dict             # numerical name -> float
    std: dict              # numerical name -> float
    flagged: tuple = ()    # numerical features with no observed fit cells

    @property
    def column_names(self) -> list[str]:
        names = []
        for s in self.specs:
            if s.kind == CATEGORICAL:
                names += [f"{s.name}={lv}" for lv in self.levels[s.name]]
                names += [f"{s.name}={MISSING_LEVEL}", f"{s.name}={UNSEEN_LEVEL}"]
            else:
                names.append(s.name)
        return names


@dataclass
class EncodedMatrix:
    column_names: list
    rows: np.ndarray
    labels: np.ndarray = field(default=None)

    @property
    def X(self):
        return self.rows

    @property
    def y(self):
        return self.labels

    def __len__(self):
        return self.rows.shape[0]


def fit_encoder(dataset: TemporalDataset, fit_row_indices) -> Encoder:
    idx = np.asarray(fit_row_indices, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("fit_row_indices is empty")
    levels, mean, std, flagged = {}, {}, {}, []
    for s in dataset.specs:
        col = dataset.values[s.name][idx]
        if s.kind == CATEGORICAL:
            codes = np.unique(col[col >= 0])
            levels[s.name] = tuple(sorted(dataset.levels[s.name][c] for c in codes))
        else:
            obs = col[~np.isnan(col)]
            if obs.size == 0:
                mean[s.name], std[s.name] = 0.0, 1.0
                flagged.append(s.name)
                continue
            mu = float(obs.mean())
            sd = float(obs.std())
            mean[s.name] = mu
            std[s.name] = sd if sd > 0 else 1.0
    return Encoder(dataset.specs, levels, mean, std, tuple(flagged))


def transform(encoder: Encoder, dataset: TemporalDataset, row_indices=None) -> EncodedMatrix:
    """Encode rows into a dense float matrix with a fixed column layout."""
    idx = np.arange(len(dataset)) if row_indices is None else np.asarray(row_indices, np.int64)
    blocks = []
    for s in encoder.specs:
        col = dataset.values[s.name][idx]
        if s.kind == CATEGORICAL:
            fitted = encoder.levels[s.name]
            k = len(fitted)
            pos = {lv: i for i, lv in enumerate(fitted)}
            # dataset code -> block column; unseen by default
            lut = np.array([pos.get(lv, k + 1) for lv in dataset.levels[s.name]] + [k],
                           dtype=np.int64)
            block = np.zeros((len(idx), k + 2))
            block[np.arange(len(idx)), lut[col]] = 1.0  # code -1 hits the trailing "missing" slot
            blocks.append(block)
        else:
            z = (col - encoder.mean[s.name]) / encoder.std[s.name]
            blocks.append(np.where(np.isnan(z), 0.0, z)[:, None])
    X = np.hstack(blocks) if blocks else np.zeros((len(idx), 0))
    return EncodedMatrix(encoder.column_names, X, dataset.labels[idx].copy())


# --------------------------------------------------------------------------- missingness

@dataclass(frozen=True)
class MissingnessProfile:
    """Missing-cell counts per (feature, time point).

    ``fraction`` is ``missing / counts`` with ``NaN`` where a time point has no
    records; :meth:`value` returns ``None`` there instead.
    """

    features: tuple
    times: np.ndarray
    missing: np.ndarray    # (n_features, n_times) int
    counts: np.ndarray     # (n_times,) int

    @property
    def fraction(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.counts > 0, self.missing / np.maximum(self.counts, 1), np.nan)

    def value(self, feature: str, t: int):
        j = int(t - self.times[0])
        n = int(self.counts[j])
        if n == 0:
            return None
        return int(self.missing[self.features.index(feature), j]) / n


def missingness_profile(dataset: TemporalDataset) -> MissingnessProfile:
    offs = dataset.times - dataset.t_min
    n_t = dataset.t_max - dataset.t_min + 1
    counts = np.bincount(offs, minlength=n_t)
    missing = np.vstack([
        np.bincount(offs, weights=dataset.missing_mask(nm).astype(float), minlength=n_t)
        for nm in dataset.feature_names
    ]).astype(np.int64) if dataset.specs else np.zeros((0, n_t), dtype=np.int64)
    return MissingnessProfile(tuple(dataset.feature_names), dataset.time_points, missing, counts)
