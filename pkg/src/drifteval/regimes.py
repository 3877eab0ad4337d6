"""In-period definitions per training regime and seeded train/val/test splits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .data import TemporalDataset
from .errors import DomainError, SplitError

DEFAULT_WINDOW = 4


class RegimeKind(str, Enum):
    ALL_PERIOD = "all_period"
    SLIDING_WINDOW = "sliding_window"
    ALL_HISTORICAL = "all_historical"
    ALL_HISTORICAL_SUBSAMPLED = "all_historical_subsampled"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class RegimeSpec:
    kind: RegimeKind
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        object.__setattr__(self, "kind", RegimeKind(self.kind))
        if int(self.window) < 1:
            raise DomainError(f"window must be >= 1, got {self.window}")

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def deploys(self) -> bool:
        """False only for time-agnostic all-period training."""
        return self.kind is not RegimeKind.ALL_PERIOD


@dataclass(frozen=True)
class SplitRatios:
    train: float
    val: float
    test: float

    def __post_init__(self):
        for v in (self.train, self.val, self.test):
            if not 0 < v < 1:
                raise DomainError(f"split ratios must lie in (0, 1): {self}")
        if abs(self.train + self.val + self.test - 1) > 1e-9:
            raise DomainError(f"split ratios must sum to 1: {self}")

    @classmethod
    def parse(cls, value) -> "SplitRatios":
        """Accept ``"0.8-0.1-0.1"``, a 3-sequence, a mapping, or a preset name."""
        if isinstance(value, SplitRatios):
            return value
        if isinstance(value, str):
            if value in PRESETS:
                return PRESETS[value]
            value = [float(p) for p in value.split("-")]
        if isinstance(value, dict):
            return cls(float(value["train"]), float(value["val"]), float(value["test"]))
        train, val, test = value
        return cls(float(train), float(val), float(test))

    def as_list(self):
        return [self.train, self.val, self.test]


# Per-dataset presets: large registries vs. smaller cohorts.
PRESETS = {
    "large": SplitRatios(0.8, 0.1, 0.1),
    "small": SplitRatios(0.5, 0.25, 0.25),
}


@dataclass
class SplitPlan:
    deployment_time: int
    seed: int
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    in_period_range: tuple
    meta: dict = field(default_factory=dict)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5 + 1e-9))


def in_period_range(regime: RegimeSpec, deployment_time: int, t_min: int, t_max=None):
    """Inclusive ``(t_lo, t_hi)`` of data available for training at ``deployment_time``.

    The sliding window covers the deployment time itself, i.e. ``d - W + 1 .. d``
    truncated at ``t_min``. All-period training ignores the deployment time and
    spans ``[t_min, t_max]``.
    """
    if regime.kind is RegimeKind.ALL_PERIOD:
        if t_max is None:
            raise DomainError("all-period range needs t_max")
        return (int(t_min), int(t_max))
    if deployment_time < t_min:
        raise DomainError(f"deployment time {deployment_time} precedes t_min {t_min}")
    if regime.kind is RegimeKind.SLIDING_WINDOW:
        return (max(int(t_min), int(deployment_time) - regime.window + 1), int(deployment_time))
    return (int(t_min), int(deployment_time))


def in_period_rows(dataset: TemporalDataset, regime: RegimeSpec, deployment_time: int):
    lo, hi = in_period_range(regime, deployment_time, dataset.t_min, dataset.t_max)
    return np.flatnonzero((dataset.times >= lo) & (dataset.times <= hi))


def _split_remainder(rng, rows, ratios: SplitRatios):
    rows = rng.permutation(rows)
    n_val = _round_half_up(len(rows) * ratios.val / (ratios.train + ratios.val))
    return np.sort(rows[n_val:]), np.sort(rows[:n_val])


def make_split(dataset: TemporalDataset, regime: RegimeSpec, deployment_time, ratios: SplitRatios,
               seed: int) -> SplitPlan:
    """Split in-period rows into disjoint train/val/test index sets.

    Under the deployment regimes the test set is drawn only from rows at
    ``deployment_time``; the rest of the in-period rows are split between train
    and validation. The subsampled all-historical regime shares the
    all-historical val/test sets and then cuts train down to the size the
    sliding window would give for the same ``(window, deployment_time, ratios,
    seed)``.
    """
    rng = np.random.default_rng(seed)
    if regime.kind is RegimeKind.ALL_PERIOD:
        rows = np.arange(len(dataset))
        perm = rng.permutation(rows)
        n_test = _round_half_up(len(rows) * ratios.test)
        n_val = _round_half_up(len(rows) * ratios.val)
        test, val, train = perm[:n_test], perm[n_test:n_test + n_val], perm[n_test + n_val:]
        plan = SplitPlan(dataset.t_max, seed, np.sort(train), np.sort(val), np.sort(test),
                         (dataset.t_min, dataset.t_max))
        _check_nonempty(plan)
        return plan

    lo, hi = in_period_range(regime, deployment_time, dataset.t_min, dataset.t_max)
    rows = in_period_rows(dataset, regime, deployment_time)
    if rows.size == 0:
        raise SplitError(f"no in-period rows for {regime.name} at t={deployment_time}")
    recent = rows[dataset.times[rows] == deployment_time]
    n_test = _round_half_up(len(recent) * ratios.test)
    test = np.sort(rng.permutation(recent)[:n_test])
    remainder = np.setdiff1d(rows, test, assume_unique=True)
    train, val = _split_remainder(rng, remainder, ratios)
    plan = SplitPlan(int(deployment_time), seed, train, val, test, (lo, hi))

    if regime.kind is RegimeKind.ALL_HISTORICAL_SUBSAMPLED:
        window = RegimeSpec(RegimeKind.SLIDING_WINDOW, regime.window)
        target = len(make_split(dataset, window, deployment_time, ratios, seed).train_idx)
        plan.meta["subsample_target"] = target
        if target > len(train):
            plan.meta["clamped"] = True
            target = len(train)
        sub_rng = np.random.default_rng([seed, 1])
        plan.train_idx = np.sort(sub_rng.choice(train, size=target, replace=False))
    _check_nonempty(plan)
    return plan


def _check_nonempty(plan: SplitPlan):
    for name in ("train_idx", "val_idx", "test_idx"):
        if len(getattr(plan, name)) == 0:
            raise SplitError(f"empty {name.split('_')[0]} set at t={plan.deployment_time}")


def out_of_period_eval_sets(dataset: TemporalDataset, deployment_time: int):
    """``[(t, rows at t)]`` for every ``deployment_time < t <= t_max``, all rows included."""
    return [(int(t), dataset.rows_at(t)) for t in range(int(deployment_time) + 1, dataset.t_max + 1)]


def staleness(deployment_time: int, eval_time: int) -> int:
    if eval_time < deployment_time:
        raise DomainError(f"eval time {eval_time} precedes deployment time {deployment_time}")
    return int(eval_time) - int(deployment_time)


def eligibility(dataset: TemporalDataset, regime: RegimeSpec, deployment_time: int):
    """Return ``(ok, reason)``; both the train and test candidate pools need both classes."""
    if regime.kind is RegimeKind.ALL_PERIOD:
        pools = {"dataset": np.arange(len(dataset))}
    else:
        pools = {"train": in_period_rows(dataset, regime, deployment_time),
                 "test": dataset.rows_at(deployment_time)}
    for name, rows in pools.items():
        labs = dataset.labels[rows]
        if labs.size == 0:
            return False, f"{name} pool is empty"
        if labs.min() == labs.max():
            return False, f"{name} pool has a single class ({int(labs[0])})"
    return True, ""
