"""
Diagnostic panels
=================

Renders the five diagnostic panels (AUROC over time, max drop, importance
trajectories, prevalence of the top dummy columns, missingness) for a run on a
dataset where a categorical feature changes its coding half way.
"""
import sys
from pathlib import Path

from drifteval import ExperimentConfig, ModelSpec, RegimeSpec, ShiftScript, generate, run_experiment
from drifteval.diagnostics import build_report, render_report
from drifteval.synthgen import FeatureIntroduced, FeatureRemoved, SynthFeature

out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output/diagnostics")

script = ShiftScript(
    8, 400,
    [SynthFeature("smoker", 1.2, "binary"), SynthFeature("age", 0.8), SynthFeature("site", 0.0, "binary")],
    [FeatureRemoved("smoker", 4), FeatureIntroduced("smoker_v2", 4, 1.2, "binary")],
    base_rate=0.35, seed=5)
ds = generate(script)
config = ExperimentConfig([RegimeSpec("sliding_window", 3), RegimeSpec("all_period")],
                          [ModelSpec("LR")], seeds=range(3))
table = run_experiment(config, ds)

report = build_report(table, ds, regime="sliding_window", k=3)
print("selected features:", report.selected_features)
print("max drop:", [(d, round(v, 3)) for d, v in report.max_drop])
for path in render_report(report, table, out_dir):
    print("wrote", path)
