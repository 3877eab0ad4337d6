"""
Encoding, models and metrics on a single table
==============================================

Builds a small two-era dataset, fits the encoder on one era only, trains the
three model families through grid search and scores them.
"""
import numpy as np

from drifteval import (FeatureSpec, ModelSpec, TemporalDataset, auprc, auroc, feature_importance,
                       fit_encoder, grid_search, missingness_profile, predict_proba, transform)

rng = np.random.default_rng(0)
n = 600
times = np.repeat([0, 1], n // 2)
age = rng.normal(60, 10, n)
stage = rng.choice(["I", "II", "III"], n)
# a level that only shows up in the second era, plus some missing cells
stage[(times == 1) & (rng.random(n) < 0.2)] = "IV"
age[rng.random(n) < 0.05] = np.nan
logit = 0.08 * (np.nan_to_num(age, nan=60) - 60) + np.select(
    [stage == "I", stage == "III", stage == "IV"], [-1.0, 0.8, 1.5], 0.0)
y = (rng.random(n) < 1 / (1 + np.exp(-logit))).astype(int)

ds = TemporalDataset([FeatureSpec("age", "numerical"), FeatureSpec("stage", "categorical")],
                     [f"p{i}" for i in range(n)], times, y,
                     {"age": [None if np.isnan(a) else a for a in age], "stage": list(stage)})
print("rows per time:", ds.counts_per_time())
print("missing fraction of age per time:", missingness_profile(ds).fraction[0])

# fit on era 0 only; the unseen level IV lands in its own column
fit_rows = ds.rows_at(0)
enc = fit_encoder(ds, fit_rows)
print("encoded columns:", enc.column_names)
train = transform(enc, ds, fit_rows[:200])
val = transform(enc, ds, fit_rows[200:])
test = transform(enc, ds, ds.rows_at(1))
print("rows of era 1 flagged <unseen>:", int(test.X[:, enc.column_names.index("stage=<unseen>")].sum()))

small_grids = {
    "LR": None,
    "GBDT": {"n_estimators": [50], "max_depth": [3]},
    "MLP": {"hidden_layer_sizes": [(5,)], "learning_rate_init": [0.01]},
}
for kind, grid in small_grids.items():
    model = grid_search(ModelSpec(kind, grid), train, val, seed=0)
    p = predict_proba(model, test.X)
    print(f"{kind:4s} chosen {model.hyperparams}  val AUROC {model.meta['val_auroc']:.3f}  "
          f"era-1 AUROC {auroc(p, test.y):.3f}  AUPRC {auprc(p, test.y):.3f}")
    imp = feature_importance(model)
    if imp.supported:
        print("     top columns:", [(c, round(v, 3)) for c, v in imp[:3]])
