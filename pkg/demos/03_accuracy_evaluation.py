"""Score model distances against manual measurements.

Given per-frame distances from a human annotator and from the automated
pipeline, we join the two sources, compute the error metrics (MAE,
RMSE, signed average difference), and look at how the error moves with
distance via half-metre binning and a regression slope. The synthetic
model errors here grow with distance and carry a slight far-field
underestimate, which all three views pick up.

Run with:  python3 demos/03_accuracy_evaluation.py
"""
import numpy as np

from ctdskit.evaluation import (
    PairedDistances,
    binned_regression,
    error_by_distance,
    error_metrics,
    join_single_animal,
    relative_difference,
    snap_to_bin,
)

rng = np.random.default_rng(11)

# 400 single-animal frames, manual distances up to 14 m. The fake
# model noise scales with distance and drifts low past ~8 m.
n = 400
manual = np.round(rng.uniform(0.5, 14.0, size=n) * 2) / 2  # annotated to 0.5 m
noise = rng.normal(0.0, 0.08 * manual)
drift = np.where(manual > 8.0, -0.06 * (manual - 8.0), 0.0)
model = np.clip(manual + noise + drift * manual, 0.05, None)

manual_rows = [(f"f{i:04d}", float(m)) for i, m in enumerate(manual)]
model_rows = [(f"f{i:04d}", float(m)) for i, m in enumerate(model)]

joined = join_single_animal(manual_rows, model_rows)
print(f"joined {len(joined.pairs.pairs)} frames "
      f"({joined.n_unmatched} unmatched)")

summary = error_metrics(joined.pairs)
print(f"\nMAE   {summary.mae_m:6.3f} m")
print(f"RMSE  {summary.rmse_m:6.3f} m")
print(f"delta {summary.delta_avg_m:+6.3f} m  "
      "(negative: model reads shorter than manual)")

# MAE never exceeds RMSE; the signed average never exceeds MAE.
assert abs(summary.delta_avg_m) <= summary.mae_m <= summary.rmse_m

print("\nerror by distance bin (0.5 m snap):")
print("  bin_m   n    mae    delta")
for centre, stats in error_by_distance(joined.pairs, step_m=0.5):
    if stats.n >= 10:
        print(f"  {centre:5.1f}  {stats.n:3d}  {stats.mae_m:5.3f}  "
              f"{stats.delta_avg_m:+6.3f}")

slope, intercept = binned_regression(joined.pairs, step_m=0.5)
print(f"\nregression of model on manual bin means: "
      f"slope {slope:.3f}, intercept {intercept:.3f}")
print("a slope below 1 says the model compresses far distances")

# snap_to_bin is the same rounding the binning uses.
print(f"\nsnap examples: 7.74 -> {snap_to_bin(7.74, 0.5)}, "
      f"7.75 -> {snap_to_bin(7.75, 0.5)}")

# Headline-style comparison of two abundance figures.
rel = relative_difference(1917.0, 2454.0)
print(f"abundance 1917 vs reference 2454: {100 * rel:.1f}% apart")
