"""
Tune, fit, forecast
===================

End-to-end walk through the forecasting half of the library on a simulated
monthly panel: shrinkage selection by rolling-origin grid search, conjugate
posterior update, and a truncated fan of anchored credible intervals.

Run from the repo root:  python3 demos/demo_forecast_pipeline.py
Outputs land in demos/out/.
"""

import os

import numpy as np

from bvarx import (
    ExogPath,
    GridSpec,
    Panel,
    SplitSpec,
    SupportBounds,
    build_design,
    build_prior,
    forecast_pipeline,
    grid_search,
    posterior_update,
    split,
)

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

# ---------------------------------------------------------------------------
# a synthetic 3-variable monthly panel with one exogenous driver
# ---------------------------------------------------------------------------

rng = np.random.default_rng(8)
T = 180
x = np.zeros((T, 1))
for t in range(1, T):
    x[t] = 0.7 * x[t - 1] + rng.standard_normal()   # persistent "oil" factor

A = np.array([[0.55, 0.10, 0.00],
              [0.05, 0.60, 0.10],
              [0.00, 0.15, 0.50]])
G = np.array([[0.40, -0.20, 0.10]])
y = np.zeros((T, 3))
for t in range(1, T):
    y[t] = np.array([0.3, 0.1, 0.2]) + A @ y[t - 1] + G.T[:, 0] * x[t, 0] \
        + 0.4 * rng.standard_normal(3)
y += np.array([5.0, 100.0, 2.0])   # levels: a rate, an index, another rate

dates = [f"{2011 + i // 12:04d}-{i % 12 + 1:02d}" for i in range(T)]
panel = Panel(dates=dates, endog=y, exog=x,
              endog_names=("unemp", "price_index", "policy_rate"),
              exog_names=("oil",))
print(f"panel: T={panel.T}, {panel.m} endogenous, {panel.k} exogenous")

# ---------------------------------------------------------------------------
# pick the shrinkage by expanding-window grid search (small grid, h = 6)
# ---------------------------------------------------------------------------

grid = GridSpec(horizon=6,
                p=(1, 2),
                lambda0=(0.2, 0.4, 0.8),
                lambda1=(0.1,),
                lambda3=(1.0,),
                lambda4=(0.1,),
                lambda5=(0.0, 0.5),
                mu5=(0.0, 1.0),
                mu6=(0.0,),
                window=24)
result = grid_search(panel, grid, workers=4)
print(f"\nsearched {len(result.leaderboard)} candidates; "
      f"best MRMSE = {result.score:.4f}")
print("top of the leaderboard:")
for hyper, score in result.leaderboard[:5]:
    print(f"  p={hyper.p} l0={hyper.lambda0:<4} l5={hyper.lambda5:<4} "
          f"mu5={hyper.mu5:<4} -> {score:.4f}")

# ---------------------------------------------------------------------------
# fit on the full sample minus a 12-month holdout, then forecast into it
# ---------------------------------------------------------------------------

H = 12
train, test = split(panel, SplitSpec(train_end=panel.T - H, horizon=H))
prior = build_prior(train, result.best)
post = posterior_update(prior, build_design(train, result.best.p))

# unemployment and the policy rate live in [0, 100]; the index is positive
bounds = SupportBounds.from_mapping(
    {"unemp": (0.0, 100.0), "policy_rate": (0.0, 100.0),
     "price_index": (0.0, None)},
    panel.endog_names)

dist = forecast_pipeline(train, post, ExogPath(test.exog), H,
                         np.random.default_rng(99), S=2000, gamma=0.68,
                         bounds=bounds)

print(f"\n{'h':>3} {'variable':>12} {'point':>9} {'50% band':>20} {'actual':>9}")
for h in range(H):
    for j, name in enumerate(panel.endog_names):
        print(f"{h + 1:>3} {name:>12} {dist.point[h, j]:>9.3f} "
              f"[{dist.lower[h, j]:>8.3f}, {dist.upper[h, j]:>8.3f}] "
              f"{test.endog[h, j]:>9.3f}")

inside = np.mean((dist.lower <= test.endog[:H]) & (test.endog[:H] <= dist.upper))
print(f"\nrealized values inside the gamma={dist.gamma} band: {inside:.0%}")

# ---------------------------------------------------------------------------
# fan chart for the first variable
# ---------------------------------------------------------------------------

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

j = 0
tail = 36
fig, ax = plt.subplots(figsize=(8, 4))
hist_t = np.arange(-tail, 0)
fut_t = np.arange(1, H + 1)
ax.plot(hist_t, train.endog[-tail:, j], color="black", lw=1.2, label="history")
for q_lo, q_hi, shade in ((5, 95, 0.15), (25, 75, 0.3)):
    lo = np.percentile(dist.draws[:, :, j], q_lo, axis=0)
    hi = np.percentile(dist.draws[:, :, j], q_hi, axis=0)
    ax.fill_between(fut_t, lo, hi, color="C0", alpha=shade, lw=0)
ax.plot(fut_t, dist.point[:, j], color="C0", lw=1.5, label="point")
ax.plot(fut_t, test.endog[:H, j], color="C3", lw=1.0, ls="--", label="actual")
ax.axvline(0, color="grey", lw=0.5)
ax.set_title(f"{panel.endog_names[j]}: {H}-month fan")
ax.legend(loc="upper left", fontsize=8)
fig.tight_layout()
path = os.path.join(OUT, "fan_unemp.svg")
fig.savefig(path)
print(f"wrote {path}")
