# %% [markdown]
# # Parallel approach with energy budgets
#
# Pursuer and evader move with simple motion in the plane.  Their speeds are
# unbounded, but each has a finite energy: the pursuer may spend
# `rho^2 = 4`, the evader `sigma^2 = 1`.  The pursuer only sees the
# evader's current velocity.  It answers with the parallel-approach control,
# so the miss vector always stays on the ray through its initial value.

# %%
import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pursuit_rf import simple_motion as sm
from pursuit_rf.evaders import EvaderSpec, suite
from pursuit_rf.simulate import run_simple_motion

OUT = Path(os.environ.get("DEMO_OUT", "demo_output"))
OUT.mkdir(exist_ok=True)

P = sm.SimpleMotionParams(rho=2.0, sigma=1.0, l=0.0)
x0, y0 = np.array([3.0, 0.0]), np.array([0.0, 0.0])
z0 = x0 - y0
bound = sm.capture_bound(z0, P.rho, P.sigma, P.l)
print(f"capture-time bound: {bound}")

# %% [markdown]
# ## One run per evader behaviour
#
# The resource `r(t) = 1 - int lambda` falls to zero at capture.  Against a
# motionless evader it decreases linearly and capture happens at
# `|z0|^2 / (rho^2 - sigma^2) = 3`.

# %%
runs = {}
for spec in suite(seed=4):
    traj, rep = run_simple_motion(P, z0, spec, 1e-4, y0=y0)
    runs[spec.kind] = (traj, rep)
    print(f"{spec.kind:15s} T = {rep.capture_time:.4f}  pursuer energy = {traj.u_spent[-1]:.4f}"
          f"  violations = {len(rep.invariant_violations)}")

# %%
fig, ax = plt.subplots(1, 2, figsize=(11, 4))
for kind, (traj, rep) in runs.items():
    ax[0].plot(traj.times, traj.r, label=kind)
    ax[1].plot(traj.times, np.linalg.norm(traj.z, axis=1), label=kind)
ax[0].set(xlabel="t", ylabel="r(t)", title="resource")
ax[1].set(xlabel="t", ylabel="|z(t)|", title="miss distance")
ax[0].legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "simple_resource_and_miss.png", dpi=120)

# %% [markdown]
# ## Where can capture happen?
#
# Every capture point lies in a ball around `y0 - sigma^2 z0 / delta`.  We
# rebuild the evader path from its recorded velocities and mark the capture
# points of many seeded random evaders.

# %%
center, radius = sm.containment_ball(x0, y0, P.rho, P.sigma)
fig, ax = plt.subplots(figsize=(5, 5))
ax.add_patch(plt.Circle(center, radius, fill=False, ls="--", color="k"))
for seed in range(40):
    traj, rep = run_simple_motion(P, z0, EvaderSpec("seeded_random", {"seed": seed}), 1e-3, y0=y0)
    steps = np.diff(traj.times)[:, None]
    y = y0 + np.vstack([np.zeros((1, 2)), np.cumsum(traj.v[:-1] * steps, axis=0)])
    ax.plot(y[:, 0], y[:, 1], lw=0.5, color="tab:blue", alpha=0.5)
    ax.plot(*rep.final_position_evader, "r.", ms=4)
ax.plot(*x0, "ks")
ax.set_aspect("equal")
ax.set_title("evader paths and capture points")
fig.savefig(OUT / "simple_capture_points.png", dpi=120)
