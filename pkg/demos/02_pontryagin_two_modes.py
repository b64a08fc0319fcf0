# %% [markdown]
# # Inertial pursuit with friction
#
# Now both players are inertial points with friction,
# `x'' + alpha x' = b u` and `y'' + beta y' = c v`.  The pursuer first
# approaches.  Once its accumulated resolving integral reaches one it
# switches to cancelling the evader's influence.  Capture is certified at the
# guaranteed time `theta`.

# %%
import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pursuit_rf import pontryagin as pg
from pursuit_rf.evaders import suite
from pursuit_rf.simulate import run_pontryagin

OUT = Path(os.environ.get("DEMO_OUT", "demo_output"))
OUT.mkdir(exist_ok=True)

P = pg.PontryaginParams(alpha=1, beta=1, b=1, c=1, rho=2, sigma=1)
z0 = pg.PontryaginState([1.0], [0.0], [0.0])
theta = pg.guaranteed_time_theta(z0, P)
print(f"nu = {P.nu}, theta = {theta:.12f}, residual = {pg.theta_residual(theta, z0, P):.1e}")

# %% [markdown]
# `theta` grows with the initial distance and shrinks as the pursuer's
# energy advantage grows.

# %%
dist = np.linspace(0.1, 5, 50)
for rho in (1.5, 2.0, 4.0):
    Q = pg.PontryaginParams(1, 1, 1, 1, rho=rho, sigma=1)
    plt.plot(dist, [pg.guaranteed_time_theta(pg.PontryaginState([d], [0.0], [0.0]), Q) for d in dist],
             label=f"rho = {rho}")
plt.xlabel("|z01|")
plt.ylabel("theta")
plt.legend()
plt.savefig(OUT / "pontryagin_theta.png", dpi=120)
plt.close()

# %% [markdown]
# ## Runs against the evader suite

# %%
fig, ax = plt.subplots(1, 2, figsize=(11, 4))
for spec in suite(seed=2):
    traj, rep = run_pontryagin(P, z0, spec, theta / 5000)
    switch = [t for t, tag in traj.events if tag == "mode_switch"]
    print(f"{spec.kind:15s} miss = {rep.final_miss:.1e}  energy = {traj.u_spent[-1]:.5f}"
          f"  switch at {switch[0] if switch else None}")
    ax[0].plot(traj.times, traj.miss(), label=spec.kind)
    ax[1].plot(traj.times, traj.u_spent, label=spec.kind)
ax[1].axhline(P.rho**2, color="k", ls=":")
ax[0].set(xlabel="t", ylabel="|z1(t)|")
ax[1].set(xlabel="t", ylabel="pursuer energy")
ax[0].legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "pontryagin_runs.png", dpi=120)
