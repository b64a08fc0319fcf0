# %% [markdown]
# # Closed forms against the generic support-function solver
#
# The generic solver knows nothing about either example.  For given
# `(t, tau, v, z0)` it bisects on `lambda` and decides feasibility by
# minimising a sum of support functions over the unit sphere.  Here it is
# compared with the closed-form resolving functions.

# %%
import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pursuit_rf import pontryagin as pg
from pursuit_rf import simple_motion as sm
from pursuit_rf.resolving import estimate_nu, resolve_lambda_numeric

OUT = Path(os.environ.get("DEMO_OUT", "demo_output"))
OUT.mkdir(exist_ok=True)

# %% [markdown]
# ## l-capture, evader speed 1 in every direction

# %%
P = sm.SimpleMotionParams(2.0, 1.0, 1.0)
z0 = np.array([3.0, 0.0])
angles = np.linspace(0, 2 * np.pi, 73)
V = np.column_stack([np.cos(angles), np.sin(angles)])
closed = sm.lambda_l(V, z0, P.delta, P.l)
numeric = [resolve_lambda_numeric(sm.game_spec(P), sm.projector(P), sm.kernel(P), 1.0, 0.0, v, z0).lam
           for v in V]
print(f"max |closed - numeric| = {np.max(np.abs(closed - numeric)):.1e}")
plt.plot(angles, closed, label="closed form")
plt.plot(angles, numeric, "o", ms=3, label="support-function solver")
plt.xlabel("direction of v")
plt.ylabel("lambda")
plt.legend()
plt.savefig(OUT / "lambda_simple.png", dpi=120)
plt.close()

# %% [markdown]
# ## Inertial example along the time axis

# %%
Q = pg.PontryaginParams(2.0, 1.0, 1.0, 1.0, rho=3.0, sigma=1.0, n=2)
s0 = pg.PontryaginState([1.0, 0.5], [0.2, 0.0], [0.0, -0.3])
T = pg.guaranteed_time_theta(s0, Q)
v = np.array([0.3, -0.4])
taus = np.linspace(0, T, 25)
lc = [pg.lambda_pontryagin(T, tau, v, s0, Q) for tau in taus]
ln = [resolve_lambda_numeric(pg.game_spec(Q), pg.projector(Q), pg.kernel(Q), T, tau, v, s0.as_vector()).lam
      for tau in taus]
print(f"max |closed - numeric| = {np.max(np.abs(np.subtract(lc, ln))):.1e}")

# %% [markdown]
# The kernel gain `nu` is the worst-case amplification of the evader
# control; for `alpha > beta` it is reached only asymptotically.

# %%
est = estimate_nu(pg.kernel(Q), 2.0, 1000.0)
print(f"nu closed = {Q.nu}, nu numeric = {np.sqrt(est.nu_p):.10f}")
