"""Discrete-time realisation of the pursuit strategies.

Both simulators hold controls constant over a step.  The step on which the
resource ``r(t) = 1 - int lambda`` reaches zero is split at the exact
crossing (for simple motion the same is done when the straight segment of a
step enters the terminal ball first), so the energy bookkeeping of the
continuous proof holds exactly on the realised piecewise-constant signals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import pontryagin as pg
from . import simple_motion as sm
from .errors import StepTooCoarse
from .evaders import EvaderSpec, make_evader

ENERGY_IDENTITY_RTOL = 1e-10
BUDGET_RTOL = 1e-6
EVADER_RTOL = 1e-9
PARALLEL_RTOL = 1e-6
CERTIFICATE_RTOL = 1e-6
CAPTURE_REL_MISS = 1e-3
HORIZON_FACTOR = 1.1


@dataclass
class Trajectory:
    """Sampled run.  Row ``i`` of ``u``, ``v`` and ``lam`` holds the values
    applied on ``[times[i], times[i+1])``; the last row repeats the final
    applied values.
    """

    times: np.ndarray
    z: np.ndarray
    u: np.ndarray
    v: np.ndarray
    lam: np.ndarray
    r: np.ndarray
    u_spent: np.ndarray
    v_spent: np.ndarray
    events: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.times.size

    def miss(self) -> np.ndarray:
        """``|z| - l`` for simple motion, ``|z1|`` for the Pontryagin game."""
        if self.meta.get("game") == "pontryagin":
            n = self.meta["n"]
            return np.linalg.norm(self.z[:, :n], axis=1)
        return np.linalg.norm(self.z, axis=1) - self.meta.get("l", 0.0)


@dataclass
class RunReport:
    captured: bool
    capture_time: Optional[float]
    bound_theta: float
    final_miss: float
    budget_ok: dict
    invariant_violations: list = field(default_factory=list)
    capture_reason: Optional[str] = None
    final_position_evader: Optional[list] = None

    def to_dict(self):
        return {
            "captured": self.captured,
            "capture_time": self.capture_time,
            "bound_theta": self.bound_theta,
            "final_miss": self.final_miss,
            "budget_ok": dict(self.budget_ok),
            "invariant_violations": list(self.invariant_violations),
            "capture_reason": self.capture_reason,
            "final_position_evader": self.final_position_evader,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


def _cumulative(rates, steps):
    return np.concatenate([[0.0], np.cumsum(rates * steps)])


def _ball_entries(Z, W, l, dt):
    """Per step, first ``s`` in ``[0, dt]`` with ``|Z_k + s W_k| = l`` (``inf`` if none)."""
    a = np.sum(W * W, axis=1)
    b = 2 * np.sum(Z * W, axis=1)
    c = np.sum(Z * Z, axis=1) - l * l
    disc = b * b - 4 * a * c
    ok = (a > 0) & (disc >= 0)
    s = np.full(a.shape, np.inf)
    s[ok] = (-b[ok] - np.sqrt(disc[ok])) / (2 * a[ok])
    s[~((s >= 0) & (s <= dt))] = np.inf
    return s


def run_simple_motion(params: sm.SimpleMotionParams, z0, evader: EvaderSpec, dt: float,
                      monitors: bool = True, y0=None):
    """Simulate the parallel-approach strategy against an open-loop evader.

    The strategy only uses the initial miss ``z0`` and the current evader
    velocity.  The run stops at the earlier of the instant ``|z|`` reaches
    ``l`` and the instant the resource is exhausted, or at ``1.1`` times the
    capture-time bound.

    Returns
    -------
    (Trajectory, RunReport)
    """
    z0 = np.asarray(z0, dtype=float).ravel()
    if z0.size != params.n:
        raise ValueError(f"z0 has length {z0.size}, expected n = {params.n}")
    l, delta = params.l, params.delta
    bound = sm.capture_bound(z0, params.rho, params.sigma, l)
    if not 0 < dt <= bound / 1000:
        raise StepTooCoarse(f"dt = {dt} must lie in (0, bound/1000 = {bound / 1000:.6g}]")
    y0 = np.zeros(params.n) if y0 is None else np.asarray(y0, dtype=float).ravel()

    N = int(math.ceil(HORIZON_FACTOR * bound / dt))
    t_left = np.arange(N) * dt
    signal = make_evader(evader, params.sigma, bound, n=params.n, reference=z0)
    V = signal.zoh(t_left, dt)
    lam = sm.lambda_l(V, z0, delta, l)
    U = sm.pi_l_strategy(V, z0, delta, l)

    r = 1.0 - _cumulative(lam, dt)
    Z = z0 + np.concatenate([np.zeros((1, params.n)), np.cumsum((U - V) * dt, axis=0)])
    # time into each step at which the segment enters the terminal ball or the resource runs out
    s_geo = _ball_entries(Z[:-1], U - V, l, dt)
    with np.errstate(divide="ignore", invalid="ignore"):
        s_res = np.where((r[1:] <= 0) & (lam > 0), r[:-1] / lam, np.inf)
    geo = np.nonzero(np.isfinite(s_geo))[0]
    res = np.nonzero(np.isfinite(s_res))[0]
    k_geo = int(geo[0]) if geo.size else N
    k_res = int(res[0]) if res.size else N
    t_geo = k_geo * dt + s_geo[k_geo] if k_geo < N else np.inf
    t_res = k_res * dt + s_res[k_res] if k_res < N else np.inf

    steps = np.full(N, dt)
    reason = None
    if t_res < np.inf and t_res <= t_geo:
        # split the crossing step at the exact exhaustion of the resource
        k = k_res
        steps[k] = s_res[k]
        reason = "resource"
    elif t_geo < np.inf:
        # split the crossing step where the segment first touches |z| = l
        k = k_geo
        steps[k] = s_geo[k]
        reason = "geometric"
    else:
        k = N - 1
    rows = k + 2
    steps = steps[: k + 1]
    U, V, lam = U[: k + 1], V[: k + 1], lam[: k + 1]
    times = np.concatenate([[0.0], np.cumsum(steps)])
    Z = z0 + np.concatenate([np.zeros((1, params.n)), np.cumsum((U - V) * steps[:, None], axis=0)])
    r = 1.0 - _cumulative(lam, steps)
    if reason == "resource":
        r[-1] = min(r[-1], 0.0)
    traj = Trajectory(
        times=times,
        z=Z,
        u=np.vstack([U, U[-1:]]),
        v=np.vstack([V, V[-1:]]),
        lam=np.concatenate([lam, lam[-1:]]),
        r=r,
        u_spent=_cumulative(np.sum(U**2, axis=1), steps),
        v_spent=_cumulative(np.sum(V**2, axis=1), steps),
        meta={
            "game": "simple_motion", "n": params.n, "l": l, "delta": delta,
            "rho": params.rho, "sigma": params.sigma, "z0": z0.tolist(),
            "y0": y0.tolist(), "dt": dt,
        },
    )
    captured = reason is not None
    capture_time = float(times[-1]) if captured else None
    if captured:
        traj.events.append((capture_time, f"capture:{reason}"))
    assert rows == len(traj)
    y_end = y0 + np.sum(V * steps[:, None], axis=0)
    report = RunReport(
        captured=captured,
        capture_time=capture_time,
        bound_theta=bound,
        final_miss=float(np.linalg.norm(Z[-1]) - l),
        budget_ok={
            "pursuer": bool(traj.u_spent[-1] <= params.rho**2 * (1 + BUDGET_RTOL)),
            "evader": bool(traj.v_spent[-1] <= params.sigma**2 * (1 + EVADER_RTOL)),
        },
        capture_reason=reason,
        final_position_evader=y_end.tolist(),
    )
    if captured and capture_time > bound * (1 + 1e-6) + dt:
        report.invariant_violations.append(
            f"capture time {capture_time:.6g} exceeds bound {bound:.6g}"
        )
    if not captured:
        report.invariant_violations.append("no capture within 1.1x the bound")
    if monitors:
        report.invariant_violations.extend(monitor_invariants(traj, "simple_motion"))
    return traj, report


def run_pontryagin(params: pg.PontryaginParams, z0: pg.PontryaginState, evader: EvaderSpec,
                   dt: float, monitors: bool = True):
    """Simulate the two-mode strategy up to the guaranteed time ``theta``.

    The linear part is propagated exactly over each step; ``dt`` is shrunk
    slightly so that the grid ends at ``theta``.
    """
    T = pg.guaranteed_time_theta(z0, params)
    if not 0 < dt <= T / 1000 * (1 + 1e-12):
        raise StepTooCoarse(f"dt = {dt} must lie in (0, theta/1000 = {T / 1000:.6g}]")
    N = int(math.ceil(T / dt - 1e-9))
    h = T / N
    n = params.n
    xi_T = pg.xi(T, z0, params)
    nx2 = float(xi_T @ xi_T)
    delta = params.delta

    signal = make_evader(evader, params.sigma, T, n=n, reference=z0.z1)
    V = signal.zoh(np.arange(N) * h, h)

    times = np.arange(N + 1) * h
    times[-1] = T
    Z = np.empty((N + 1, 3 * n))
    Z[0] = z0.as_vector()
    U = np.empty((N, n))
    lam = np.empty(N)
    r = np.empty(N + 1)
    u_spent = np.empty(N + 1)
    r[0], u_spent[0] = 1.0, 0.0
    J = 0.0
    mode = "approach"
    events = []
    z = Z[0]
    for i in range(N):
        tau = i * h
        v = V[i]
        phi = pg.switch_integrand(T, tau, v, xi_T, params)
        lam[i] = phi / nx2
        u_app, u_neu = pg.approach_controls(T, tau, v, xi_T, params)
        if mode == "approach" and J + phi * h >= nx2 and phi > 0:
            h1 = min(max((nx2 - J) / phi, 0.0), h)
            z = pg.propagate(z, u_app, v, h1, params)
            z = pg.propagate(z, u_neu, v, h - h1, params)
            spent = float(u_app @ u_app) * h1 + float(u_neu @ u_neu) * (h - h1)
            J = nx2
            mode = "neutralize"
            events.append((tau + h1, "mode_switch"))
            U[i] = u_app
        elif mode == "approach":
            z = pg.propagate(z, u_app, v, h, params)
            spent = float(u_app @ u_app) * h
            J += phi * h
            U[i] = u_app
        else:
            z = pg.propagate(z, u_neu, v, h, params)
            spent = float(u_neu @ u_neu) * h
            U[i] = u_neu
        Z[i + 1] = z
        u_spent[i + 1] = u_spent[i] + spent
        r[i + 1] = 1.0 - J / nx2

    v_spent = _cumulative(np.sum(V**2, axis=1), h)
    traj = Trajectory(
        times=times, z=Z,
        u=np.vstack([U, U[-1:]]), v=np.vstack([V, V[-1:]]),
        lam=np.concatenate([lam, lam[-1:]]), r=r,
        u_spent=u_spent, v_spent=v_spent, events=events,
        meta={
            "game": "pontryagin", "n": n, "l": 0.0, "delta": delta,
            "rho": params.rho, "sigma": params.sigma, "alpha": params.alpha,
            "beta": params.beta, "b": params.b, "c": params.c,
            "z0": z0.as_vector().tolist(), "theta": T, "dt": h,
        },
    )
    miss = float(np.linalg.norm(Z[-1, :n]))
    captured = miss <= CAPTURE_REL_MISS * float(np.linalg.norm(z0.z1))
    if captured:
        events.append((T, "capture:terminal"))
    report = RunReport(
        captured=captured,
        capture_time=T if captured else None,
        bound_theta=T,
        final_miss=miss,
        budget_ok={
            "pursuer": bool(u_spent[-1] <= params.rho**2 * (1 + BUDGET_RTOL)),
            "evader": bool(v_spent[-1] <= params.sigma**2 * (1 + EVADER_RTOL)),
        },
        capture_reason="terminal" if captured else None,
    )
    if not captured:
        report.invariant_violations.append(
            f"final miss {miss:.3e} exceeds {CAPTURE_REL_MISS} |z01|"
        )
    if monitors:
        report.invariant_violations.extend(monitor_invariants(traj, "pontryagin"))
    return traj, report


def monitor_invariants(traj: Trajectory, kind: str) -> list:
    """Check a finished trajectory; returns human-readable violations.

    The pursuer's spending is recomputed from the recorded controls, so a
    trajectory whose ``u`` column was tampered with is caught even when its
    ``u_spent`` column was not updated.
    """
    out = []
    meta = traj.meta
    steps = np.diff(traj.times)
    U, V, lam = traj.u[:-1], traj.v[:-1], traj.lam[:-1]
    u2 = np.sum(U**2, axis=1)
    v2 = np.sum(V**2, axis=1)
    rho2, sigma2, delta = meta["rho"] ** 2, meta["sigma"] ** 2, meta["delta"]

    if np.any(steps <= 0):
        out.append("time grid is not strictly increasing")
    if np.any(np.diff(traj.r) > 1e-15):
        out.append("resource r increased")
    if np.any(np.diff(traj.u_spent) < 0) or np.any(np.diff(traj.v_spent) < 0):
        out.append("budget ledger decreased")
    if traj.v_spent[-1] > sigma2 * (1 + EVADER_RTOL) + 1e-15:
        out.append(f"evader spent {traj.v_spent[-1]:.9g} > sigma^2 = {sigma2:.9g}")

    if kind == "simple_motion":
        spent = float(np.sum(u2 * steps))
        if abs(spent - traj.u_spent[-1]) > 1e-9 * max(1.0, rho2):
            out.append("u_spent column disagrees with recorded controls")
        if max(spent, traj.u_spent[-1]) > rho2 * (1 + BUDGET_RTOL):
            out.append(f"pursuer spent {spent:.9g} > rho^2 = {rho2:.9g}")
        resid = np.abs(u2 - v2 - delta * lam)
        bad = resid > ENERGY_IDENTITY_RTOL * (1 + v2) * max(1.0, delta)
        if np.any(bad):
            out.append(f"energy identity fails on {int(bad.sum())} steps (max {resid.max():.3e})")
        z0 = np.asarray(meta["z0"])
        nz0 = float(np.linalg.norm(z0))
        l = meta["l"]
        if l == 0:
            par = np.max(np.linalg.norm(traj.z - traj.r[:, None] * z0, axis=1))
            if par >= PARALLEL_RTOL * nz0:
                out.append(f"parallel-approach residual {par:.3e}")
        cert = np.linalg.norm(traj.z, axis=1) - l - (nz0 - l) * np.maximum(traj.r, 0.0)
        if np.any(cert > CERTIFICATE_RTOL * nz0):
            out.append(f"capture certificate violated (max excess {cert.max():.3e})")

    elif kind == "pontryagin":
        if traj.u_spent[-1] > rho2 * (1 + BUDGET_RTOL):
            out.append(f"pursuer spent {traj.u_spent[-1]:.9g} > rho^2 = {rho2:.9g}")
        switches = [e for e in traj.events if e[1] == "mode_switch"]
        if len(switches) > 1:
            out.append(f"{len(switches)} mode switches recorded")
        params = pg.PontryaginParams(meta["alpha"], meta["beta"], meta["b"], meta["c"],
                                     meta["rho"], meta["sigma"], meta["n"])
        T = meta["theta"]
        t_switch = switches[0][0] if switches else np.inf
        approach = traj.times[:-1] + steps <= t_switch
        if np.any(approach):
            s = T - traj.times[:-1][approach]
            ratio = pg.f_kernel(s, params)
            expect = ratio**2 * v2[approach] + delta * lam[approach]
            resid = np.abs(u2[approach] - expect)
            bad = resid > 1e-9 * (1 + expect)
            if np.any(bad):
                out.append(f"approach-mode energy identity fails on {int(bad.sum())} steps")
    else:
        raise ValueError(f"unknown game kind {kind!r}")
    return out
