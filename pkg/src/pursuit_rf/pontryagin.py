"""Pontryagin's test example: two inertial points with linear friction.

Pursuer ``x'' + alpha x' = b u`` and evader ``y'' + beta y' = c v`` in R^n,
both with L2 energy budgets.  With ``z = (x - y, x', y')`` the game reads

    z1' = z2 - z3,   z2' = -alpha z2 + b u,   z3' = -beta z3 + c v,

and ends when ``z1 = 0``.  Everything here is closed form; the generic
numeric machinery in :mod:`pursuit_rf.resolving` serves as cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import AssumptionViolated, DegenerateXi, NoRoot
from .game import GameSpec, TerminalSet, make_projector
from .resolving import KernelF

KERNEL_SERIES_BELOW = 1e-6
THETA_HORIZON = 1e6


@dataclass(frozen=True)
class PontryaginParams:
    alpha: float
    beta: float
    b: float
    c: float
    rho: float
    sigma: float
    n: int = 1

    def __post_init__(self):
        for name in ("alpha", "beta", "b", "c", "rho"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not self.rho > self.sigma * self.nu:
            raise AssumptionViolated(
                f"rho must exceed sigma * nu: {self.rho} <= {self.sigma} * {self.nu:.6g}"
            )

    @property
    def nu(self) -> float:
        return nu_closed(self)

    @property
    def delta(self) -> float:
        return self.rho**2 - (self.sigma * self.nu) ** 2


@dataclass(frozen=True)
class PontryaginState:
    z1: np.ndarray
    z2: np.ndarray
    z3: np.ndarray

    def __post_init__(self):
        for name in ("z1", "z2", "z3"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        if not self.z1.shape == self.z2.shape == self.z3.shape:
            raise ValueError("z1, z2, z3 must have equal length")

    @classmethod
    def from_vector(cls, z):
        z = np.asarray(z, dtype=float)
        n = z.size // 3
        return cls(z[:n], z[n:2 * n], z[2 * n:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.z1, self.z2, self.z3])


def _decay_integral(t, rate):
    # (1 - e^{-rate t}) / rate without cancellation
    return -np.expm1(-rate * np.asarray(t, dtype=float)) / rate


def alpha_fun(t, params: PontryaginParams):
    """``(1 - exp(-alpha t)) / alpha``; increases from 0 to ``1/alpha``."""
    return _decay_integral(t, params.alpha)


def beta_fun(t, params: PontryaginParams):
    return _decay_integral(t, params.beta)


def _decay_double_integral(h, rate):
    # int_0^h (1 - e^{-rate s}) / rate ds
    x = rate * h
    if x < 1e-3:
        return h * h * (0.5 - x / 6 + x * x / 24)
    return (x + np.expm1(-x)) / rate**2


def f_kernel(s, params: PontryaginParams):
    """Scalar kernel ``c beta(s) / (b alpha(s))``; equals ``c/b`` at ``s = 0``."""
    s = np.asarray(s, dtype=float)
    small = s < KERNEL_SERIES_BELOW
    safe = np.where(small, 1.0, s)
    ratio = params.c * beta_fun(safe, params) / (params.b * alpha_fun(safe, params))
    series = (params.c / params.b) * (1 + 0.5 * (params.alpha - params.beta) * s)
    out = np.where(small, series, ratio)
    return out if out.ndim else float(out)


def nu_closed(params: PontryaginParams) -> float:
    return (params.c / params.b) * max(params.alpha / params.beta, 1.0)


def xi(t, z0: PontryaginState, params: PontryaginParams) -> np.ndarray:
    """Free motion of the miss vector, ``z01 + alpha(t) z02 - beta(t) z03``."""
    return z0.z1 + alpha_fun(t, params) * z0.z2 - beta_fun(t, params) * z0.z3


def lambda_pontryagin(t, tau, v, z0: PontryaginState, params: PontryaginParams) -> float:
    """Closed-form resolving function of the test example."""
    if not 0 <= tau <= t:
        raise ValueError(f"need 0 <= tau <= t, got tau={tau}, t={t}")
    x = xi(t, z0, params)
    nx2 = float(x @ x)
    if nx2 < 1e-24:
        raise DegenerateXi(f"|xi(t, z0)| vanishes at t={t}")
    s = t - tau
    a, bt = alpha_fun(s, params), beta_fun(s, params)
    v = np.asarray(v, dtype=float)
    gate = params.delta * params.b**2 * a**2 + 2 * params.c * bt * float(v @ x)
    return max(0.0, gate) / nx2


def I_alpha_sq(theta, params: PontryaginParams) -> float:
    """``int_0^theta alpha(s)^2 ds`` in closed form."""
    a = params.alpha
    x = a * theta
    if x < 1e-3:
        return theta**3 * (1 / 3 - x / 4 + 7 * x * x / 60)
    return (theta + 2 * np.expm1(-x) / a - np.expm1(-2 * x) / (2 * a)) / a**2


def theta_residual(theta, z0: PontryaginState, params: PontryaginParams) -> float:
    lhs = np.linalg.norm(xi(theta, z0, params))
    rhs = (params.rho - params.sigma * params.nu) * params.b * np.sqrt(I_alpha_sq(theta, params))
    return float(lhs - rhs)


def guaranteed_time_theta(z0: PontryaginState, params: PontryaginParams) -> float:
    """First ``theta > 0`` with ``|xi(theta)| = (rho - sigma nu) b sqrt(I(theta))``.

    By then the resolving-function integral reaches one against every
    admissible evader, so ``theta`` bounds the capture time.
    """
    if np.linalg.norm(z0.z1) == 0:
        raise DegenerateXi("z01 must be nonzero")
    grid = np.concatenate([[0.0], np.geomspace(1e-9, THETA_HORIZON, 4000)])
    vals = np.array([theta_residual(th, z0, params) for th in grid])
    neg = np.nonzero(vals <= 0)[0]
    if neg.size == 0:
        raise NoRoot(f"no guaranteed time below {THETA_HORIZON}")
    j = int(neg[0])
    if vals[j] == 0:
        return float(grid[j])
    return float(
        brentq(theta_residual, grid[j - 1], grid[j], args=(z0, params), xtol=1e-15, rtol=1e-15)
    )


def switch_integrand(T, tau, v, xi_T, params: PontryaginParams) -> float:
    """Integrand of the switching equation, ``|xi(T)|^2`` times the resolving function."""
    s = T - tau
    a, bt = alpha_fun(s, params), beta_fun(s, params)
    return max(0.0, params.delta * params.b**2 * a**2 + 2 * params.c * bt * float(np.dot(v, xi_T)))


def approach_controls(T, tau, v, xi_T, params: PontryaginParams):
    """Controls of the two pursuit modes at time ``tau`` for horizon ``T``.

    Returns ``(u_approach, u_neutralize)``.  At ``tau = T`` the kernel ratio is
    replaced by its limit ``c/b`` and the approach term vanishes.
    """
    v = np.asarray(v, dtype=float)
    s = T - tau
    a = alpha_fun(s, params)
    ratio = f_kernel(s, params)
    u_neutral = ratio * v
    if a <= 0:
        return u_neutral.copy(), u_neutral
    nx2 = float(xi_T @ xi_T)
    lam_star = max(0.0, params.delta * params.b * a + 2 * ratio * float(v @ xi_T)) / nx2
    return u_neutral - lam_star * xi_T, u_neutral


def pursuer_control_pontryagin(T, tau, v, z0: PontryaginState, J_accum, params: PontryaginParams, dt):
    """One step of the two-mode strategy.

    While the accumulated switching integral is below ``|xi(T)|^2`` the
    pursuer approaches, afterwards it only cancels the evader.

    Returns
    -------
    u : ndarray
    J_accum : float
        Accumulator advanced by ``integrand * dt`` in approach mode.
    mode : {"approach", "neutralize"}
    """
    xi_T = xi(T, z0, params)
    u_app, u_neu = approach_controls(T, tau, v, xi_T, params)
    if J_accum < float(xi_T @ xi_T):
        return u_app, J_accum + switch_integrand(T, tau, v, xi_T, params) * dt, "approach"
    return u_neu, J_accum, "neutralize"


def expm_closed(t, params: PontryaginParams) -> np.ndarray:
    n = params.n
    E = np.eye(n)
    Z = np.zeros((n, n))
    a, bt = alpha_fun(t, params), beta_fun(t, params)
    return np.block(
        [
            [E, a * E, -bt * E],
            [Z, np.exp(-params.alpha * t) * E, Z],
            [Z, Z, np.exp(-params.beta * t) * E],
        ]
    )


def game_spec(params: PontryaginParams, closed_form: bool = True) -> GameSpec:
    """The example as a generic linear game (terminal set ``z1 = 0``)."""
    n = params.n
    E = np.eye(n)
    Z = np.zeros((n, n))
    A = np.block([[Z, E, -E], [Z, -params.alpha * E, Z], [Z, Z, -params.beta * E]])
    B = np.vstack([Z, params.b * E, Z])
    C = np.vstack([Z, Z, -params.c * E])
    M0 = list(np.eye(3 * n)[n:])
    provider = (lambda s: expm_closed(s, params)) if closed_form else None
    return GameSpec(A, B, C, p=2.0, rho=params.rho, sigma=params.sigma,
                    terminal=TerminalSet(M0, 0.0), expm_provider=provider)


def projector(params: PontryaginParams):
    return make_projector(list(np.eye(3 * params.n)[params.n:]))


def kernel(params: PontryaginParams) -> KernelF:
    E = np.eye(params.n)
    return KernelF(
        lambda s: f_kernel(s, params) * E,
        descriptor="pontryagin f(s) E",
        nu_p=nu_closed(params) ** 2,
        p=2.0,
    )


def propagate(z, u, v, h, params: PontryaginParams) -> np.ndarray:
    """Exact solution over a step of length ``h`` with constant ``u`` and ``v``."""
    st = PontryaginState.from_vector(z)
    al, be = params.alpha, params.beta
    a_h, b_h = _decay_integral(h, al), _decay_integral(h, be)
    z1 = (st.z1 + a_h * st.z2 - b_h * st.z3
          + params.b * _decay_double_integral(h, al) * u
          - params.c * _decay_double_integral(h, be) * v)
    z2 = np.exp(-al * h) * st.z2 + params.b * a_h * u
    z3 = np.exp(-be * h) * st.z3 + params.c * b_h * v
    return np.concatenate([z1, z2, z3])
