"""Simple motions ``x' = u``, ``y' = v`` with L2 budgets and l-capture.

The relative state ``z = x - y`` obeys ``z' = u - v``; pursuit ends once
``|z| <= l``.  The pursuer sees only the current evader velocity and the
constants ``z0, rho, sigma, l``.

Functions taking ``v`` accept either one vector of shape (n,) or a batch of
shape (N, n).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStart, InsideTerminal
from .game import GameSpec, TerminalSet, make_projector
from .resolving import constant_kernel


@dataclass(frozen=True)
class SimpleMotionParams:
    rho: float
    sigma: float
    l: float = 0.0
    n: int = 2

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if not self.rho > self.sigma:
            raise ValueError(f"rho must exceed sigma: {self.rho} <= {self.sigma}")
        if not self.l >= 0:
            raise ValueError(f"l must be nonnegative, got {self.l}")

    @property
    def delta(self) -> float:
        return self.rho**2 - self.sigma**2


def _check_outside(z0, l):
    nz = np.linalg.norm(z0)
    if not nz > l:
        raise InsideTerminal(f"initial state inside terminal set: |z0| = {nz:.6g} <= l = {l}")
    return nz


def _as_batch(v):
    v = np.asarray(v, dtype=float)
    return np.atleast_2d(v), v.ndim == 1


def lambda_l(v, z0, delta, l):
    """Resolving function of the l-capture game (largest root, clipped at 0)."""
    z0 = np.asarray(z0, dtype=float)
    nz = _check_outside(z0, l)
    V, single = _as_batch(v)
    h = nz**2 - l**2
    vz = V @ z0
    lam = (h * (delta + 2 * vz) + 2 * l * l * delta
           + 2 * l * np.linalg.norm(delta * z0 + h * V, axis=1)) / h**2
    lam = np.maximum(lam, 0.0)
    return float(lam[0]) if single else lam


def lambda_I(v, z0, delta):
    """Point-capture (``l = 0``) resolving function ``max(0, delta + 2<v,z0>) / |z0|^2``."""
    z0 = np.asarray(z0, dtype=float)
    _check_outside(z0, 0.0)
    V, single = _as_batch(v)
    lam = np.maximum(0.0, delta + 2 * (V @ z0)) / float(z0 @ z0)
    return float(lam[0]) if single else lam


def pi_l_strategy(v, z0, delta, l):
    """Parallel-approach control ``u = v + lam (m - z0)``.

    ``m = -l w / |w|`` with ``w = v - lam z0`` is the contact point on the
    terminal ball.  When ``lam = 0`` the control is ``u = v``.
    """
    z0 = np.asarray(z0, dtype=float)
    V, single = _as_batch(v)
    lam = np.atleast_1d(lambda_l(V, z0, delta, l))
    W = V - lam[:, None] * z0
    nw = np.linalg.norm(W, axis=1)
    active = lam > 0
    M = np.zeros_like(V)
    M[active] = -l * W[active] / nw[active, None]
    U = np.where(active[:, None], V + lam[:, None] * (M - z0), V)
    return U[0] if single else U


def pi_I_strategy(v, z0, delta):
    z0 = np.asarray(z0, dtype=float)
    V, single = _as_batch(v)
    lam = np.atleast_1d(lambda_I(V, z0, delta))
    U = V - lam[:, None] * z0
    return U[0] if single else U


def capture_bound(z0, rho, sigma, l) -> float:
    """Capture-time bound ``((|z0| - l) / (rho - sigma))^2`` against any admissible evader."""
    nz = _check_outside(np.asarray(z0, dtype=float), l)
    if not rho > sigma:
        raise ValueError(f"rho must exceed sigma: {rho} <= {sigma}")
    return ((nz - l) / (rho - sigma)) ** 2


def containment_ball(x0, y0, rho, sigma):
    """Ball that holds every point of capture under the l = 0 strategy.

    Returns ``(center, radius)`` with ``center = y0 - sigma^2 z0 / delta`` and
    ``radius = |z0| rho sigma / delta``.
    """
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    z0 = x0 - y0
    nz = np.linalg.norm(z0)
    if nz == 0:
        raise DegenerateStart("pursuer and evader start at the same point")
    delta = rho**2 - sigma**2
    if not delta > 0:
        raise ValueError(f"rho must exceed sigma: {rho} <= {sigma}")
    return y0 - sigma**2 * z0 / delta, nz * rho * sigma / delta


def game_spec(params: SimpleMotionParams) -> GameSpec:
    E = np.eye(params.n)
    return GameSpec(E * 0.0, E, E, p=2.0, rho=params.rho, sigma=params.sigma,
                    terminal=TerminalSet((), params.l))


def projector(params: SimpleMotionParams):
    return make_projector([], n=params.n)


def kernel(params: SimpleMotionParams):
    return constant_kernel(np.eye(params.n), descriptor="identity")
