"""Numeric resolving function through support-function feasibility.

For fixed ``(t, tau, v, z0)`` the pursuer may burn resource at rate ``lam``
whenever the ball-shaped set ``lam * (M1 - xi)`` meets

    U(lam) = (|F v|^p + lam * delta)^(1/p) * Phi_B S - Phi_C v,

with ``Phi_B = pi e^{A(t-tau)} B``, ``Phi_C = pi e^{A(t-tau)} C`` and
``xi = pi e^{At} z0``.  Two compact convex sets intersect iff the sum of the
support function of one at ``psi`` and of the other at ``-psi`` is
nonnegative for every unit ``psi``; the minimum of that sum is the
*feasibility margin* used here.  The resolving function is the largest
feasible ``lam``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (
    AlreadyCaptured,
    AssumptionViolated,
    BracketNotFound,
    NonFinite,
    UnsupportedDimension,
)
from .game import GameSpec, Projector, projected_kernels

LAMBDA_ATOL = 1e-8
MARGIN_TOL = 1e-10
MAX_DOUBLINGS = 60
N_ANGLES = 720
N_LATTICE = 2000
DESCENT_STEP_MIN = 1e-8
DEFAULT_NU_HORIZON = 200.0
DEFAULT_NU_SAMPLES = 4001


@dataclass
class KernelF:
    """Continuous matrix kernel ``F(s)`` with ``Phi_B(s) F(s) = Phi_C(s)``.

    ``nu_p`` may be supplied when the gain is known in closed form; otherwise
    it is estimated on first use with :func:`estimate_nu`.
    """

    provider: Callable[[float], np.ndarray]
    descriptor: str = "F"
    nu_p: Optional[float] = None
    p: float = 2.0
    nu_horizon: float = DEFAULT_NU_HORIZON

    def __call__(self, s: float) -> np.ndarray:
        val = np.atleast_2d(np.asarray(self.provider(s), dtype=float))
        if not np.all(np.isfinite(val)):
            raise NonFinite(f"{self.descriptor} is not finite at s={s}")
        return val

    def gain_p(self) -> float:
        if self.nu_p is None:
            self.nu_p = estimate_nu(self, self.p, self.nu_horizon).nu_p
        return self.nu_p


def constant_kernel(F, descriptor: str = "constant F", p: float = 2.0) -> KernelF:
    F = np.atleast_2d(np.asarray(F, dtype=float))
    nu_p = float(np.linalg.norm(F, 2)) ** p
    return KernelF(lambda s: F, descriptor=descriptor, nu_p=nu_p, p=p)


def kernel_from_equation(game: GameSpec, proj: Projector, residual_tol: float = 1e-9) -> KernelF:
    """Kernel obtained by solving ``Phi_B(s) X = Phi_C(s)`` in least squares.

    At ``s = 0`` both sides usually vanish, so the value there is taken as
    the limit from a small positive ``s``.  A residual above ``residual_tol``
    (relative) means the matching condition fails for this game.
    """

    def provider(s):
        s_eff = max(float(s), 1e-7)
        PB, PC = projected_kernels(game, proj, s_eff)
        X, *_ = np.linalg.lstsq(PB, PC, rcond=None)
        res = np.linalg.norm(PB @ X - PC)
        if res > residual_tol * max(1.0, np.linalg.norm(PC)):
            raise AssumptionViolated(
                f"kernel equation has no solution at s={s} (residual {res:.3e})"
            )
        return X

    return KernelF(provider, descriptor="lstsq solution of kernel equation", p=game.p)


@dataclass(frozen=True)
class ResolvingSample:
    t: float
    tau: float
    v: np.ndarray
    z0: np.ndarray
    lam: float
    margin_at_lambda: float
    iterations: int


@dataclass(frozen=True)
class NuEstimate:
    nu_p: float
    horizon: float
    argmax_s: float


def _delta(game: GameSpec, F: KernelF) -> float:
    d = game.delta(F.gain_p())
    if not d > 0:
        raise AssumptionViolated(
            f"rho^p must exceed sigma^p * nu^p (delta = {d:.6g})"
        )
    return d


@dataclass(frozen=True)
class _Pieces:
    """Quantities of the margin that do not depend on ``lam`` or ``psi``."""

    Fv_p: float
    delta: float
    p: float
    PB: np.ndarray
    PCv: np.ndarray
    xi: np.ndarray
    l: float

    def support_U(self, lam, psi):
        psi = np.atleast_2d(psi)
        scale = (self.Fv_p + lam * self.delta) ** (1.0 / self.p)
        return scale * np.linalg.norm(psi @ self.PB, axis=1) - psi @ self.PCv

    def margin(self, lam, psi):
        psi = np.atleast_2d(psi)
        support_K = lam * (self.l * np.linalg.norm(psi, axis=1) + psi @ self.xi)
        return self.support_U(lam, psi) + support_K


def _pieces(game, proj, F, t, tau, v, z0=None):
    if not 0 <= tau <= t:
        raise ValueError(f"need 0 <= tau <= t, got tau={tau}, t={t}")
    delta = _delta(game, F)
    v = np.asarray(v, dtype=float).ravel()
    s = t - tau
    PB, PC = projected_kernels(game, proj, s)
    Fv_p = float(np.linalg.norm(F(s) @ v)) ** game.p
    xi = np.zeros(proj.dimL)
    if z0 is not None:
        xi = proj.basis.T @ game.expm(t) @ np.asarray(z0, dtype=float).ravel()
    return _Pieces(Fv_p, delta, game.p, PB, PC @ v, xi, game.terminal.l)


def support_U(game, proj, F, t, tau, v, lam, psi) -> float:
    """Support function of ``U(t, tau, v, lam)`` at the unit vector ``psi`` of ``L``.

    ``psi`` is given in the coordinates of ``L`` (length ``dimL``).
    """
    psi = np.asarray(psi, dtype=float).ravel()
    if abs(np.linalg.norm(psi) - 1) > 1e-9:
        raise ValueError("psi must be a unit vector")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    return float(_pieces(game, proj, F, t, tau, v).support_U(lam, psi)[0])


# sphere minimisation ---------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    polar = np.arccos(1 - 2 * i / n)
    azim = np.pi * (1 + 5**0.5) * i
    return np.column_stack(
        [np.cos(azim) * np.sin(polar), np.sin(azim) * np.sin(polar), np.cos(polar)]
    )


@functools.lru_cache(maxsize=None)
def _circle(n: int) -> np.ndarray:
    ang = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return np.column_stack([np.cos(ang), np.sin(ang)])


def _min_circle(f):
    pts = _circle(N_ANGLES)
    vals = f(pts)
    step = 2 * np.pi / N_ANGLES
    best = float(vals.min())
    for i in np.argsort(vals)[:3]:
        a0 = 2 * np.pi * i / N_ANGLES
        res = minimize_scalar(
            lambda a: f(np.array([np.cos(a), np.sin(a)]))[0],
            bounds=(a0 - step, a0 + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = min(best, float(res.fun))
    return best


def _tangent_frame(x):
    a = np.eye(3)[np.argmin(np.abs(x))]
    e1 = np.cross(x, a)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(x, e1)


def _min_sphere(f):
    pts = _fibonacci_sphere(N_LATTICE)
    vals = f(pts)
    best = float(vals.min())
    moves = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    for i in np.argsort(vals)[:3]:
        # coordinate descent in the chart psi = normalize(x0 + a e1 + b e2)
        x0, fx = pts[i], vals[i]
        frame = np.array(_tangent_frame(x0))
        ab = np.zeros(2)
        step = 0.1
        while step > DESCENT_STEP_MIN:
            trial = x0 + (ab + step * moves) @ frame
            trial /= np.sqrt(np.einsum("ij,ij->i", trial, trial))[:, None]
            tv = f(trial)
            j = int(np.argmin(tv))
            if tv[j] < fx:
                ab, fx = ab + step * moves[j], tv[j]
            else:
                step *= 0.5
        best = min(best, float(fx))
    return best


def _min_over_unit_sphere(f, dim: int) -> float:
    if dim == 1:
        return float(f(np.array([[1.0], [-1.0]])).min())
    if dim == 2:
        return _min_circle(f)
    if dim == 3:
        return _min_sphere(f)
    raise UnsupportedDimension(f"sphere search supports dim(L) <= 3, got {dim}")


def _check_not_captured(pieces: _Pieces):
    if np.linalg.norm(pieces.xi) <= pieces.l:
        raise AlreadyCaptured(
            f"|pi e^(tA) z0| = {np.linalg.norm(pieces.xi):.6g} <= l = {pieces.l}"
        )


def feasibility_margin(game, proj, F, t, tau, v, z0, lam) -> float:
    """Minimum over unit ``psi`` in ``L`` of the support-function sum.

    Nonnegative exactly when ``lam`` is admissible for the resolving function.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if proj.dimL > 3:
        raise UnsupportedDimension(f"sphere search supports dim(L) <= 3, got {proj.dimL}")
    pieces = _pieces(game, proj, F, t, tau, v, z0)
    _check_not_captured(pieces)
    return _min_over_unit_sphere(lambda psi: pieces.margin(lam, psi), proj.dimL)


def resolve_lambda_numeric(game, proj, F, t, tau, v, z0) -> ResolvingSample:
    """Largest ``lam >= 0`` with nonnegative feasibility margin.

    The bracket grows geometrically from ``lam = 1`` and is then bisected to
    an absolute width of 1e-8.

    Raises
    ------
    BracketNotFound
        If the margin stays nonnegative through 60 doublings.
    """
    if proj.dimL > 3:
        raise UnsupportedDimension(f"sphere search supports dim(L) <= 3, got {proj.dimL}")
    pieces = _pieces(game, proj, F, t, tau, v, z0)
    _check_not_captured(pieces)

    def margin(lam):
        return _min_over_unit_sphere(lambda psi: pieces.margin(lam, psi), proj.dimL)

    iterations = 0
    lo, hi = 0.0, 1.0
    m_lo = margin(0.0)
    m_hi = margin(hi)
    doublings = 0
    while m_hi >= -MARGIN_TOL:
        lo, m_lo = hi, m_hi
        hi *= 2.0
        doublings += 1
        if doublings > MAX_DOUBLINGS:
            raise BracketNotFound(
                "feasibility margin stayed nonnegative up to lam = 2^60; "
                "the feasible set of lam is unbounded"
            )
        m_hi = margin(hi)
    while hi - lo > LAMBDA_ATOL:
        mid = 0.5 * (lo + hi)
        m_mid = margin(mid)
        iterations += 1
        if m_mid >= -MARGIN_TOL:
            lo, m_lo = mid, m_mid
        else:
            hi = mid
    return ResolvingSample(
        t=float(t),
        tau=float(tau),
        v=np.asarray(v, dtype=float).ravel(),
        z0=np.asarray(z0, dtype=float).ravel(),
        lam=lo,
        margin_at_lambda=m_lo,
        iterations=iterations,
    )


def estimate_nu(F: KernelF, p: float, horizon: float, n_samples: int = DEFAULT_NU_SAMPLES) -> NuEstimate:
    """Estimate ``nu^p`` as ``sup_{0<=s<=horizon} ||F(s)||_op^p``.

    The best grid sample is refined by a bounded golden-section search on the
    two neighbouring grid cells.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    grid = np.linspace(0.0, horizon, n_samples)

    def opnorm(s):
        return float(np.linalg.norm(F(s), 2))

    norms = np.array([opnorm(s) for s in grid])
    if not np.all(np.isfinite(norms)):
        raise NonFinite(f"{F.descriptor} is not finite on [0, {horizon}]")
    i = int(np.argmax(norms))
    best_s, best = grid[i], norms[i]
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, n_samples - 1)]
    res = minimize_scalar(lambda s: -opnorm(s), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12})
    if -res.fun > best:
        best_s, best = float(res.x), -float(res.fun)
    return NuEstimate(nu_p=best**p, horizon=float(horizon), argmax_s=float(best_s))
