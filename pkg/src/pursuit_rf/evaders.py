"""Open-loop evader controls with exactly known L2 energy.

Every signal is described by a direction ``d(t)`` (unit or zero vector) and
a speed-squared density whose cumulative energy ``G(t) = int_0^t |v|^2`` is
available in closed form.  The simulators apply the zero-order-hold
realisation

    v_k = d(t_k) * sqrt((G(t_k + h) - G(t_k)) / h),

which spends exactly the signal's energy on every step, so admissibility
carries over to the discrete run.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadSpec

KINDS = ("zero", "constant_decay", "radial_flee", "perpendicular", "piecewise", "seeded_random")


@dataclass(frozen=True)
class EvaderSpec:
    kind: str = "zero"
    params: dict = field(default_factory=dict)
    budget_fraction: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BadSpec(f"unknown evader kind {self.kind!r}; expected one of {KINDS}")
        if not 0 <= self.budget_fraction <= 1:
            raise BadSpec(f"budget_fraction must lie in [0, 1], got {self.budget_fraction}")

    def to_dict(self):
        return {"kind": self.kind, "params": dict(self.params), "budget_fraction": self.budget_fraction}


class EvaderSignal:
    """Piecewise-smooth control ``t -> v(t)``.

    Parameters
    ----------
    segments : list of (t_start, t_end, direction, kind, coef)
        ``kind`` is ``"const"`` (energy density ``coef``) or ``"exp"``
        (density ``coef * exp(-2 k t)`` with ``k`` stored as the 6th item).
    """

    def __init__(self, n, segments=()):
        self.n = n
        self._segments = list(segments)

    def _density(self, seg, t):
        t0, t1, _, kind, coef, *rest = seg
        if kind == "const":
            return np.full_like(t, coef)
        return coef * np.exp(-2 * rest[0] * t)

    def _cum(self, seg, t):
        t0, t1, _, kind, coef, *rest = seg
        tc = np.clip(t, t0, t1)
        if kind == "const":
            return coef * (tc - t0)
        k = rest[0]
        return coef / (2 * k) * (np.exp(-2 * k * t0) - np.exp(-2 * k * tc))

    def cumulative_energy(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for seg in self._segments:
            out = out + self._cum(seg, t)
        return out

    @property
    def total_energy(self) -> float:
        return float(self.cumulative_energy(np.array(np.inf)))

    def directions(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        D = np.zeros((t.size, self.n))
        for t0, t1, d, *_ in self._segments:
            mask = (t >= t0) & (t < t1)
            D[mask] = d
        return D

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        dens = np.zeros_like(t_arr)
        for seg in self._segments:
            t0, t1 = seg[0], seg[1]
            mask = (t_arr >= t0) & (t_arr < t1)
            dens[mask] = self._density(seg, t_arr[mask])
        V = self.directions(t_arr) * np.sqrt(dens)[:, None]
        return V[0] if np.ndim(t) == 0 else V

    def zoh(self, t_left, h):
        """Step values whose energy over ``[t_k, t_k + h_k)`` is exact."""
        t_left = np.atleast_1d(np.asarray(t_left, dtype=float))
        h = np.broadcast_to(np.asarray(h, dtype=float), t_left.shape)
        E = self.cumulative_energy(t_left + h) - self.cumulative_energy(t_left)
        speed = np.sqrt(np.maximum(E, 0.0) / h)
        return self.directions(t_left) * speed[:, None]


def _unit(x):
    x = np.asarray(x, dtype=float).ravel()
    nx = np.linalg.norm(x)
    if nx == 0:
        raise BadSpec("direction must be nonzero")
    return x / nx


def _perpendicular(ref, rng):
    n = ref.size
    if n == 1:
        return np.zeros(1)
    w = rng.standard_normal(n) if rng is not None else np.roll(np.eye(n)[0], 1)
    w = w - (w @ ref) * ref
    if np.linalg.norm(w) < 1e-12:
        w = np.eye(n)[np.argmin(np.abs(ref))]
        w = w - (w @ ref) * ref
    return _unit(w)


def make_evader(spec: EvaderSpec, sigma: float, horizon: float, n: int = None, reference=None) -> EvaderSignal:
    """Build the evader control described by ``spec``.

    Parameters
    ----------
    spec : EvaderSpec
    sigma : float
        Evader energy radius; the signal spends ``budget_fraction * sigma^2``.
    horizon : float
        Time scale used for the default segment layout of the piecewise kinds.
    n : int
        Dimension of the control.
    reference : array_like
        Unit direction of the initial miss vector ``z0`` (pursuer minus evader);
        used by ``radial_flee`` and ``perpendicular``.
    """
    if not horizon > 0:
        raise BadSpec("horizon must be positive")
    if reference is None and n is None:
        raise BadSpec("either n or reference is required")
    ref = _unit(reference) if reference is not None else np.eye(n)[0]
    n = ref.size if n is None else n
    if ref.size != n:
        raise BadSpec(f"reference has length {ref.size}, expected {n}")
    P = dict(spec.params)
    seed = P.get("seed")
    rng = np.random.default_rng(seed) if seed is not None else None
    energy = spec.budget_fraction * sigma**2
    kind = spec.kind

    if kind == "zero" or energy == 0:
        return EvaderSignal(n)

    if kind in ("constant_decay", "radial_flee", "perpendicular"):
        k = P.get("k")
        if k is None:
            k = float(rng.uniform(0.5, 3.0)) if rng is not None else 1.0
        if not k > 0:
            raise BadSpec(f"decay rate k must be positive, got {k}")
        if kind == "constant_decay":
            if "direction" in P:
                d = _unit(P["direction"])
            elif rng is not None:
                d = _unit(rng.standard_normal(n))
            else:
                d = np.eye(n)[0]
        elif kind == "radial_flee":
            d = -ref
        else:
            d = _perpendicular(ref, rng)
        if d.size != n:
            raise BadSpec(f"direction has length {d.size}, expected {n}")
        if not np.any(d):
            # a line has no direction perpendicular to the miss
            return EvaderSignal(n)
        # v(t) = d sqrt(2 k E) e^{-k t} has int_0^inf |v|^2 = E
        return EvaderSignal(n, [(0.0, np.inf, d, "exp", 2 * k * energy, k)])

    if kind == "piecewise":
        bps = P.get("breakpoints")
        if bps is None:
            bps = list(horizon * np.array([0.1, 0.2, 0.3, 0.4]))
        bps = [float(b) for b in bps]
        if any(b <= 0 for b in bps) or any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise BadSpec("breakpoints must be positive and increasing")
        dirs = P.get("directions")
        if dirs is None:
            cycle = [np.eye(n)[i % n] * (1 if (i // n) % 2 == 0 else -1) for i in range(2 * n)]
            if rng is not None:
                cycle = [_unit(rng.standard_normal(n)) for _ in range(len(bps))]
            dirs = [cycle[i % len(cycle)] for i in range(len(bps))]
        if len(dirs) != len(bps):
            raise BadSpec("need one direction per segment")
        edges = [0.0] + bps
        share = energy / len(bps)
        segs = [(t0, t1, _unit(d), "const", share / (t1 - t0))
                for t0, t1, d in zip(edges, edges[1:], dirs)]
        return EvaderSignal(n, segs)

    if kind == "seeded_random":
        if rng is None:
            raise BadSpec("seeded_random needs params.seed")
        nseg = int(P.get("segments", 8))
        window = float(P.get("window", 0.5))
        if nseg < 1 or not window > 0:
            raise BadSpec("segments must be >= 1 and window positive")
        edges = np.linspace(0.0, window * horizon, nseg + 1)
        shares = energy * rng.dirichlet(np.ones(nseg))
        segs = []
        for t0, t1, e in zip(edges, edges[1:], shares):
            d = _unit(rng.standard_normal(n))
            segs.append((float(t0), float(t1), d, "const", e / (t1 - t0)))
        return EvaderSignal(n, segs)

    raise BadSpec(f"unknown evader kind {kind!r}")


def suite(seed: int):
    """One spec of every kind, varied by ``seed``."""
    return [EvaderSpec(kind, {"seed": seed}) if kind != "zero" else EvaderSpec("zero") for kind in KINDS]
