"""Linear games with integral control constraints.

The relative state obeys ``z' = A z + B u - C v`` with ``int |u|^p <= rho^p``
and ``int |v|^p <= sigma^p``.  The terminal set is ``M0 + M1`` where ``M0`` is
a linear subspace and ``M1`` is the closed ball of radius ``l`` centred at the
origin of the orthogonal complement ``L``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DegenerateBasis

RANK_TOL = 1e-10
BUDGET_FLAG_RTOL = 1e-9
BUDGET_ADMISSIBLE_RTOL = 1e-6


@dataclass(frozen=True)
class TerminalSet:
    M0_basis: tuple = ()
    l: float = 0.0

    def __post_init__(self):
        if self.l < 0:
            raise ValueError(f"terminal radius must be nonnegative, got {self.l}")
        basis = tuple(np.asarray(b, dtype=float).ravel() for b in self.M0_basis)
        object.__setattr__(self, "M0_basis", basis)


@dataclass(frozen=True)
class GameSpec:
    """A linear pursuit game with L_p energy budgets.

    Parameters
    ----------
    A, B, C : array_like
        System matrices of shape (n, n), (n, m) and (n, k).
    p : float
        Exponent of the integral constraint, ``p > 1``.
    rho, sigma : float
        Energy radii of pursuer (``rho > 0``) and evader (``sigma >= 0``).
    terminal : TerminalSet
    expm_provider : callable, optional
        Closed-form ``s -> exp(A s)``.  When absent, :func:`scipy.linalg.expm`
        is used.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    p: float
    rho: float
    sigma: float
    terminal: TerminalSet = field(default_factory=TerminalSet)
    expm_provider: Optional[Callable[[float], np.ndarray]] = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got shape {A.shape}")
        if B.shape[0] != n or C.shape[0] != n:
            raise ValueError(
                f"B and C need {n} rows to match A, got {B.shape} and {C.shape}"
            )
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        for b in self.terminal.M0_basis:
            if b.shape != (n,):
                raise ValueError(f"M0 basis vectors must have length {n}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def k(self) -> int:
        return self.C.shape[1]

    def delta(self, nu_p: float) -> float:
        """Energy advantage ``rho^p - sigma^p * nu^p``."""
        return self.rho**self.p - self.sigma**self.p * nu_p

    def expm(self, s: float) -> np.ndarray:
        if self.expm_provider is not None:
            return np.asarray(self.expm_provider(s), dtype=float)
        return scipy.linalg.expm(self.A * s)


@dataclass(frozen=True)
class Projector:
    """Orthogonal projector onto ``L`` plus an orthonormal basis of ``L``.

    ``basis`` has shape (n, dimL); ``basis.T @ x`` gives coordinates in ``L``,
    which preserve Euclidean norms of projected vectors.
    """

    pi: np.ndarray
    basis: np.ndarray

    @property
    def dimL(self) -> int:
        return self.basis.shape[1]

    def coords(self, x):
        return self.basis.T @ np.asarray(x, dtype=float)


def make_projector(M0_basis: Sequence, n: Optional[int] = None) -> Projector:
    """Projector onto the orthogonal complement of ``span(M0_basis)``.

    Raises
    ------
    DegenerateBasis
        If the basis vectors are linearly dependent (smallest relative
        singular value below 1e-10).
    """
    vecs = [np.asarray(b, dtype=float).ravel() for b in M0_basis]
    if not vecs:
        if n is None:
            raise ValueError("dimension n is required for an empty M0 basis")
        eye = np.eye(n)
        return Projector(pi=eye, basis=eye.copy())
    M = np.column_stack(vecs)
    if n is not None and M.shape[0] != n:
        raise ValueError(f"basis vectors have length {M.shape[0]}, expected {n}")
    n = M.shape[0]
    sv = np.linalg.svd(M, compute_uv=False)
    if len(vecs) > n or sv[-1] <= RANK_TOL * max(sv[0], 1.0):
        raise DegenerateBasis(
            f"M0 basis is rank deficient (singular values {sv})"
        )
    Q = scipy.linalg.null_space(M.T)
    pi = Q @ Q.T
    pi = 0.5 * (pi + pi.T)
    return Projector(pi=pi, basis=Q)


def projected_kernels(game: GameSpec, proj: Projector, s: float):
    """``(pi e^{As} B, pi e^{As} C)`` expressed in coordinates of ``L``.

    Returns arrays of shape (dimL, m) and (dimL, k).
    """
    if s < 0:
        raise ValueError(f"kernel time must be nonnegative, got {s}")
    E = proj.basis.T @ game.expm(s)
    return E @ game.B, E @ game.C


@dataclass(frozen=True)
class BudgetLedger:
    """Running value of ``int |w|^p`` against the cap ``rho^p`` (or ``sigma^p``)."""

    p: float
    cap_p: float
    spent_p: float = 0.0

    @property
    def exceeded(self) -> bool:
        return self.spent_p > self.cap_p * (1 + BUDGET_FLAG_RTOL)

    def admissible(self, rtol: float = BUDGET_ADMISSIBLE_RTOL) -> bool:
        return self.spent_p <= self.cap_p * (1 + rtol)


def budget_spend(ledger: BudgetLedger, speed_p: float, dt: float) -> BudgetLedger:
    """Add ``speed_p * dt`` (left-endpoint rule) to the ledger.

    The returned ledger's :attr:`BudgetLedger.exceeded` flag reports a cap
    violation; nothing is raised.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if speed_p < 0:
        raise ValueError(f"speed_p must be nonnegative, got {speed_p}")
    return dataclasses.replace(ledger, spent_p=ledger.spent_p + speed_p * dt)
