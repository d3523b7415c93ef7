"""Partial reachability / unobservability subspaces.

The reachability space after ``N`` steps is grown by repeatedly applying
every ``A_i`` to the current basis and re-orthonormalising, which is
polynomial in ``n_x`` and ``N`` even though the space is spanned by
exponentially many products.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .model import LpvSsModel

__all__ = [
    "SubspaceBasis",
    "is_observable",
    "is_reachable",
    "numerical_rank",
    "orth",
    "reach_basis",
    "unobs_cobasis",
]


def _threshold(s: np.ndarray, shape: tuple[int, int], tol: float) -> float:
    smax = s[0] if s.size else 0.0
    if tol > 0:
        return tol * smax
    return max(shape) * np.finfo(float).eps * smax


def numerical_rank(M, tol: float = 0.0) -> int:
    """Number of singular values above the :func:`orth` threshold."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > _threshold(s, M.shape, tol)))


def orth(M, tol: float = 0.0) -> np.ndarray:
    """Orthonormal basis for the range of ``M``.

    Singular values at or below ``tol * sigma_max`` are discarded; ``tol=0``
    selects ``max(M.shape) * eps * sigma_max``.  An empty or all-zero ``M``
    gives a basis with zero columns.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("orth expects a 2-d array")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if M.size == 0:
        return np.zeros((M.shape[0], 0))
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > _threshold(s, M.shape, tol)))
    U = U[:, :r]
    # fix the sign of each column so results are reproducible across LAPACKs
    if r:
        piv = np.argmax(np.abs(U), axis=0)
        U = U * np.sign(U[piv, np.arange(r)])
    return U


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis (``kind='reachability'``, columns of an ``n_x x r``
    matrix) or cobasis (``kind='observability'``, rows of an ``r x n_x``
    matrix) of a partial subspace."""

    matrix: np.ndarray
    kind: Literal["reachability", "observability"]
    N: int
    tol: float
    #: depth at which the rank stopped growing (<= N)
    converged_at: int

    @property
    def r(self) -> int:
        return self.matrix.shape[1] if self.kind == "reachability" else self.matrix.shape[0]

    @property
    def V(self) -> np.ndarray:
        """Basis as columns, for either kind."""
        return self.matrix if self.kind == "reachability" else self.matrix.T


def _grow(A: np.ndarray, B: np.ndarray, N: int, tol: float) -> tuple[np.ndarray, int]:
    n_x = A.shape[1]
    V = orth(np.concatenate(list(B), axis=1) if B.shape[2] else np.zeros((n_x, 0)), tol)
    for k in range(1, N + 1):
        if V.shape[1] == 0 or V.shape[1] == n_x:
            return V, k - 1
        r_prev = V.shape[1]
        V = orth(np.hstack([V, *(A @ V)]), tol)
        if V.shape[1] == r_prev:
            # the chain R_0 <= R_1 <= ... is stationary from here on
            return V, k - 1
    return V, N


def reach_basis(model: LpvSsModel, N: int, tol: float = 0.0) -> SubspaceBasis:
    """Orthonormal basis ``V`` with ``Im(V)`` the ``N``-step reachability space.

    Starts from ``orth([B_0 ... B_{n_p}])`` and applies
    ``V <- orth([V, A_0 V, ..., A_{n_p} V])`` up to ``N`` times, stopping
    early once the rank no longer grows.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    V, k = _grow(model.A, model.B, N, tol)
    return SubspaceBasis(V, "reachability", N, tol, k)


def unobs_cobasis(model: LpvSsModel, N: int, tol: float = 0.0) -> SubspaceBasis:
    """Orthonormal cobasis ``W`` whose kernel is the ``N``-step unobservable space.

    Runs the reachability iteration on the dual data ``(A_i^T, C_i^T)`` and
    returns the transpose.
    """
    dual = reach_basis(model.transpose(), N, tol)
    return SubspaceBasis(dual.matrix.T, "observability", N, tol, dual.converged_at)


def is_reachable(model: LpvSsModel, tol: float = 0.0) -> bool:
    return reach_basis(model, model.n_x - 1, tol).r == model.n_x


def is_observable(model: LpvSsModel, tol: float = 0.0) -> bool:
    return unobs_cobasis(model, model.n_x - 1, tol).r == model.n_x


def is_minimal(model: LpvSsModel, tol: float = 0.0) -> bool:
    return is_reachable(model, tol) and is_observable(model, tol)
