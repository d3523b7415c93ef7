"""Explicit extended reachability/observability and Hankel matrices.

These grow like ``(n_p+1)^N`` and are only meant as small-scale ground
truth for the polynomial-time routines.  Every builder checks the closed
form size against a cap before allocating anything.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .model import EnumerationTooLarge, LpvSsModel, SubMarkovIndex, _word_total, iter_words
from .subspace import numerical_rank

__all__ = [
    "HankelArtifacts",
    "HankelTooLarge",
    "default_cap",
    "extended_obs_matrix",
    "extended_reach_matrix",
    "hankel",
    "hankel_rank",
    "obs_rows",
    "reach_cols",
]

#: default limit on matrix entries; overridable with ``LPVMOR_HANKEL_CAP``
HANKEL_CAP = 1_000_000


class HankelTooLarge(EnumerationTooLarge):
    def __init__(self, size: int, cap: int, shape: tuple[int, int]):
        self.shape = shape
        super().__init__("hankel", size, cap, f" ({shape[0]} x {shape[1]})")


def default_cap() -> int:
    env = os.environ.get("LPVMOR_HANKEL_CAP")
    return int(env) if env else HANKEL_CAP


def reach_cols(n_u: int, n_p: int, N: int) -> int:
    """Column count of the ``N``-step extended reachability matrix."""
    return n_u * (n_p + 1) * _word_total(n_p, N)


def obs_rows(n_y: int, n_p: int, N: int) -> int:
    """Row count of the ``N``-step extended observability matrix."""
    return n_y * (n_p + 1) * _word_total(n_p, N)


def _guard(shape: tuple[int, int], cap: int | None) -> None:
    cap = default_cap() if cap is None else cap
    size = shape[0] * shape[1]
    if size > cap:
        raise HankelTooLarge(size, cap, shape)


def extended_reach_matrix(model: LpvSsModel, N: int, cap: int | None = None) -> np.ndarray:
    """``R_N``: blocks ``A_{w1} ... A_{wm} B_{q0}`` for ``|w| <= N``.

    Column blocks are ordered by word (canonical order) and then ``q0``.
    """
    shape = (model.n_x, reach_cols(model.n_u, model.n_p, N))
    _guard(shape, cap)
    blocks = []
    for word in iter_words(model.n_p, N):
        M = np.eye(model.n_x)
        for j in word:
            M = M @ model.A[j]
        blocks.extend(M @ model.B[q0] for q0 in range(model.n_p + 1))
    return np.hstack(blocks)


def extended_obs_matrix(model: LpvSsModel, N: int, cap: int | None = None) -> np.ndarray:
    """``O_N``: blocks ``C_q A_{w1} ... A_{wm}`` for ``|w| <= N``.

    Row blocks are ordered by word (canonical order) and then ``q``.
    """
    shape = (obs_rows(model.n_y, model.n_p, N), model.n_x)
    _guard(shape, cap)
    blocks = []
    for word in iter_words(model.n_p, N):
        M = np.eye(model.n_x)
        for j in word:
            M = M @ model.A[j]
        blocks.extend(model.C[q] @ M for q in range(model.n_p + 1))
    return np.vstack(blocks)


@dataclass
class HankelArtifacts:
    R: np.ndarray
    O: np.ndarray
    H: np.ndarray
    N: int
    n_y: int
    n_u: int
    n_p: int

    def block_index(self, row_block: int, col_block: int) -> SubMarkovIndex:
        """Sub-Markov parameter stored in block ``(row_block, col_block)`` of ``H``.

        Row block ``(a, q)`` times column block ``(b, q0)`` is
        ``eta_{q,q0}(a b)`` with words concatenated.
        """
        k = self.n_p + 1
        words = list(iter_words(self.n_p, self.N))
        a, q = divmod(row_block, k)
        b, q0 = divmod(col_block, k)
        return SubMarkovIndex(q, q0, words[a] + words[b])

    def block(self, row_block: int, col_block: int) -> np.ndarray:
        i, j = row_block * self.n_y, col_block * self.n_u
        return self.H[i : i + self.n_y, j : j + self.n_u]


def hankel(model: LpvSsModel, N: int, cap: int | None = None) -> HankelArtifacts:
    """``H = O_N R_N`` together with its factors."""
    rows = obs_rows(model.n_y, model.n_p, N)
    cols = reach_cols(model.n_u, model.n_p, N)
    _guard((rows, model.n_x), cap)
    _guard((model.n_x, cols), cap)
    _guard((rows, cols), cap)
    O = extended_obs_matrix(model, N, cap)
    R = extended_reach_matrix(model, N, cap)
    return HankelArtifacts(R, O, O @ R, N, model.n_y, model.n_u, model.n_p)


def hankel_rank(model: LpvSsModel, N: int, tol: float = 0.0, cap: int | None = None) -> int:
    return numerical_rank(hankel(model, N, cap).H, tol)
