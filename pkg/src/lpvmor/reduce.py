"""Moment-matching reduction, minimization and isomorphism recovery."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .model import (
    DEFAULT_ENUM_CAP,
    EnumerationTooLarge,
    LpvSsModel,
    _check_compatible,
    _empty_model,
    _frozen,
    _word_total,
    stack_models_parallel,
    sub_markov_levels,
)
from .subspace import is_minimal, numerical_rank, reach_basis, unobs_cobasis

__all__ = [
    "MatchReport",
    "RankConditionError",
    "ReductionResult",
    "check_partial_realization",
    "find_isomorphism",
    "minimize",
    "reduce",
]

Mode = Literal["R", "O", "T"]

#: condition number of ``W V`` above which mode T emits a warning
COND_WARN = 1e12


class RankConditionError(RuntimeError):
    """Two-sided reduction needs ``rank(V) == rank(W) == rank(WV)``."""

    def __init__(self, rank_V: int, rank_W: int, rank_WV: int):
        self.rank_V, self.rank_W, self.rank_WV = rank_V, rank_W, rank_WV
        super().__init__(
            "rank condition violated: "
            f"rank(V)={rank_V}, rank(W)={rank_W}, rank(WV)={rank_WV}"
        )


@dataclass
class ReductionResult:
    reduced: LpvSsModel
    mode: Mode
    N: int
    tol: float
    V: np.ndarray | None = None
    W: np.ndarray | None = None
    #: condition number of ``W V`` (mode T only)
    cond: float | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def r(self) -> int:
        return self.reduced.n_x

    @property
    def guarantee(self) -> int:
        """Length up to which sub-Markov parameters are matched."""
        return 2 * self.N if self.mode == "T" else self.N

    def metadata(self) -> dict:
        return {
            "mode": self.mode,
            "N": self.N,
            "r": self.r,
            "guarantee": self.guarantee,
            "tol": self.tol,
            "cond_WV": self.cond,
            "warnings": list(self.warnings),
        }


def _project(model: LpvSsModel, L: np.ndarray, R: np.ndarray) -> LpvSsModel:
    """``(L A_i R, L B_i, C_i R)`` for a left factor ``L`` and right factor ``R``."""
    if R.shape[1] == 0:
        return _empty_model(model.n_u, model.n_y, model.n_p)
    return _frozen(L @ model.A @ R, L @ model.B, model.C @ R)


def reduce(model: LpvSsModel, N: int, mode: Mode = "R", tol: float = 0.0) -> ReductionResult:
    """Reduce ``model`` so that its sub-Markov parameters are kept up to length ``N``.

    Parameters
    ----------
    model : LpvSsModel
    N : int
        Matching depth; modes ``R`` and ``O`` match every parameter of length
        ``<= N``, mode ``T`` every parameter of length ``<= 2N``.
    mode : {'R', 'O', 'T'}
        Project onto the reachability space (``R``), along the unobservable
        space (``O``), or both (``T``).
    tol : float
        Relative rank tolerance passed to :func:`~lpvmor.subspace.orth`.

    Raises
    ------
    RankConditionError
        In mode ``T`` when ``rank(V) = rank(W) = rank(WV)`` fails.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    if mode not in ("R", "O", "T"):
        raise ValueError(f"unknown mode {mode!r}; expected 'R', 'O' or 'T'")

    if mode == "R":
        V = reach_basis(model, N, tol).matrix
        # orthonormal columns, so V^T is a left inverse
        return ReductionResult(_project(model, V.T, V), mode, N, tol, V=V)
    if mode == "O":
        W = unobs_cobasis(model, N, tol).matrix
        return ReductionResult(_project(model, W, W.T), mode, N, tol, W=W)

    V = reach_basis(model, N, tol).matrix
    W = unobs_cobasis(model, N, tol).matrix
    WV = W @ V
    rV, rW = V.shape[1], W.shape[0]
    rWV = numerical_rank(WV, tol)
    if not rV == rW == rWV:
        raise RankConditionError(rV, rW, rWV)
    res = ReductionResult(_empty_model(model.n_u, model.n_y, model.n_p), mode, N, tol, V=V, W=W)
    if rV == 0:
        return res
    res.cond = float(np.linalg.cond(WV))
    if res.cond > COND_WARN:
        msg = f"W V is ill-conditioned (cond={res.cond:.3g})"
        res.warnings.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    # right factor V (WV)^{-1}, via a solve rather than an explicit inverse
    R = np.linalg.solve(WV.T, V.T).T
    res.reduced = _project(model, W, R)
    return res


def minimize(model: LpvSsModel, tol: float = 0.0) -> LpvSsModel:
    """Reachable and observable model with the same input-output map.

    Reachability reduction at depth ``n_x - 1`` followed by observability
    reduction at depth ``r - 1`` of the intermediate order ``r``.
    """
    reach = reduce(model, max(model.n_x - 1, 0), "R", tol).reduced
    if reach.n_x == 0:
        return reach
    return reduce(reach, reach.n_x - 1, "O", tol).reduced


def _reachable_words(model: LpvSsModel, tol: float):
    """Words ``(word, q0, column)`` whose products ``A_{w1}..A_{wm} B_{q0} e_c``
    span the reachable space, picked greedily by breadth-first extension."""
    n = model.n_x
    chosen, cols = [], np.zeros((n, 0))

    def try_add(key, v):
        nonlocal cols
        trial = np.hstack([cols, v[:, None]])
        if numerical_rank(trial, tol) > cols.shape[1]:
            chosen.append(key)
            cols = trial
            return True
        return False

    frontier = []
    for q0 in range(model.n_p + 1):
        for c in range(model.n_u):
            if try_add(((), q0, c), model.B[q0][:, c]):
                frontier.append(((), q0, c))
    while frontier and cols.shape[1] < n:
        nxt = []
        for word, q0, c in frontier:
            v = cols[:, chosen.index((word, q0, c))]
            for j in range(model.n_p + 1):
                key = ((j,) + word, q0, c)
                if try_add(key, model.A[j] @ v):
                    nxt.append(key)
        frontier = nxt
    return chosen, cols


def _word_columns(model: LpvSsModel, keys) -> np.ndarray:
    out = np.zeros((model.n_x, len(keys)))
    for i, (word, q0, c) in enumerate(keys):
        v = model.B[q0][:, c]
        for j in reversed(word):
            v = model.A[j] @ v
        out[:, i] = v
    return out


def isomorphism_residual(m1: LpvSsModel, m2: LpvSsModel, S: np.ndarray) -> float:
    """Largest relative residual of ``A2 S = S A1``, ``B2 = S B1``, ``C2 S = C1``."""
    scale = max(
        1.0,
        *(float(np.max(np.abs(M))) if M.size else 0.0 for M in (m1.A, m1.B, m1.C, m2.A, m2.B, m2.C)),
    )
    scale *= max(1.0, float(np.linalg.norm(S, 2)))
    res = max(
        float(np.max(np.abs(m2.A @ S - S @ m1.A), initial=0.0)),
        float(np.max(np.abs(m2.B - S @ m1.B), initial=0.0)),
        float(np.max(np.abs(m2.C @ S - m1.C), initial=0.0)),
    )
    return res / scale


def find_isomorphism(m1: LpvSsModel, m2: LpvSsModel, tol: float = 1e-8) -> np.ndarray | None:
    """Nonsingular ``S`` with ``A2_i S = S A1_i``, ``B2_i = S B1_i``, ``C2_i S = C1_i``.

    Both models must be minimal and of equal order, otherwise ``None``.  The
    candidate is ``S = R2 pinv(R1)`` where ``R1`` collects reachability
    products of ``m1`` spanning its state space and ``R2`` the products of
    ``m2`` for the same words; it is returned only if all three relation
    families hold to relative accuracy ``tol``.
    """
    try:
        _check_compatible(m1, m2)
    except ValueError:
        return None
    if m1.n_x != m2.n_x:
        return None
    if m1.n_x == 0:
        return np.zeros((0, 0))
    if not (is_minimal(m1) and is_minimal(m2)):
        return None
    keys, R1 = _reachable_words(m1, 0.0)
    if R1.shape[1] < m1.n_x:
        return None
    R2 = _word_columns(m2, keys)
    S = R2 @ np.linalg.pinv(R1)
    if numerical_rank(S) < m1.n_x:
        return None
    if isomorphism_residual(m1, m2, S) > tol:
        return None
    return S


@dataclass
class MatchReport:
    """Outcome of comparing sub-Markov parameters of two models up to length ``N``."""

    N: int
    tol: float
    max_abs: float
    max_rel: float
    passed: bool
    #: 'enumerate' or 'subspace'
    method: str
    count: int | None = None
    #: first parameter exceeding the tolerance, if enumeration was used
    worst: str | None = None

    def __bool__(self) -> bool:
        return self.passed


def _check_enumerate(m1, m2, N, tol, cap) -> MatchReport:
    max_abs = 0.0
    max_mag = 0.0
    worst = None
    count = 0
    k = m1.n_p + 1
    worst_val = -1.0
    for m, (L1, L2) in enumerate(zip(sub_markov_levels(m1, N, cap), sub_markov_levels(m2, N, cap))):
        count += L1.shape[0] * k * k
        diff = np.abs(L1 - L2).reshape(L1.shape[0], k, k, -1).max(axis=-1, initial=0.0)
        mag = max(np.max(np.abs(L1), initial=0.0), np.max(np.abs(L2), initial=0.0))
        max_mag = max(max_mag, float(mag))
        level_max = float(diff.max(initial=0.0))
        if level_max > worst_val and diff.size:
            worst_val = level_max
            wi, q, q0 = np.unravel_index(int(np.argmax(diff)), diff.shape)
            word = np.unravel_index(wi, (k,) * m) if m else ()
            worst = f"eta[{q},{q0}]({','.join(map(str, word)) or 'eps'})"
        max_abs = max(max_abs, level_max)
    max_rel = max_abs / max_mag if max_mag > 0 else (0.0 if max_abs == 0 else np.inf)
    passed = max_rel <= tol
    return MatchReport(N, tol, max_abs, max_rel, passed, "enumerate", count, None if passed else worst)


def _check_subspace(m1, m2, N, tol) -> MatchReport:
    # eta1(s) - eta2(s) = C_q^d A_s^d B_q0^d of the difference system, so all
    # of them vanish up to length N iff every C_q^d annihilates its R_N.
    diff = stack_models_parallel(m1, m2)
    V = reach_basis(diff, N).matrix
    vals = np.abs(diff.C @ V) if V.size else np.zeros(1)
    max_abs = float(vals.max(initial=0.0))
    Cs = np.concatenate([m1.C, m2.C], axis=2)
    scale = max(float(np.linalg.norm(Cq, 2)) for Cq in Cs) if Cs.size else 0.0
    max_rel = max_abs / scale if scale > 0 else (0.0 if max_abs == 0 else np.inf)
    return MatchReport(N, tol, max_abs, max_rel, max_rel <= tol, "subspace")


def check_partial_realization(
    m1: LpvSsModel,
    m2: LpvSsModel,
    N: int,
    tol: float = 1e-8,
    method: Literal["auto", "enumerate", "subspace"] = "auto",
    cap: int | None = DEFAULT_ENUM_CAP,
) -> MatchReport:
    """Compare all sub-Markov parameters of length ``<= N``.

    ``method='enumerate'`` evaluates every parameter of both models and
    reports the largest deviation relative to the largest parameter
    magnitude.  ``method='subspace'`` decides the same question without
    enumeration by checking that the outputs of the difference system vanish
    on its ``N``-step reachability space (relative to ``max ||C_q||``).
    ``'auto'`` enumerates when the count fits under ``cap`` scalar entries.
    """
    _check_compatible(m1, m2)
    if N < 0:
        raise ValueError("N must be nonnegative")
    if method == "auto":
        k = m1.n_p + 1
        size = k * k * _word_total(m1.n_p, N) * m1.n_y * m1.n_u
        method = "enumerate" if cap is None or size <= cap else "subspace"
    if method == "enumerate":
        return _check_enumerate(m1, m2, N, tol, cap)
    if method == "subspace":
        return _check_subspace(m1, m2, N, tol)
    raise ValueError(f"unknown method {method!r}")
