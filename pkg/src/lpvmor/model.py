"""Affine LPV state-space models, simulation and sub-Markov parameters.

A model is

    x(t+1) = A(p(t)) x(t) + B(p(t)) u(t)
    y(t)   = C(p(t)) x(t)

with ``A(p) = A_0 + sum_i A_i p_i`` (likewise ``B`` and ``C``).  Scheduling
vectors store only ``p_1 .. p_{n_p}``; index 0 of every matrix list is the
constant term, i.e. the implicit ``p_0 = 1``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "DEFAULT_ENUM_CAP",
    "EnumerationTooLarge",
    "LpvSsModel",
    "ModelValidationError",
    "SubMarkovIndex",
    "Trajectory",
    "enumerate_sub_markov",
    "eval_matrices",
    "iir_response",
    "iter_words",
    "markov_count",
    "simulate",
    "sub_markov",
    "sub_markov_levels",
    "validate_model",
]

#: Largest number of scalar entries an enumeration may materialise.
DEFAULT_ENUM_CAP = 5_000_000


class ModelValidationError(ValueError):
    """Raised when candidate model data violates one or more invariants.

    ``problems`` lists every violation found, not just the first one.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid model:\n  " + "\n  ".join(self.problems))


class EnumerationTooLarge(RuntimeError):
    """An explicit enumeration would exceed its configured size cap."""

    def __init__(self, what: str, size: int, cap: int, detail: str = ""):
        self.size = size
        self.cap = cap
        super().__init__(f"{what} too large{detail}: {size} entries exceeds cap {cap}")


@dataclass(frozen=True, eq=False)
class LpvSsModel:
    """Discrete-time LPV-SS model with affine, static scheduling dependence.

    ``A``, ``B`` and ``C`` are read-only arrays of shape ``(n_p+1, n_x, n_x)``,
    ``(n_p+1, n_x, n_u)`` and ``(n_p+1, n_y, n_x)``.  Use :func:`validate_model`
    (or :meth:`from_matrices`) to build one from untrusted data.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @classmethod
    def from_matrices(cls, A, B, C) -> "LpvSsModel":
        return validate_model({"A": A, "B": B, "C": C})

    @property
    def n_x(self) -> int:
        return self.A.shape[1]

    @property
    def n_u(self) -> int:
        return self.B.shape[2]

    @property
    def n_y(self) -> int:
        return self.C.shape[1]

    @property
    def n_p(self) -> int:
        return self.A.shape[0] - 1

    @property
    def order(self) -> int:
        return self.n_x

    def transpose(self) -> "LpvSsModel":
        """Dual model ``(A_i^T, C_i^T, B_i^T)``."""
        return _frozen(
            self.A.transpose(0, 2, 1),
            self.C.transpose(0, 2, 1),
            self.B.transpose(0, 2, 1),
        )

    def to_dict(self) -> dict:
        return {
            "n_x": self.n_x,
            "n_u": self.n_u,
            "n_y": self.n_y,
            "n_p": self.n_p,
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
        }

    def __repr__(self) -> str:
        return (
            f"LpvSsModel(n_x={self.n_x}, n_u={self.n_u}, "
            f"n_y={self.n_y}, n_p={self.n_p})"
        )


def _frozen(A, B, C) -> LpvSsModel:
    arrays = []
    for M in (A, B, C):
        M = np.array(M, dtype=float, copy=True)
        M.setflags(write=False)
        arrays.append(M)
    return LpvSsModel(*arrays)


def _as_stack(raw, name: str, problems: list[str]) -> np.ndarray | None:
    """Coerce a list of matrices to a 3-d float array, or record why not."""
    if raw is None:
        problems.append(f"missing field '{name}'")
        return None
    if isinstance(raw, np.ndarray):
        items = list(raw) if raw.ndim == 3 else [raw]
        if raw.ndim != 3:
            problems.append(f"{name}: expected a list of matrices")
            return None
    elif isinstance(raw, (list, tuple)):
        items = list(raw)
    else:
        problems.append(f"{name}: expected a list of matrices")
        return None
    if not items:
        problems.append(f"{name}: matrix list length is 0")
        return None
    mats = []
    for i, item in enumerate(items):
        try:
            M = np.array(item, dtype=float)
        except (TypeError, ValueError):
            problems.append(f"{name}[{i}]: not a numeric matrix")
            return None
        if M.ndim != 2:
            problems.append(f"{name}[{i}]: not a 2-d matrix (ndim={M.ndim})")
            return None
        mats.append(M)
    shapes = {M.shape for M in mats}
    if len(shapes) != 1:
        problems.append(
            f"{name}: dimension mismatch between list entries {sorted(shapes)}"
        )
        return None
    stack = np.stack(mats)
    bad = np.argwhere(~np.isfinite(stack))
    if bad.size:
        i, r, c = bad[0]
        problems.append(
            f"{name}[{i}]: non-finite entry at ({r}, {c})"
            + (f" and {len(bad) - 1} more" if len(bad) > 1 else "")
        )
    return stack


def validate_model(raw) -> LpvSsModel:
    """Check candidate model data and return an immutable :class:`LpvSsModel`.

    ``raw`` is a mapping with keys ``A``, ``B``, ``C`` (lists of ``n_p+1``
    matrices) and optionally the declared sizes ``n_x``, ``n_u``, ``n_y``,
    ``n_p``.  An existing model is returned unchanged.

    Raises
    ------
    ModelValidationError
        Listing every violated invariant (matrix list length, dimension
        mismatch, non-finite entry, ...).
    """
    if isinstance(raw, LpvSsModel):
        return raw
    if not hasattr(raw, "get"):
        raise ModelValidationError(["model data must be a mapping"])
    problems: list[str] = []
    A = _as_stack(raw.get("A"), "A", problems)
    B = _as_stack(raw.get("B"), "B", problems)
    C = _as_stack(raw.get("C"), "C", problems)

    declared = {}
    for key in ("n_x", "n_u", "n_y", "n_p"):
        v = raw.get(key)
        if v is None:
            continue
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 0:
            problems.append(f"{key}: expected a nonnegative integer, got {v!r}")
        else:
            declared[key] = int(v)

    lengths = {}
    for name in ("A", "B", "C"):
        v = raw.get(name)
        if isinstance(v, (list, tuple, np.ndarray)) and len(v):
            lengths[name] = len(v)
    if lengths:
        n_p = declared.get("n_p", lengths.get("A", next(iter(lengths.values()))) - 1)
        for name, k in lengths.items():
            if k != n_p + 1:
                problems.append(f"{name}: matrix list length {k} != n_p+1 = {n_p + 1}")

    if A is not None and B is not None and C is not None:
        n_x = declared.get("n_x", A.shape[1])
        n_u = declared.get("n_u", B.shape[2])
        n_y = declared.get("n_y", C.shape[1])
        if n_x == 0:
            problems.append("n_x: state dimension must be positive")
        if A.shape[1:] != (n_x, n_x):
            problems.append(f"A: dimension mismatch, got {A.shape[1:]}, expected ({n_x}, {n_x})")
        if B.shape[1:] != (n_x, n_u):
            problems.append(f"B: dimension mismatch, got {B.shape[1:]}, expected ({n_x}, {n_u})")
        if C.shape[1:] != (n_y, n_x):
            problems.append(f"C: dimension mismatch, got {C.shape[1:]}, expected ({n_y}, {n_x})")

    if problems:
        raise ModelValidationError(problems)
    return _frozen(A, B, C)


def _empty_model(n_u: int, n_y: int, n_p: int) -> LpvSsModel:
    # order-0 models are legal results of reduction, not of validation
    return _frozen(
        np.zeros((n_p + 1, 0, 0)), np.zeros((n_p + 1, 0, n_u)), np.zeros((n_p + 1, n_y, 0))
    )


def _weights(model: LpvSsModel, p) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape != (model.n_p,):
        raise ValueError(f"scheduling vector has dimension {p.size}, expected {model.n_p}")
    return np.concatenate(([1.0], p))


def eval_matrices(model: LpvSsModel, p) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(A(p), B(p), C(p))`` for one scheduling vector ``p``."""
    w = _weights(model, p)
    return (
        np.tensordot(w, model.A, axes=1),
        np.tensordot(w, model.B, axes=1),
        np.tensordot(w, model.C, axes=1),
    )


@dataclass
class Trajectory:
    """Signals of one simulation run; ``x`` has one more sample than ``u``."""

    u: np.ndarray
    p: np.ndarray
    y: np.ndarray
    x: np.ndarray | None = field(default=None)

    def __len__(self) -> int:
        return len(self.u)


def _signals(model: LpvSsModel, u, p) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=float)
    p = np.asarray(p, dtype=float)
    if u.ndim == 1 and model.n_u == 1:
        u = u[:, None]
    if p.ndim == 1 and model.n_p == 1:
        p = p[:, None]
    if u.ndim != 2 or u.shape[1] != model.n_u:
        raise ValueError(f"input sequence must have shape (T+1, {model.n_u}), got {u.shape}")
    if p.ndim != 2 or p.shape[1] != model.n_p:
        raise ValueError(f"scheduling sequence must have shape (T+1, {model.n_p}), got {p.shape}")
    if len(u) != len(p):
        raise ValueError(f"input and scheduling lengths differ ({len(u)} vs {len(p)})")
    return u, p


def simulate(model: LpvSsModel, u, p, x0=None) -> Trajectory:
    """Simulate the model from ``x0`` (zero by default).

    ``u`` has shape ``(T+1, n_u)`` and ``p`` shape ``(T+1, n_p)``; the returned
    trajectory holds ``x(0..T+1)`` and ``y(0..T)``.
    """
    u, p = _signals(model, u, p)
    T1 = len(u)
    x = np.zeros((T1 + 1, model.n_x))
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        if x0.shape != (model.n_x,):
            raise ValueError(f"x0 has dimension {x0.size}, expected {model.n_x}")
        x[0] = x0
    y = np.zeros((T1, model.n_y))
    W = np.hstack([np.ones((T1, 1)), p])
    # A(p(t)) for all t at once; cheap for desk-scale n_x
    At = np.einsum("ti,ijk->tjk", W, model.A)
    Bt = np.einsum("ti,ijk->tjk", W, model.B)
    Ct = np.einsum("ti,ijk->tjk", W, model.C)
    for t in range(T1):
        y[t] = Ct[t] @ x[t]
        x[t + 1] = At[t] @ x[t] + Bt[t] @ u[t]
    return Trajectory(u=u, p=p, y=y, x=x)


def iir_response(model: LpvSsModel, u, p, t: int) -> np.ndarray:
    """Output at time ``t`` from the impulse-response sum (zero initial state).

    Evaluates ``sum_m (h_m * p)(t) u(t-m)`` with
    ``h_m = C(p(t)) A(p(t-1)) ... A(p(t-m+1)) B(p(t-m))``, accumulating the
    product of scheduled matrices backwards in time.
    """
    u, p = _signals(model, u, p)
    if not 0 <= t < len(u):
        raise IndexError(f"time index {t} out of range for sequences of length {len(u)}")
    Ct = eval_matrices(model, p[t])[2]
    y = np.zeros(model.n_y)
    left = Ct  # C(p(t)) A(p(t-1)) ... A(p(t-m+1))
    for m in range(1, t + 1):
        Am, Bm, _ = eval_matrices(model, p[t - m])
        y += left @ Bm @ u[t - m]
        left = left @ Am
    return y


@dataclass(frozen=True)
class SubMarkovIndex:
    """Address of ``eta_{q,q0}(word) = C_q A_{j1} ... A_{jm} B_{q0}``."""

    q: int
    q0: int
    word: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(j) for j in self.word))

    def __len__(self) -> int:
        return len(self.word)

    def check(self, n_p: int) -> None:
        for name, v in (("q", self.q), ("q0", self.q0)):
            if not 0 <= v <= n_p:
                raise IndexError(f"{name}={v} outside 0..{n_p}")
        for j in self.word:
            if not 0 <= j <= n_p:
                raise IndexError(f"word symbol {j} outside 0..{n_p}")

    def __str__(self) -> str:
        w = "".join(f"{j}," for j in self.word).rstrip(",") or "eps"
        return f"eta[{self.q},{self.q0}]({w})"


def sub_markov(model: LpvSsModel, idx: SubMarkovIndex) -> np.ndarray:
    """Single sub-Markov parameter, products taken left to right in word order."""
    idx.check(model.n_p)
    M = model.C[idx.q]
    for j in idx.word:
        M = M @ model.A[j]
    return M @ model.B[idx.q0]


def markov_count(n_p: int, N: int) -> int:
    """Number of sub-Markov parameters of length at most ``N``.

    ``(n_p+1) * ((n_p+1)^(N+1) - 1) / n_p * (n_p+1)``; computed exactly with
    Python integers so it never overflows.
    """
    if n_p < 1 or N < 0:
        raise ValueError("markov_count needs n_p >= 1 and N >= 0")
    k = n_p + 1
    return k * ((k ** (N + 1) - 1) // n_p) * k


def _word_total(n_p: int, N: int) -> int:
    # words of length <= N; also valid for n_p = 0
    return N + 1 if n_p == 0 else ((n_p + 1) ** (N + 1) - 1) // n_p


def iter_words(n_p: int, N: int) -> Iterator[tuple[int, ...]]:
    """All words of length ``<= N`` in canonical order (length, then lex)."""
    for m in range(N + 1):
        yield from itertools.product(range(n_p + 1), repeat=m)


def sub_markov_levels(model: LpvSsModel, N: int, cap: int | None = DEFAULT_ENUM_CAP):
    """Yield one array per length ``m = 0..N`` holding every ``eta`` of that length.

    Each array has shape ``((n_p+1)^m, n_p+1, n_p+1, n_y, n_u)`` indexed by
    ``[word, q, q0]`` with words in lexicographic order, so flattening the
    leading three axes gives the canonical enumeration order.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    k = model.n_p + 1
    size = k * k * _word_total(model.n_p, N) * model.n_y * model.n_u
    if cap is not None and size > cap:
        raise EnumerationTooLarge("enumeration", size, cap)
    # P[w, q0] = A_{w1} ... A_{wm} B_{q0}
    P = model.B[None]
    for m in range(N + 1):
        yield np.einsum("qab,wzbc->wqzac", model.C, P)
        if m < N:
            P = np.einsum("jab,wzbc->jwzac", model.A, P)
            P = P.reshape(P.shape[0] * P.shape[1], k, model.n_x, model.n_u)


def enumerate_sub_markov(
    model: LpvSsModel, N: int, cap: int | None = DEFAULT_ENUM_CAP
) -> list[tuple[SubMarkovIndex, np.ndarray]]:
    """All sub-Markov parameters with ``|s| <= N`` in canonical order.

    Order is ascending length, then lexicographic word, then ``q``, then
    ``q0``.  Raises :class:`EnumerationTooLarge` when the number of scalar
    entries would exceed ``cap``.
    """
    out = []
    k = model.n_p + 1
    for m, level in enumerate(sub_markov_levels(model, N, cap)):
        for wi, word in enumerate(itertools.product(range(k), repeat=m)):
            for q in range(k):
                for q0 in range(k):
                    out.append((SubMarkovIndex(q, q0, word), level[wi, q, q0]))
    return out


def stack_models_parallel(m1: LpvSsModel, m2: LpvSsModel, sign: float = -1.0) -> LpvSsModel:
    """Parallel interconnection with output ``C1 x1 + sign * C2 x2``.

    With ``sign=-1`` its sub-Markov parameters are the differences of those
    of ``m1`` and ``m2``.
    """
    _check_compatible(m1, m2)
    n1, n2 = m1.n_x, m2.n_x
    k = m1.n_p + 1
    A = np.zeros((k, n1 + n2, n1 + n2))
    A[:, :n1, :n1] = m1.A
    A[:, n1:, n1:] = m2.A
    B = np.concatenate([m1.B, m2.B], axis=1)
    C = np.concatenate([m1.C, sign * m2.C], axis=2)
    return _frozen(A, B, C)


def _check_compatible(m1: LpvSsModel, m2: LpvSsModel) -> None:
    if (m1.n_u, m1.n_y, m1.n_p) != (m2.n_u, m2.n_y, m2.n_p):
        raise ValueError(
            "models differ in (n_u, n_y, n_p): "
            f"{(m1.n_u, m1.n_y, m1.n_p)} vs {(m2.n_u, m2.n_y, m2.n_p)}"
        )


def random_model(
    rng: np.random.Generator,
    n_x: int,
    n_u: int = 1,
    n_y: int = 1,
    n_p: int = 1,
    scale: float = 1.0,
) -> LpvSsModel:
    """Model with i.i.d. ``N(0, scale^2)`` entries, for tests and benchmarks."""
    k = n_p + 1
    return _frozen(
        scale * rng.standard_normal((k, n_x, n_x)),
        scale * rng.standard_normal((k, n_x, n_u)),
        scale * rng.standard_normal((k, n_y, n_x)),
    )


def block_embed(model: LpvSsModel, extra: int) -> LpvSsModel:
    """Append ``extra`` zero states; they are neither reached nor observed."""
    n = model.n_x + extra
    k = model.n_p + 1
    A = np.zeros((k, n, n))
    A[:, : model.n_x, : model.n_x] = model.A
    B = np.zeros((k, n, model.n_u))
    B[:, : model.n_x] = model.B
    C = np.zeros((k, model.n_y, n))
    C[:, :, : model.n_x] = model.C
    return _frozen(A, B, C)


def transform(model: LpvSsModel, T: np.ndarray) -> LpvSsModel:
    """State change of basis ``x' = T x``: ``(T A_i T^-1, T B_i, C_i T^-1)``."""
    T = np.asarray(T, dtype=float)
    Ti = np.linalg.inv(T)
    return _frozen(T @ model.A @ Ti, T @ model.B, model.C @ Ti)
