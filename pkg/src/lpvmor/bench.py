"""Best-fit-rate experiments comparing an original and a reduced model."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .model import LpvSsModel, simulate, validate_model
from .reduce import ReductionResult, reduce

__all__ = [
    "BfrStats",
    "ExperimentSpec",
    "bfr",
    "exact_prefix",
    "example_model",
    "random_signals",
    "run_compare",
]


def bfr(y, ybar) -> float:
    """Best fit rate in percent, ``100 * max(1 - ||y - ybar|| / ||y - mean(y)||, 0)``.

    Norms are taken over all samples and channels.  When ``y`` is constant
    the ratio is undefined; identical signals then score 100 and anything
    else 0.
    """
    y = np.asarray(y, dtype=float)
    ybar = np.asarray(ybar, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if ybar.ndim == 1:
        ybar = ybar[:, None]
    if y.shape != ybar.shape:
        raise ValueError(f"output shapes differ: {y.shape} vs {ybar.shape}")
    if len(y) == 0:
        raise ValueError("need at least one sample")
    num = np.sqrt(np.sum((y - ybar) ** 2))
    den = np.sqrt(np.sum((y - y.mean(axis=0)) ** 2))
    if den == 0:
        return 100.0 if num == 0 else 0.0
    return 100.0 * max(1.0 - num / den, 0.0)


def exact_prefix(y, ybar, atol: float = 1e-9) -> int:
    """Number of leading samples where ``y`` and ``ybar`` agree within ``atol``."""
    y = np.asarray(y, dtype=float).reshape(len(y), -1)
    ybar = np.asarray(ybar, dtype=float).reshape(len(ybar), -1)
    ok = np.all(np.abs(y - ybar) <= atol, axis=1)
    bad = np.flatnonzero(~ok)
    return int(bad[0]) if bad.size else len(ok)


@dataclass
class ExperimentSpec:
    """Settings of one simulation comparison.

    The total simulated horizon is ``N + horizon`` steps (``t = 0 .. N+horizon``),
    i.e. by default 50 steps beyond the matched window.  Scheduling samples
    are uniform on ``sched_range`` per component, inputs standard normal.
    """

    N: int
    mode: str = "R"
    trials: int = 500
    horizon: int = 50
    seed: int = 0
    sched_range: tuple[float, float] = (-1.0, 1.0)
    tol: float = 0.0
    match_atol: float = 1e-9

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        lo, hi = self.sched_range
        if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
            raise ValueError(f"invalid scheduling range {self.sched_range}")

    @property
    def steps(self) -> int:
        """Number of samples per trial."""
        return self.N + self.horizon + 1


def random_signals(spec: ExperimentSpec, trial: int, n_u: int, n_p: int):
    """Input and scheduling sequences of trial ``trial``; deterministic in ``(seed, trial)``."""
    rng = np.random.default_rng([spec.seed, trial])
    u = rng.standard_normal((spec.steps, n_u))
    lo, hi = spec.sched_range
    p = rng.uniform(lo, hi, size=(spec.steps, n_p))
    return u, p


@dataclass
class BfrStats:
    bfr: np.ndarray
    reduce_seconds: float
    #: shortest exact-match prefix (in samples) over all trials
    min_exact_prefix: int
    order: int
    original_order: int
    guarantee: int
    spec: ExperimentSpec | None = None
    extra: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(self.bfr))

    @property
    def best(self) -> float:
        return float(np.max(self.bfr))

    @property
    def worst(self) -> float:
        return float(np.min(self.bfr))

    def closest_to_mean(self) -> int:
        return int(np.argmin(np.abs(self.bfr - self.mean)))

    def summary(self) -> dict:
        s = self.spec
        out = {
            "original_order": self.original_order,
            "order": self.order,
            "guarantee": self.guarantee,
            "trials": len(self.bfr),
            "mean_bfr": self.mean,
            "best_bfr": self.best,
            "worst_bfr": self.worst,
            "min_exact_prefix": self.min_exact_prefix,
            "reduce_seconds": self.reduce_seconds,
        }
        if s is not None:
            out.update(
                N=s.N, mode=s.mode, horizon=s.horizon, seed=s.seed,
                sched_range=list(s.sched_range),
            )
        out.update(self.extra)
        return out


def run_compare(
    model: LpvSsModel, spec: ExperimentSpec, result: ReductionResult | None = None
) -> BfrStats:
    """Reduce ``model`` once (timed) and score the reduced model on random trials."""
    if result is None:
        t0 = time.perf_counter()
        result = reduce(model, spec.N, spec.mode, spec.tol)
        elapsed = time.perf_counter() - t0
    else:
        elapsed = float("nan")
    reduced = result.reduced
    scores = np.empty(spec.trials)
    prefix = spec.steps
    for k in range(spec.trials):
        u, p = random_signals(spec, k, model.n_u, model.n_p)
        try:
            y = simulate(model, u, p).y
            ybar = simulate(reduced, u, p).y
        except Exception as exc:
            raise RuntimeError(f"simulation failed in trial {k}: {exc}") from exc
        scores[k] = bfr(y, ybar)
        prefix = min(prefix, exact_prefix(y, ybar, spec.match_atol))
    return BfrStats(
        bfr=scores,
        reduce_seconds=elapsed,
        min_exact_prefix=prefix,
        order=reduced.n_x,
        original_order=model.n_x,
        guarantee=result.guarantee,
        spec=spec,
    )


def example_model() -> LpvSsModel:
    """The stable, minimal 7-state benchmark with five scheduling parameters.

    Each ``A_i`` has a single nonzero row ``i+1`` with entries in columns
    ``i+1`` and ``i+2``; the ``B_i`` are unit vectors and every ``C_i`` picks
    off the first state.
    """
    n, n_p = 7, 5
    A = np.zeros((n_p + 1, n, n))
    rows = [(-0.5, 0.5471), (0.3, 0.2285), (-0.4, 0.4741), (-0.7, 0.9362), (0.5, 0.4367), (0.1, 0.0573)]
    for i, (a, b) in enumerate(rows):
        A[i, i, i] = a
        A[i, i, i + 1] = b
    B = np.zeros((n_p + 1, n, 1))
    for i, e in enumerate([7, 6, 5, 1, 2, 3]):
        B[i, e - 1, 0] = 1.0
    C = np.zeros((n_p + 1, 1, n))
    C[:, 0, 0] = 1.0
    return validate_model({"A": A, "B": B, "C": C})
