"""Choosing (G, K) by cross-validated log-likelihood and greedy search."""

from __future__ import annotations

import io
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import em
from .hypergraph import IncidenceMatrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CvConfig:
    n_cv: int = 20
    q: float = 0.7
    tol: float = em.DEFAULT_TOL
    max_iter: int = em.DEFAULT_MAX_ITER
    n_restarts: int = em.DEFAULT_RESTARTS
    seed: int = 1
    n_jobs: int = 1

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ValueError(f"q must lie strictly between 0 and 1, got {self.q}")
        if self.n_cv < 1:
            raise ValueError(f"n_cv must be >= 1, got {self.n_cv}")
        if self.n_restarts < 1 or self.max_iter < 1:
            raise ValueError("n_restarts and max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass
class CvEstimate:
    g: int
    k: int
    replicates: np.ndarray  # nan for failed replicates

    @property
    def mean(self) -> float:
        ok = self.replicates[np.isfinite(self.replicates)]
        return float(ok.mean()) if ok.size else float("nan")

    @property
    def n_failed(self) -> int:
        return int((~np.isfinite(self.replicates)).sum())


@dataclass
class CvSelection:
    table: dict[tuple[int, int], CvEstimate]
    g_opt: int
    k_opt: int
    trajectory: list[tuple[int, int]] = field(default_factory=list)

    @property
    def best(self) -> float:
        return self.table[(self.g_opt, self.k_opt)].mean

    def to_csv(self) -> str:
        n = max((e.replicates.size for e in self.table.values()), default=0)
        buf = io.StringIO()
        buf.write(",".join(["G", "K", "cv_loglik"] + [f"rep{r + 1}" for r in range(n)]) + "\n")
        for key in self.trajectory:
            e = self.table[key]
            buf.write(",".join([str(e.g), str(e.k), repr(e.mean)]
                               + [repr(float(v)) for v in e.replicates]) + "\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "g_opt": self.g_opt,
            "k_opt": self.k_opt,
            "best_cv_loglik": self.best,
            "trajectory": [list(t) for t in self.trajectory],
            "table": [
                {"G": g, "K": k, "cv_loglik": e.mean, "n_failed": e.n_failed}
                for (g, k), e in ((t, self.table[t]) for t in self.trajectory)
            ],
        }


def train_mask(n_edges: int, seed: int, replicate: int, q: float) -> np.ndarray:
    """Train/test split for one replicate; identical for every (G, K).

    Each hyperedge goes to train with probability ``q``. A split with an
    empty side is redrawn from the next sub-stream.
    """
    if n_edges < 2:
        raise ValueError("cross-validation needs at least 2 hyperedges")
    attempt = 0
    while True:
        rng = np.random.default_rng(np.random.SeedSequence([seed, replicate, attempt]))
        mask = rng.random(n_edges) < q
        if 0 < mask.sum() < n_edges:
            return mask
        attempt += 1


def _fit_seed(seed: int, replicate: int) -> int:
    return int(np.random.SeedSequence([seed, replicate, 2**31]).generate_state(1)[0] % 2**31)


def _replicate(job) -> float:
    x, g, k, cfg, n = job
    mask = train_mask(x.shape[1], cfg.seed, n, cfg.q)
    try:
        res = em.fit_restarts(x[:, mask], g, k, tol=cfg.tol, max_iter=cfg.max_iter,
                              n_restarts=cfg.n_restarts, seed=_fit_seed(cfg.seed, n))
    except (em.FitFailedError, em.NumericalFailure) as exc:
        log.warning("CV replicate %d for (G=%d, K=%d) failed: %s", n, g, k, exc)
        return float("nan")
    return em.loglik(x[:, ~mask], res.params)


def cv_loglik(m, g: int, k: int, cfg: CvConfig) -> CvEstimate:
    """Average held-out log-likelihood over ``cfg.n_cv`` random splits."""
    x = em.cells(m)
    if x.shape[1] < 2:
        raise ValueError("cross-validation needs at least 2 hyperedges")
    jobs = [(x, g, k, cfg, n) for n in range(1, cfg.n_cv + 1)]
    if cfg.n_jobs > 1 and cfg.n_cv > 1:
        with ProcessPoolExecutor(max_workers=cfg.n_jobs) as pool:
            values = list(pool.map(_replicate, jobs))
    else:
        values = [_replicate(j) for j in jobs]
    est = CvEstimate(g, k, np.asarray(values, dtype=float))
    if est.n_failed == cfg.n_cv:
        raise em.FitFailedError([(n, "replicate failed") for n in range(1, cfg.n_cv + 1)])
    if est.n_failed:
        warnings.warn(f"{est.n_failed} of {cfg.n_cv} CV replicates failed for (G={g}, K={k})")
    return est


def greedy(evaluate: Callable[[int, int], float]) -> tuple[dict, list, tuple[int, int]]:
    """Greedy (G, K) search over an arbitrary score function.

    K grows at fixed G while the score strictly improves; G then grows
    (restarting at K = 1) while ``score(G + 1, 1) > score(G, 1)``. The winner
    is the best pair seen, ties going to the smallest (G, K).
    """
    scores: dict[tuple[int, int], float] = {}
    trajectory: list[tuple[int, int]] = []

    def score(g, k):
        if (g, k) not in scores:
            scores[(g, k)] = evaluate(g, k)
            trajectory.append((g, k))
        return scores[(g, k)]

    g = 1
    while True:
        k = 1
        current = score(g, 1)
        while True:
            trial = score(g, k + 1)
            if trial > current:
                k, current = k + 1, trial
            else:
                break
        if score(g + 1, 1) > score(g, 1):
            g += 1
        else:
            break
    best = min(scores, key=lambda t: (-scores[t], t))
    return scores, trajectory, best


def greedy_search(m, cfg: CvConfig) -> CvSelection:
    table: dict[tuple[int, int], CvEstimate] = {}

    def evaluate(g, k):
        est = cv_loglik(m, g, k, cfg)
        table[(g, k)] = est
        log.info("G=%d K=%d cv loglik %.4f", g, k, est.mean)
        return est.mean

    _, trajectory, (g_opt, k_opt) = greedy(evaluate)
    return CvSelection(table, g_opt, k_opt, trajectory)
