"""Hyperedge-size distributions under LCA and ELCA.

Within one (cluster, additional cluster) pair the size of a hyperedge is a
sum of independent Bernoulli variables, i.e. Poisson-Binomial; the model
size distribution is the corresponding mixture. When the per-vertex
probabilities vanish while their sums stay fixed, the mixture tends to a
mixture of Poissons.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from .model import ElcaParams, LcaParams

CONDITION_TOL = 1e-10
TAIL_MASS = 1e-12


class ConditionViolatedError(ValueError):
    """LCA and ELCA parameters are not linked by ``p = phi * sum_k a_k tau_k``."""


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probabilities over sizes ``0..len(probs)-1``.

    ``tail_bound`` bounds the mass beyond the support for truncated pmfs.
    """

    probs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        arr = np.array(self.probs, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    def __len__(self):
        return self.probs.size

    def __getitem__(self, y):
        return self.probs[y]

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.probs.size)

    def mean(self) -> float:
        return float(self.support @ self.probs)

    def var(self) -> float:
        y = self.support
        mu = self.mean()
        return float(((y - mu) ** 2) @ self.probs)

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(max(length, self.probs.size))
        out[: self.probs.size] = self.probs
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("size,probability\n")
        for y, pr in enumerate(self.probs):
            buf.write(f"{y},{float(pr)!r}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class MomentReport:
    mean_lca: float
    var_lca: float
    mean_elca: float
    var_elca: float
    var_gap: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def total_variation(p, q) -> float:
    """Half the L1 distance between two pmfs, zero-padding the shorter one."""
    p = p.probs if isinstance(p, Pmf) else np.asarray(p, dtype=float)
    q = q.probs if isinstance(q, Pmf) else np.asarray(q, dtype=float)
    n = max(p.size, q.size)
    pp = np.zeros(n)
    qq = np.zeros(n)
    pp[: p.size] = p
    qq[: q.size] = q
    return 0.5 * float(np.abs(pp - qq).sum())


def poisson_binomial_pmf(probs) -> Pmf:
    """Exact pmf of a sum of independent Bernoulli(probs[i]) by convolution."""
    probs = np.asarray(probs, dtype=float).ravel()
    if probs.size and not ((probs >= 0) & (probs <= 1)).all():
        bad = int(np.flatnonzero(~((probs >= 0) & (probs <= 1)))[0])
        raise ValueError(f"probability {bad} = {probs[bad]} outside [0, 1]")
    out = np.zeros(probs.size + 1)
    out[0] = 1.0
    for n, pr in enumerate(probs, start=1):
        out[1:n + 1] = out[1:n + 1] * (1.0 - pr) + out[:n] * pr
        out[0] *= 1.0 - pr
    return Pmf(out)


def size_pmf_lca(p: LcaParams) -> Pmf:
    N = p.p.shape[0]
    out = np.zeros(N + 1)
    for g, w in enumerate(p.pi):
        out += w * poisson_binomial_pmf(p.p[:, g]).probs
    return Pmf(out)


def size_pmf_elca(p: ElcaParams) -> Pmf:
    out = np.zeros(p.n_vertices + 1)
    for g, wg in enumerate(p.pi):
        for k, wk in enumerate(p.tau):
            out += wg * wk * poisson_binomial_pmf(p.a[k] * p.phi[:, g]).probs
    return Pmf(out)


def check_condition(lca: LcaParams, elca: ElcaParams, tol: float = CONDITION_TOL) -> None:
    if lca.p.shape != elca.phi.shape or lca.pi.shape != elca.pi.shape:
        raise ValueError(
            f"dimension mismatch: LCA p {lca.p.shape} vs ELCA phi {elca.phi.shape}"
        )
    if np.max(np.abs(lca.pi - elca.pi)) > tol:
        raise ConditionViolatedError("LCA and ELCA cluster weights differ")
    gap = np.max(np.abs(lca.p - elca.phi * float(np.dot(elca.a, elca.tau))), initial=0.0)
    if gap > tol:
        raise ConditionViolatedError(
            f"p_ig differs from phi_ig * sum_k a_k tau_k by up to {gap:.3g}"
        )


def _sum_pairs(u: np.ndarray) -> float:
    """sum_{i<j} u_i u_j for each trailing column, summed."""
    return float(0.5 * ((u.sum(axis=0) ** 2) - (u ** 2).sum(axis=0)).sum())


def moments(lca: LcaParams, elca: ElcaParams) -> MomentReport:
    """Closed-form size mean and variance under both models.

    Both variances are expanded as marginal variances plus pairwise
    covariances; the gap is also evaluated in factored form and the two
    routes must agree.
    """
    check_condition(lca, elca)
    pi, tau, a, phi, p = lca.pi, elca.tau, elca.a, elca.phi, lca.p

    marg_a = p @ pi                      # Pr(A_i = 1)
    mean_lca = float(marg_a.sum())
    both_a = _sum_pairs(p * np.sqrt(pi))  # sum_{i<j} sum_g p_ig p_jg pi_g
    var_lca = (mean_lca - float((marg_a ** 2).sum())
               + 2.0 * both_a - 2.0 * _sum_pairs(marg_a[:, None]))

    scale = float(a @ tau)
    scale2 = float((a ** 2) @ tau)
    marg_b = (phi @ elca.pi) * scale     # Pr(B_i = 1)
    mean_elca = float(marg_b.sum())
    both_b = scale2 * _sum_pairs(phi * np.sqrt(elca.pi))
    var_elca = (mean_elca - float((marg_b ** 2).sum())
                + 2.0 * both_b - 2.0 * _sum_pairs(marg_b[:, None]))

    gap = 2.0 * (scale2 - scale ** 2) * _sum_pairs(phi * np.sqrt(elca.pi))
    direct = var_elca - var_lca
    if abs(direct - gap) > 1e-9 * max(1.0, abs(var_elca), abs(var_lca)):
        raise ArithmeticError(
            f"variance gap routes disagree: expanded {direct!r} vs factored {gap!r}"
        )
    return MomentReport(mean_lca, var_lca, mean_elca, var_elca, gap)


def poisson_truncation(rate: float, tail: float = TAIL_MASS) -> int:
    """Smallest T with Pr(Pois(rate) > T) < tail by the Chernoff bound.

    The bound ``Pr(X >= t) <= exp(-rate) (e rate / t)^t`` holds for t > rate.
    """
    t = max(1, math.floor(rate) + 1)
    while -rate + t * (1.0 + math.log(rate) - math.log(t)) >= math.log(tail):
        t += 1
    return t - 1


def _poisson_mixture(weights, rates, truncate) -> Pmf:
    weights = np.asarray(weights, dtype=float).ravel()
    rates = np.asarray(rates, dtype=float).ravel()
    if rates.size != weights.size:
        raise ValueError("one rate per mixture component is required")
    if not (rates > 0).all():
        raise ValueError("Poisson rates must be positive")
    if truncate is None:
        truncate = poisson_truncation(float(rates.max()))
    y = np.arange(truncate + 1)
    probs = weights @ poisson.pmf(y[None, :], rates[:, None])
    tail = float(weights @ poisson.sf(truncate, rates))
    return Pmf(probs, tail_bound=tail)


def poisson_mixture_limit_lca(pi, lambdas, truncate: int | None = None) -> Pmf:
    """``sum_g pi_g Pois(lambda_g)`` on ``0..truncate``."""
    return _poisson_mixture(pi, lambdas, truncate)


def poisson_mixture_limit_elca(pi, tau, lambdas, truncate: int | None = None) -> Pmf:
    """``sum_{g,k} pi_g tau_k Pois(lambda_gk)`` for a G x K rate matrix."""
    lambdas = np.asarray(lambdas, dtype=float)
    pi = np.asarray(pi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if lambdas.shape != (pi.size, tau.size):
        raise ValueError(f"rates must be {pi.size} x {tau.size}, got {lambdas.shape}")
    return _poisson_mixture(np.outer(pi, tau), lambdas, truncate)
