"""EM fitting of the ELCA model with MM conditional updates.

One outer iteration runs a single E-step and then four conditional
maximisations against the same responsibilities, in the order
``phi -> a -> pi -> tau``. ``phi`` and ``a`` have no closed-form
conditional maximiser; each is replaced by the maximiser of a quadratic
minoriser of ``log(1 - a_k phi_ig)``, which keeps the observed-data
log-likelihood non-decreasing.

``phi`` and the free scale factors are clamped to ``[EPS, 1 - EPS]`` because
the curvature bounds contain ``1/(1 - a_k)^2`` and ``1/(1 - phi_ig)^2``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp, xlog1py, xlogy

from .cubic import real_cubic_roots
from .hypergraph import IncidenceMatrix
from .model import ElcaParams, InvalidParamsError, canonical_order, random_init, validate

log = logging.getLogger(__name__)

EPS = 1e-10
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 2000
DEFAULT_RESTARTS = 10


class NumericalFailure(ArithmeticError):
    """An update produced no usable value.

    ``where`` identifies the offending parameter entry (``(i, g)`` for phi,
    ``k`` for a) and ``iteration`` the outer EM iteration, when known.
    """

    def __init__(self, message, where=None, iteration=None):
        self.where = where
        self.iteration = iteration
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)


class DegenerateEdgeError(NumericalFailure):
    """A hyperedge has zero likelihood under every (g, k) pair."""


class FitFailedError(RuntimeError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__(
            f"all {len(self.errors)} restarts failed: "
            + "; ".join(f"seed {s}: {e}" for s, e in self.errors)
        )


def cells(m) -> np.ndarray:
    """Incidence cells as an N x M float array."""
    x = m.cells if isinstance(m, IncidenceMatrix) else np.asarray(m)
    return np.asarray(x, dtype=float)


def _check_dims(x: np.ndarray, p: ElcaParams):
    if x.ndim != 2 or x.shape[0] != p.n_vertices:
        raise ValueError(
            f"data has {x.shape[0] if x.ndim == 2 else '?'} vertices, "
            f"parameters have {p.n_vertices}"
        )


def log_joint(m, p: ElcaParams) -> np.ndarray:
    """``log(pi_g tau_k prod_i Bernoulli(x_ij; a_k phi_ig))`` as an M x G x K array."""
    x = cells(m)
    _check_dims(x, p)
    N, M = x.shape
    G, K = p.n_clusters, p.n_extra
    prob = (p.phi[:, :, None] * p.a[None, None, :]).reshape(N, G * K)
    with np.errstate(divide="ignore"):
        lp = np.log(prob)
        lq = np.log1p(-prob)
        if np.isfinite(lp).all() and np.isfinite(lq).all():
            ll = x.T @ (lp - lq) + lq.sum(axis=0)
        else:
            # 0 * inf would poison the matrix product at boundary probabilities
            on = x.astype(bool)
            ll = np.empty((M, G * K))
            for c in range(G * K):
                ll[:, c] = np.where(on, lp[:, c:c + 1], lq[:, c:c + 1]).sum(axis=0)
        prior = (np.log(p.pi)[:, None] + np.log(p.tau)[None, :]).reshape(-1)
    return (ll + prior).reshape(M, G, K)


def loglik(m, p: ElcaParams) -> float:
    """Observed-data log-likelihood; ``-inf`` when some hyperedge is impossible."""
    lj = log_joint(m, p)
    if lj.shape[0] == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        return float(logsumexp(lj.reshape(lj.shape[0], -1), axis=1).sum())


def _normalise(lj: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    M = lj.shape[0]
    flat = lj.reshape(M, -1)
    top = flat.max(axis=1) if flat.size else np.zeros(M)
    bad = np.flatnonzero(~np.isfinite(top))
    if bad.size:
        raise DegenerateEdgeError(
            f"hyperedge {int(bad[0])} has zero likelihood under every label pair",
            where=int(bad[0]),
        )
    w = np.exp(flat - top[:, None])
    total = w.sum(axis=1)
    w /= total[:, None]
    return w.reshape(lj.shape), top + np.log(total)


def e_step(m, p: ElcaParams) -> np.ndarray:
    """Posterior label-pair probabilities ``zeta[j, g, k]``; each row sums to 1."""
    return _normalise(log_joint(m, p))[0]


def complete_loglik(m, p: ElcaParams, z1, z2) -> float:
    """Complete-data log-likelihood for hard labels (0-based)."""
    z1 = np.asarray(z1, dtype=int)
    z2 = np.asarray(z2, dtype=int)
    x = cells(m)
    M = x.shape[1]
    if z1.shape != (M,) or z2.shape != (M,):
        raise ValueError(f"label vectors must have length {M}")
    if z1.size and (z1.min() < 0 or z1.max() >= p.n_clusters):
        raise ValueError(f"z1 labels must lie in 0..{p.n_clusters - 1}")
    if z2.size and (z2.min() < 0 or z2.max() >= p.n_extra):
        raise ValueError(f"z2 labels must lie in 0..{p.n_extra - 1}")
    lj = log_joint(x, p)
    return float(lj[np.arange(M), z1, z2].sum())


# --- sufficient statistics -------------------------------------------------

@dataclass
class _Stats:
    """Responsibility-weighted counts shared by the conditional updates."""

    ones: np.ndarray    # N x G: sum_j zeta_jg. x_ij
    zeros: np.ndarray   # N x G x K: sum_j zeta_jgk (1 - x_ij)
    size_mass: np.ndarray  # K: sum_j zeta_j.k sum_i x_ij


def _stats(x: np.ndarray, resp: np.ndarray) -> _Stats:
    N, M = x.shape
    _, G, K = resp.shape
    flat = resp.reshape(M, G * K)
    zeros = ((1.0 - x) @ flat).reshape(N, G, K)
    ones = x @ resp.sum(axis=2)
    size_mass = x.sum(axis=0) @ resp.sum(axis=1)
    return _Stats(ones, zeros, size_mass)


def _check_resp(x, p, resp):
    resp = np.asarray(resp, dtype=float)
    if resp.shape != (x.shape[1], p.n_clusters, p.n_extra):
        raise ValueError(
            f"responsibilities must have shape {(x.shape[1], p.n_clusters, p.n_extra)}, "
            f"got {resp.shape}"
        )
    return resp


# --- phi ---------------------------------------------------------------------

@dataclass
class PhiMinorizer:
    """Quadratic minoriser of the conditional objective in each ``phi_ig``.

    ``value(phi) = A1 log phi + A2 log(1-phi) + B1 phi + B2 (phi - phi_t)^2``;
    adding ``offset`` makes it touch ``exact(phi)`` at ``phi_t``.
    """

    A1: np.ndarray
    A2: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    phi_t: np.ndarray
    offset: np.ndarray
    zeros: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)

    @property
    def C(self) -> np.ndarray:
        return self.B1 - 2.0 * self.B2 * self.phi_t

    def value(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return (xlogy(self.A1, phi) + xlog1py(self.A2, -phi)
                + self.B1 * phi + self.B2 * (phi - self.phi_t) ** 2)

    def touching(self, phi) -> np.ndarray:
        return self.value(phi) + self.offset

    def exact(self, phi) -> np.ndarray:
        """Conditional objective ``A1 log phi + sum_k zeros_k log(1 - a_k phi)``."""
        phi = np.asarray(phi, dtype=float)
        out = xlogy(self.A1, phi)
        for k in range(self.a.size):
            out = out + xlog1py(self.zeros[..., k], -self.a[k] * phi)
        return out

    def gradient(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return (self.A1 / phi - self.A2 / (1.0 - phi) + self.B1
                + 2.0 * self.B2 * (phi - self.phi_t))

    def cubic(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Monic coefficients ``(b, c, d)`` of ``phi^3 + b phi^2 + c phi + d``."""
        two_b2 = 2.0 * self.B2
        with np.errstate(divide="ignore", invalid="ignore"):
            b = -(two_b2 - self.C) / two_b2
            c = -(self.C - self.A1 - self.A2) / two_b2
            d = -self.A1 / two_b2
        return b, c, d


def _phi_minorizer_from_stats(st: _Stats, p: ElcaParams) -> PhiMinorizer:
    a = p.a
    phi_t = p.phi
    free = a[:-1]
    zeros_free = st.zeros[:, :, :-1]
    with np.errstate(divide="ignore"):
        slope = -free[None, None, :] / (1.0 - free[None, None, :] * phi_t[:, :, None])
        curv = -0.5 * free ** 2 / (1.0 - free) ** 2
    B1 = (zeros_free * slope).sum(axis=2)
    B2 = zeros_free @ curv if free.size else np.zeros_like(phi_t)
    offset = xlog1py(zeros_free, -free[None, None, :] * phi_t[:, :, None]).sum(axis=2) - B1 * phi_t
    return PhiMinorizer(
        A1=st.ones, A2=st.zeros[:, :, -1], B1=B1, B2=B2,
        phi_t=phi_t, offset=offset, zeros=st.zeros, a=a,
    )


def phi_minorizer(m, p: ElcaParams, resp) -> PhiMinorizer:
    x = cells(m)
    _check_dims(x, p)
    return _phi_minorizer_from_stats(_stats(x, _check_resp(x, p, resp)), p)


def _quadratic_roots(alpha, beta, gamma):
    """Real roots of ``alpha x^2 + beta x + gamma`` (alpha may be 0), nan-padded."""
    out = np.full(np.shape(alpha) + (2,), np.nan)
    lin = alpha == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out[..., 0] = np.where(lin & (beta != 0), -gamma / beta, np.nan)
        disc = beta * beta - 4.0 * alpha * gamma
        s = np.sqrt(np.where(disc >= 0, disc, np.nan))
        q = -0.5 * (beta + np.copysign(s, beta))
        r1 = q / alpha
        r2 = gamma / q
    quad = ~lin & np.isfinite(s)
    out[..., 0] = np.where(quad, r1, out[..., 0])
    out[..., 1] = np.where(quad, r2, np.nan)
    return out


def _bisect_gradient(mz: PhiMinorizer, idx, lo, hi, n=200):
    """Root of the (decreasing) minoriser gradient on [lo, hi] for selected entries."""
    sub = PhiMinorizer(*(getattr(mz, f)[idx] for f in ("A1", "A2", "B1", "B2", "phi_t", "offset")),
                       zeros=mz.zeros[idx], a=mz.a)
    lo = np.full(sub.A1.shape, lo)
    hi = np.full(sub.A1.shape, hi)
    for _ in range(n):
        mid = 0.5 * (lo + hi)
        pos = sub.gradient(mid) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= 1e-16):
            break
    return 0.5 * (lo + hi)


def solve_phi(mz: PhiMinorizer, eps: float = EPS) -> tuple[np.ndarray, np.ndarray]:
    """Maximise the minoriser over ``[eps, 1 - eps]`` for every entry.

    Returns ``(phi_new, root)``; ``root`` is the selected stationary point
    (before clamping) or nan where the maximum sits on the boundary or the
    entry carries no responsibility mass.
    """
    A1, A2, B1, B2 = mz.A1, mz.A2, mz.B1, mz.B2
    coeffs = np.stack([A1, A2, B1, B2])
    if not np.isfinite(coeffs).all():
        bad = tuple(int(v) for v in np.argwhere(~np.isfinite(coeffs).all(axis=0))[0])
        raise NumericalFailure(f"non-finite minoriser coefficients at phi{list(bad)}", where=bad)

    cand = np.full(A1.shape + (3,), np.nan)
    cubic = B2 < 0
    if cubic.any():
        b, c, d = mz.cubic()
        cand[cubic] = real_cubic_roots(b[cubic], c[cubic], d[cubic])
    flat = ~cubic
    if flat.any():
        # no k<K mass: A1/phi - A2/(1-phi) + B1 = 0 times phi(1-phi)
        cand[flat, :2] = _quadratic_roots(-B1[flat], B1[flat] - A1[flat] - A2[flat], A1[flat])

    inside = (cand > 0) & (cand < 1)
    cand = np.where(inside, cand, np.nan)

    # a stationary point exists whenever the gradient changes sign; recover it
    # by bisection if the closed form lost it to rounding
    with np.errstate(divide="ignore", invalid="ignore"):
        g_lo = mz.gradient(np.full(A1.shape, eps))
        g_hi = mz.gradient(np.full(A1.shape, 1.0 - eps))
    missing = ~inside.any(axis=-1) & (g_lo > 0) & (g_hi < 0)
    if missing.any():
        log.debug("cubic closed form missed %d roots; bisecting", int(missing.sum()))
        cand[missing, 0] = _bisect_gradient(mz, missing, eps, 1.0 - eps)

    ends = np.stack([np.full(A1.shape, eps), np.full(A1.shape, 1.0 - eps)], axis=-1)
    options = np.concatenate([np.clip(cand, eps, 1.0 - eps), ends], axis=-1)
    with np.errstate(invalid="ignore"):
        scores = mz.value(options.transpose(2, 0, 1)).transpose(1, 2, 0)
    scores = np.where(np.isnan(options), -np.inf, scores)
    best = np.argmax(scores, axis=-1)
    phi_new = np.take_along_axis(options, best[..., None], axis=-1)[..., 0]
    root = np.where(best < 3, np.take_along_axis(cand, np.minimum(best, 2)[..., None], axis=-1)[..., 0], np.nan)

    empty = (A1 == 0) & (A2 == 0) & (B1 == 0) & (B2 == 0)
    phi_new = np.where(empty, mz.phi_t, phi_new)
    root = np.where(empty, np.nan, root)
    return phi_new, root


def m_step_phi(m, p: ElcaParams, resp, eps: float = EPS) -> np.ndarray:
    """One MM update of every ``phi_ig`` given responsibilities."""
    return solve_phi(phi_minorizer(m, p, resp), eps)[0]


# --- a -----------------------------------------------------------------------

@dataclass
class AMinorizer:
    """Quadratic minoriser of the conditional objective in each free ``a_k``.

    ``value(a) = A log a + B a + C (a - a_t)^2``; entries are the K-1 free
    scale factors.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    a_t: np.ndarray
    offset: np.ndarray
    zeros: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)

    def value(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        return xlogy(self.A, a) + self.B * a + self.C * (a - self.a_t) ** 2

    def touching(self, a) -> np.ndarray:
        return self.value(a) + self.offset

    def exact(self, a) -> np.ndarray:
        """``A log a_k + sum_{i,g} zeros_igk log(1 - a_k phi_ig)`` per free k."""
        a = np.broadcast_to(np.asarray(a, dtype=float), self.A.shape)
        out = xlogy(self.A, a)
        for k in range(self.A.size):
            out[k] += xlog1py(self.zeros[:, :, k], -a[k] * self.phi).sum()
        return out


def _a_minorizer_from_stats(st: _Stats, p: ElcaParams) -> AMinorizer:
    a_t = p.a[:-1]
    phi = p.phi
    zeros = st.zeros[:, :, :-1]
    slope = -phi[:, :, None] / (1.0 - a_t[None, None, :] * phi[:, :, None])
    with np.errstate(divide="ignore"):
        curv = -0.5 * phi ** 2 / (1.0 - phi) ** 2
    B = (zeros * slope).sum(axis=(0, 1))
    C = np.einsum("igk,ig->k", zeros, curv)
    offset = np.array([
        xlog1py(zeros[:, :, k], -a_t[k] * phi).sum() for k in range(a_t.size)
    ]) - B * a_t
    return AMinorizer(A=st.size_mass[:-1].copy(), B=B, C=C, a_t=a_t.copy(),
                      offset=offset, zeros=zeros, phi=phi)


def a_minorizer(m, p: ElcaParams, resp) -> AMinorizer:
    x = cells(m)
    _check_dims(x, p)
    return _a_minorizer_from_stats(_stats(x, _check_resp(x, p, resp)), p)


def solve_a(mz: AMinorizer, eps: float = EPS) -> np.ndarray:
    """Closed-form maximiser of the ``a`` minoriser, clamped to ``[eps, 1 - eps]``."""
    A, B, C, a_t = mz.A, mz.B, mz.C, mz.a_t
    if not (np.isfinite(A).all() and np.isfinite(B).all() and np.isfinite(C).all()):
        k = int(np.flatnonzero(~(np.isfinite(A) & np.isfinite(B) & np.isfinite(C)))[0])
        raise NumericalFailure(f"non-finite minoriser coefficients for a[{k}]", where=k)
    out = np.empty_like(a_t)
    for k in range(a_t.size):
        if C[k] < 0:
            D = B[k] / (2.0 * C[k]) - a_t[k]
            E = -A[k] / (2.0 * C[k])
            root = np.sqrt(E + 0.25 * D * D)
            # same root as sqrt(E + D^2/4) - D/2, without cancellation for D > 0
            out[k] = root - 0.5 * D if D <= 0 else (E / (root + 0.5 * D) if E > 0 else 0.0)
        elif B[k] >= 0:
            out[k] = 1.0 - eps if A[k] > 0 or B[k] > 0 else a_t[k]
        else:
            out[k] = min(-A[k] / B[k], 1.0 - eps)
    return np.clip(out, eps, 1.0 - eps)


def m_step_a(m, p: ElcaParams, resp, eps: float = EPS) -> np.ndarray:
    """One MM update of the free scale factors; the returned vector keeps ``a_K = 1``."""
    a = p.a.copy()
    if p.n_extra > 1:
        a[:-1] = solve_a(a_minorizer(m, p, resp), eps)
    return a


# --- mixing weights ------------------------------------------------------------

def m_step_mixing(resp) -> tuple[np.ndarray, np.ndarray]:
    resp = np.asarray(resp, dtype=float)
    M = resp.shape[0]
    if M == 0:
        G, K = resp.shape[1:]
        return np.full(G, 1.0 / G), np.full(K, 1.0 / K)
    pi = resp.sum(axis=(0, 2))
    tau = resp.sum(axis=(0, 1))
    return pi / pi.sum(), tau / tau.sum()


# --- driver ----------------------------------------------------------------------

@dataclass(eq=False)
class FitResult:
    params: ElcaParams
    resp: np.ndarray
    loglik_trace: np.ndarray
    n_iter: int
    converged: bool
    seed: int | None
    z1: np.ndarray
    z2: np.ndarray

    @property
    def loglik(self) -> float:
        return float(self.loglik_trace[-1])

    def cluster_probs(self) -> np.ndarray:
        """M x G posterior cluster probabilities (summed over k)."""
        return self.resp.sum(axis=2)

    def extra_probs(self) -> np.ndarray:
        return self.resp.sum(axis=1)

    def to_dict(self, include_resp: bool = False) -> dict:
        doc = self.params.to_dict()
        doc.update({
            "loglik": self.loglik,
            "loglik_trace": self.loglik_trace.tolist(),
            "n_iter": self.n_iter,
            "converged": self.converged,
            "seed": self.seed,
            "z1": self.z1.tolist(),
            "z2": self.z2.tolist(),
        })
        if include_resp:
            doc["responsibilities"] = self.resp.tolist()
        return doc


def _clamp(p: ElcaParams, eps: float) -> ElcaParams:
    a = p.a.copy()
    a[:-1] = np.clip(a[:-1], eps, 1.0 - eps)
    return p.replace(phi=np.clip(p.phi, eps, 1.0 - eps), a=a)


def fit(m, g: int, k: int, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
        seed: int = 1, init: ElcaParams | None = None, mm_iter: int = 1,
        eps: float = EPS) -> FitResult:
    """Fit a G-cluster, K-additional-cluster ELCA model by EM.

    Parameters
    ----------
    m : IncidenceMatrix or array_like
        N x M binary incidence data.
    g, k : int
        Number of clusters and additional clusters.
    tol : float
        Stop once an iteration improves the log-likelihood by less than this.
    max_iter : int
        Upper bound on outer iterations.
    seed : int
        Seed for the random starting point (ignored when ``init`` is given).
    init : ElcaParams, optional
        Explicit starting point; it is clamped into the interior first.
    mm_iter : int
        MM updates applied to ``phi`` and to ``a`` per outer iteration.

    Returns
    -------
    FitResult
        Canonically ordered parameters, responsibilities at those
        parameters, the log-likelihood trace (initial value first) and hard
        labels from the marginal posteriors.
    """
    if g < 1 or k < 1:
        raise ValueError("G and K must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1 or mm_iter < 1:
        raise ValueError("max_iter and mm_iter must be >= 1")
    x = cells(m)
    N, M = x.shape
    if init is None:
        params = random_init(N, g, k, seed)
    else:
        problems = validate(init)
        if problems:
            raise InvalidParamsError(problems)
        if (init.n_clusters, init.n_extra) != (g, k):
            raise ValueError("init does not match requested G and K")
        params = init
    _check_dims(x, params)
    labels = m.vertex_labels if isinstance(m, IncidenceMatrix) else None
    params = _clamp(params, eps).replace(vertex_labels=labels)

    lj = log_joint(x, params)
    try:
        resp, lse = _normalise(lj)
    except NumericalFailure as exc:
        raise NumericalFailure(str(exc), exc.where, iteration=0) from exc
    trace = [float(lse.sum())]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        try:
            st = _stats(x, resp)
            for _ in range(mm_iter):
                phi, _ = solve_phi(_phi_minorizer_from_stats(st, params), eps)
                params = params.replace(phi=phi)
            if k > 1:
                for _ in range(mm_iter):
                    a = params.a.copy()
                    a[:-1] = solve_a(_a_minorizer_from_stats(st, params), eps)
                    params = params.replace(a=a)
            pi, tau = m_step_mixing(resp)
            params = params.replace(pi=pi, tau=tau)
            resp, lse = _normalise(log_joint(x, params))
        except NumericalFailure as exc:
            raise NumericalFailure(str(exc), exc.where, iteration=it) from exc
        trace.append(float(lse.sum()))
        if trace[-1] - trace[-2] < tol:
            converged = True
            break

    g_order, k_order = canonical_order(params)
    params = params.replace(pi=params.pi[g_order], phi=params.phi[:, g_order],
                            tau=params.tau[k_order], a=params.a[k_order])
    resp = resp[:, g_order][:, :, k_order]
    return FitResult(
        params=params,
        resp=resp,
        loglik_trace=np.asarray(trace),
        n_iter=it,
        converged=converged,
        seed=seed if init is None else None,
        z1=np.argmax(resp.sum(axis=2), axis=1),
        z2=np.argmax(resp.sum(axis=1), axis=1),
    )


def _fit_job(job):
    x, g, k, tol, max_iter, seed, mm_iter = job
    try:
        return seed, fit(x, g, k, tol=tol, max_iter=max_iter, seed=seed, mm_iter=mm_iter), None
    except (NumericalFailure, FloatingPointError, np.linalg.LinAlgError) as exc:
        return seed, None, exc


def fit_restarts(m, g: int, k: int, tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER, n_restarts: int = DEFAULT_RESTARTS,
                 seed: int = 1, mm_iter: int = 1, n_jobs: int = 1) -> FitResult:
    """Best of ``n_restarts`` fits started from seeds ``seed, seed + 1, ...``.

    The highest final log-likelihood wins; ties go to the lowest seed.
    Results do not depend on ``n_jobs``.
    """
    if n_restarts < 1:
        raise ValueError("n_restarts must be >= 1")
    jobs = [(m, g, k, tol, max_iter, seed + r, mm_iter) for r in range(n_restarts)]
    if n_jobs > 1 and n_restarts > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(_fit_job, jobs))
    else:
        outcomes = [_fit_job(j) for j in jobs]
    best = None
    errors = []
    for s, res, err in outcomes:
        if res is None:
            log.warning("restart with seed %d failed: %s", s, err)
            errors.append((s, err))
        elif best is None or res.loglik > best.loglik:
            best = res
    if best is None:
        raise FitFailedError(errors)
    if isinstance(m, IncidenceMatrix) and best.params.vertex_labels is None:
        best.params = best.params.replace(vertex_labels=m.vertex_labels)
    return best
