"""Brute-force reference computations used as test oracles.

Nothing here imports the package's numerical code; everything is spelled
out with plain loops and products so the checks stay independent.
"""

import itertools
import math

import numpy as np


def naive_cell_prob(x, i, j, phi, a, g, k):
    pr = a[k] * phi[i][g]
    return pr if x[i][j] == 1 else 1.0 - pr


def naive_edge_joint(x, j, pi, tau, a, phi):
    """pi_g tau_k prod_i Bernoulli terms for every (g, k), as a G x K list."""
    N = len(x)
    out = []
    for g in range(len(pi)):
        row = []
        for k in range(len(tau)):
            prod = pi[g] * tau[k]
            for i in range(N):
                prod *= naive_cell_prob(x, i, j, phi, a, g, k)
            row.append(prod)
        out.append(row)
    return out


def naive_loglik(x, pi, tau, a, phi):
    x = np.asarray(x).tolist()
    M = len(x[0])
    total = 0.0
    for j in range(M):
        joint = naive_edge_joint(x, j, pi, tau, a, phi)
        total += math.log(sum(sum(r) for r in joint))
    return total


def naive_e_step(x, pi, tau, a, phi):
    x = np.asarray(x).tolist()
    M = len(x[0])
    G, K = len(pi), len(tau)
    out = np.zeros((M, G, K))
    for j in range(M):
        joint = naive_edge_joint(x, j, pi, tau, a, phi)
        z = sum(sum(r) for r in joint)
        for g in range(G):
            for k in range(K):
                out[j, g, k] = joint[g][k] / z
    return out


def naive_complete_loglik(x, pi, tau, a, phi, z1, z2):
    x = np.asarray(x).tolist()
    total = 0.0
    for j in range(len(x[0])):
        g, k = int(z1[j]), int(z2[j])
        total += math.log(pi[g]) + math.log(tau[k])
        for i in range(len(x)):
            if x[i][j] == 1:
                total += math.log(a[k]) + math.log(phi[i][g])
            else:
                total += math.log(1.0 - a[k] * phi[i][g])
    return total


def enumerate_poisson_binomial(probs):
    """Exact pmf by summing over all 2^N inclusion patterns."""
    N = len(probs)
    out = [0.0] * (N + 1)
    for bits in itertools.product((0, 1), repeat=N):
        pr = 1.0
        for b, p in zip(bits, probs):
            pr *= p if b else 1.0 - p
        out[sum(bits)] += pr
    return np.array(out)


def golden_section_max(f, lo, hi, tol=1e-10, max_iter=500):
    """Maximise a unimodal function on [lo, hi] by golden-section search."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if hi - lo < tol:
            break
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def plain_lca_em(x, pi, p, n_iter):
    """Textbook binary LCA EM; returns the log-likelihood after each iteration.

    The first entry is the log-likelihood at the starting values. A cluster
    that loses all its mass makes the recursion undefined; the trace then
    contains nan from that point on.
    """
    x = np.asarray(x, dtype=float)
    pi = np.array(pi, dtype=float)
    p = np.array(p, dtype=float)
    N, M = x.shape
    G = pi.size

    def joint():
        w = np.empty((M, G))
        for g in range(G):
            lik = np.where(x == 1, p[:, g:g + 1], 1.0 - p[:, g:g + 1])
            w[:, g] = np.prod(lik, axis=0) * pi[g]
        return w

    w = joint()
    trace = [float(np.log(w.sum(axis=1)).sum())]
    for _ in range(n_iter):
        r = w / w.sum(axis=1, keepdims=True)
        nk = r.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            p = np.clip((x @ r) / nk, 0.0, 1.0)  # rounding can overshoot 1
        pi = nk / M
        w = joint()
        trace.append(float(np.log(w.sum(axis=1)).sum()))
    return np.array(trace), pi, p


def pmf_moments(probs):
    y = np.arange(len(probs))
    mean = float(np.dot(y, probs))
    return mean, float(np.dot((y - mean) ** 2, probs))


def align_clusters(true_phi, est_phi):
    """Cluster permutation of ``est_phi`` closest (L1) to ``true_phi``."""
    G = true_phi.shape[1]
    best = min(
        itertools.permutations(range(G)),
        key=lambda perm: np.abs(true_phi - est_phi[:, list(perm)]).sum(),
    )
    return list(best)
