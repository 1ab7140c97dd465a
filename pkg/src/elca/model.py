"""ELCA parameters, initialisation, canonical ordering and simulation.

A hyperedge draws a cluster ``g ~ pi`` and, independently, an additional
cluster ``k ~ tau``; vertex ``i`` is then included with probability
``a[k] * phi[i, g]``. ``a[-1]`` is pinned to 1 for identifiability, so
``K == 1`` is plain latent class analysis.

Cluster labels are 0-based throughout the library.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hypergraph import IncidenceMatrix

SIMPLEX_TOL = 1e-12


class InvalidParamsError(ValueError):
    """Raised when a parameter set violates a model invariant."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True, eq=False)
class ElcaParams:
    pi: np.ndarray
    tau: np.ndarray
    a: np.ndarray
    phi: np.ndarray
    vertex_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        for name in ("pi", "tau", "a", "phi"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.vertex_labels is not None:
            object.__setattr__(self, "vertex_labels", tuple(self.vertex_labels))

    @property
    def n_vertices(self) -> int:
        return self.phi.shape[0]

    @property
    def n_clusters(self) -> int:
        return self.pi.shape[0]

    @property
    def n_extra(self) -> int:
        return self.tau.shape[0]

    def replace(self, **changes) -> "ElcaParams":
        kw = dict(pi=self.pi, tau=self.tau, a=self.a, phi=self.phi,
                  vertex_labels=self.vertex_labels)
        kw.update(changes)
        return ElcaParams(**kw)

    def allclose(self, other: "ElcaParams", atol: float = 0.0) -> bool:
        return all(
            getattr(self, f).shape == getattr(other, f).shape
            and np.allclose(getattr(self, f), getattr(other, f), rtol=0, atol=atol)
            for f in ("pi", "tau", "a", "phi")
        )

    def to_dict(self) -> dict:
        out = {
            "model": "elca",
            "n_vertices": self.n_vertices,
            "n_clusters": self.n_clusters,
            "n_extra": self.n_extra,
            "pi": self.pi.tolist(),
            "tau": self.tau.tolist(),
            "a": self.a.tolist(),
            "phi": self.phi.tolist(),
        }
        if self.vertex_labels is not None:
            out["vertex_labels"] = list(self.vertex_labels)
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ElcaParams":
        try:
            phi = np.asarray(doc["phi"], dtype=float)
            params = cls(
                pi=doc["pi"], tau=doc["tau"], a=doc["a"],
                phi=phi.reshape(len(phi), -1) if phi.ndim < 2 else phi,
                vertex_labels=doc.get("vertex_labels"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParamsError([f"malformed parameter document: {exc}"]) from exc
        problems = validate(params)
        if problems:
            raise InvalidParamsError(problems)
        return params


@dataclass(frozen=True, eq=False)
class LcaParams:
    pi: np.ndarray
    p: np.ndarray
    vertex_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        for name in ("pi", "p"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_clusters(self) -> int:
        return self.pi.shape[0]

    def to_dict(self) -> dict:
        out = {"model": "lca", "pi": self.pi.tolist(), "p": self.p.tolist()}
        if self.vertex_labels is not None:
            out["vertex_labels"] = list(self.vertex_labels)
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "LcaParams":
        if "p" not in doc and "phi" in doc:
            return implied_lca(ElcaParams.from_dict(doc))
        try:
            lca = cls(pi=doc["pi"], p=doc["p"], vertex_labels=doc.get("vertex_labels"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParamsError([f"malformed parameter document: {exc}"]) from exc
        problems = _check_simplex("pi", lca.pi) + _check_unit("p", lca.p)
        if lca.p.ndim != 2 or lca.p.shape[1] != lca.pi.shape[0]:
            problems.append(f"p must be N x {lca.pi.shape[0]}, got {lca.p.shape}")
        if problems:
            raise InvalidParamsError(problems)
        return lca


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """A simulated hypergraph with the labels that generated it."""

    matrix: IncidenceMatrix
    z1: np.ndarray
    z2: np.ndarray


def _check_simplex(name, w) -> list[str]:
    out = []
    if w.ndim != 1 or w.size == 0:
        return [f"{name} must be a non-empty vector"]
    neg = np.flatnonzero(~(w >= 0))
    if neg.size:
        out.append(f"{name}[{int(neg[0])}] = {w[neg[0]]} < 0")
    if abs(w.sum() - 1.0) > SIMPLEX_TOL:
        out.append(f"sum({name}) = {float(w.sum())!r} != 1")
    return out


def _check_unit(name, arr) -> list[str]:
    bad = np.argwhere(~((arr >= 0) & (arr <= 1)))
    if bad.size:
        idx = tuple(int(v) for v in bad[0])
        return [f"{name}{list(idx)} = {arr[idx]} outside [0, 1]"]
    return []


def validate(p: ElcaParams) -> list[str]:
    """Return every violated invariant; an empty list means the parameters are valid."""
    problems = _check_simplex("pi", p.pi) + _check_simplex("tau", p.tau)
    if p.a.ndim != 1 or p.a.shape != p.tau.shape:
        problems.append(f"a must have length K={p.tau.size}, got shape {p.a.shape}")
    else:
        if p.a[-1] != 1.0:
            problems.append(f"a_K != 1 (a[{p.a.size - 1}] = {p.a[-1]})")
        for k in np.flatnonzero(~((p.a > 0) & (p.a <= 1))):
            problems.append(f"a[{int(k)}] = {p.a[k]} outside (0, 1]")
    if p.phi.ndim != 2 or p.phi.shape[1] != p.pi.size:
        problems.append(f"phi must be N x {p.pi.size}, got shape {p.phi.shape}")
    else:
        problems.extend(_check_unit("phi", p.phi))
    if p.vertex_labels is not None and len(p.vertex_labels) != p.phi.shape[0]:
        problems.append("vertex_labels length does not match phi rows")
    return problems


def random_init(n: int, g: int, k: int, seed: int) -> ElcaParams:
    """Random starting point for EM.

    Weights come from a flat Dirichlet, ``phi`` from U(0.05, 0.95) and the
    free scale factors from U(0.1, 0.9), which keeps the first E-step finite.
    """
    if min(n, g, k) < 1:
        raise ValueError("N, G and K must all be >= 1")
    rng = np.random.default_rng(seed)
    pi = rng.dirichlet(np.ones(g))
    tau = rng.dirichlet(np.ones(k))
    phi = rng.uniform(0.05, 0.95, size=(n, g))
    a = np.ones(k)
    a[:-1] = rng.uniform(0.1, 0.9, size=k - 1)
    return ElcaParams(pi=pi, tau=tau, a=a, phi=phi)


def canonical_order(p: ElcaParams) -> tuple[np.ndarray, np.ndarray]:
    """Cluster and additional-cluster permutations that canonicalise ``p``.

    Clusters go by decreasing weight (ties: phi column, lexicographic);
    additional clusters by increasing scale with the pinned one last.
    """
    G, K = p.n_clusters, p.n_extra
    g_order = sorted(range(G), key=lambda g: (-p.pi[g], tuple(p.phi[:, g])))
    k_order = sorted(range(K), key=lambda k: (p.a[k], k == K - 1, -p.tau[k], k))
    return np.array(g_order, dtype=int), np.array(k_order, dtype=int)


def canonicalize(p: ElcaParams) -> ElcaParams:
    g_order, k_order = canonical_order(p)
    return p.replace(pi=p.pi[g_order], phi=p.phi[:, g_order],
                     tau=p.tau[k_order], a=p.a[k_order])


def implied_lca(p: ElcaParams) -> LcaParams:
    """LCA parameters with the same per-cell marginals: ``p = phi * sum_k a_k tau_k``."""
    scale = float(np.dot(p.a, p.tau))
    return LcaParams(pi=p.pi.copy(), p=p.phi * scale, vertex_labels=p.vertex_labels)


def sample(p: ElcaParams, m: int, seed: int) -> LabeledSample:
    """Draw ``m`` independent hyperedges from the model."""
    if m < 1:
        raise ValueError(f"number of hyperedges must be >= 1, got {m}")
    problems = validate(p)
    if problems:
        raise InvalidParamsError(problems)
    rng = np.random.default_rng(seed)
    z1 = rng.choice(p.n_clusters, size=m, p=p.pi)
    z2 = rng.choice(p.n_extra, size=m, p=p.tau)
    prob = p.phi[:, z1] * p.a[z2][None, :]
    cells = (rng.random(prob.shape) < prob).astype(np.uint8)
    labels = list(p.vertex_labels) if p.vertex_labels is not None else []
    return LabeledSample(IncidenceMatrix(cells, labels), z1, z2)


def dumps(doc: dict) -> str:
    """Serialise a parameter/fit document.

    Python's float repr is the shortest string that round-trips, so a
    dump/load cycle is bit exact.
    """
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def save_params(p: ElcaParams | LcaParams, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(p.to_dict()))


def load_params(path) -> ElcaParams:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if "params" in doc and "phi" not in doc:
        doc = doc["params"]
    return ElcaParams.from_dict(doc)


def load_lca_params(path) -> LcaParams:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if "params" in doc and "phi" not in doc and "p" not in doc:
        doc = doc["params"]
    return LcaParams.from_dict(doc)
