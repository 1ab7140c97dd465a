"""Extended latent class analysis (ELCA) for random hypergraphs."""

__version__ = "0.1.0"

from .hypergraph import (IncidenceMatrix, SizeHistogram, edge_sizes, parse_bipartite_edges,
                         parse_dense_csv, parse_hyperedge_list, read_hypergraph, size_histogram,
                         write_bipartite_edges, write_dense_csv, write_hyperedge_list)
from .model import (ElcaParams, LabeledSample, LcaParams, canonicalize, implied_lca,
                    random_init, sample, validate)
from .em import FitResult, complete_loglik, e_step, fit, fit_restarts, loglik
from .sizedist import (MomentReport, Pmf, moments, poisson_binomial_pmf,
                       poisson_mixture_limit_elca, poisson_mixture_limit_lca, size_pmf_elca,
                       size_pmf_lca, total_variation)
from .selection import CvConfig, CvSelection, cv_loglik, greedy_search

__all__ = [
    "IncidenceMatrix", "SizeHistogram", "edge_sizes", "size_histogram",
    "parse_hyperedge_list", "parse_bipartite_edges", "parse_dense_csv",
    "write_hyperedge_list", "write_bipartite_edges", "write_dense_csv", "read_hypergraph",
    "ElcaParams", "LcaParams", "LabeledSample", "validate", "random_init", "canonicalize",
    "implied_lca", "sample",
    "FitResult", "loglik", "complete_loglik", "e_step", "fit", "fit_restarts",
    "Pmf", "MomentReport", "poisson_binomial_pmf", "size_pmf_lca", "size_pmf_elca",
    "moments", "poisson_mixture_limit_lca", "poisson_mixture_limit_elca", "total_variation",
    "CvConfig", "CvSelection", "cv_loglik", "greedy_search",
]
