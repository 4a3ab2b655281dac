"""FastHCS robust principal component analysis."""

from .diagnostics import DiagnosticReport, Flag, diagnose
from .errors import FastHCSError
from .estimator import FastHCSFit, fasthcs
from .iindex import SearchConfig, num_starting_subsets, subset_size_h
from .ppursuit import PPConfig
from .reduce import DataMatrix, Method, PcaModel, center_and_reduce, classical_pca, pca_fit_on_subset
from .select import Sentinel

__all__ = [
    "DataMatrix",
    "DiagnosticReport",
    "FastHCSError",
    "FastHCSFit",
    "Flag",
    "Method",
    "PPConfig",
    "PcaModel",
    "SearchConfig",
    "Sentinel",
    "center_and_reduce",
    "classical_pca",
    "diagnose",
    "fasthcs",
    "num_starting_subsets",
    "pca_fit_on_subset",
    "subset_size_h",
]
