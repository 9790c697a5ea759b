"""Exact low-rank reduction of adiabatic interpolations between low-rank Hamiltonians."""

from .instances import AffinePath, figure1_instance, gus_instance, random_instance
from .linalg import Combination, Dense, Indicator, Interval, LowRankHermitian, Uniform, inner_product
from .reduction import ReducedSystem, build

__all__ = [
    "AffinePath", "Combination", "Dense", "Indicator", "Interval", "LowRankHermitian", "ReducedSystem",
    "Uniform", "build", "figure1_instance", "gus_instance", "inner_product", "random_instance",
]
