"""Stochastic paging laboratory: power-law workloads, cache policies,
ratio-of-expectations bounds and multi-core power-law fitting."""

__version__ = "0.1.0"
