"""Rank bounds for log-linear models and a collapsed Tucker sampler for contingency tables."""

__version__ = "0.1.0"
