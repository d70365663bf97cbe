"""Forecast-driven offloading, power and bandwidth allocation for heterogeneous edge servers."""

__version__ = "0.1.0"
