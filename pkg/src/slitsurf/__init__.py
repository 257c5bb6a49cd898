"""Exact truncated slit-surface constructions for infinite-type translation surfaces."""

__version__ = "0.1.0"
