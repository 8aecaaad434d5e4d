"""Batch figure rendering for rksign CSV/JSON result tables.

This package talks to the simulation package only through its file
formats: fixed-schema CSV tables and fit-result JSON.  Every figure kind
validates the input header against the declared schema before touching
the data.
"""

__version__ = "0.1.0"
