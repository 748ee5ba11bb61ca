"""Deterministic simulator for labeled robots gathering on anonymous port-labeled graphs."""

__version__ = "0.1.0"
