"""Retrieval-grounded multi-agent legal assistant engine."""

__version__ = "0.1.0"
