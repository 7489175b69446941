"""Streaming assistive-perception gateway and its evaluation toolkit."""

__version__ = "0.1.0"
