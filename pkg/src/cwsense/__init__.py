"""Compressive wideband spectrum sensing with known band boundaries."""

__version__ = "0.1.0"
