"""Bias-aware benchmark harness for wearable-sensor activity recognition."""

__version__ = "0.1.0"
