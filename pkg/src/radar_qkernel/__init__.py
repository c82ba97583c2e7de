"""Matched classical vs. quantum-kernel benchmark on simulated FMCW radar products."""

__version__ = "0.1.0"
