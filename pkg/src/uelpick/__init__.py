"""Automatic stack-velocity picking from semblance velocity spectra."""

__version__ = "0.1.0"
