"""Verification engine for mechanisms under information leakage."""
__version__ = "0.1.0"
