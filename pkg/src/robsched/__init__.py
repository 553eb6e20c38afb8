"""Robust server-count and speed configuration for an M/M/m cloud platform."""
__version__ = "0.1.0"
