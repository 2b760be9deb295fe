"""Caricature face parsing via two-stage image-level domain adaptation."""

__version__ = "0.1.0"
