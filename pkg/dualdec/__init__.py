"""Dual-codeword based decoding toolkit for binary linear block codes."""

__version__ = "0.1.0"
