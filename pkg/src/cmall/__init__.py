"""Proof engine and phase-semantics workbench for the CMALL multisequent calculus."""

__version__ = "0.1.0"
