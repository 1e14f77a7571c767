"""Desk-scale verification lab for Densest k-subgraph integrality-gap witnesses."""

__version__ = "0.1.0"
