"""Deterministic skid-steer tankette simulator and row-corridor navigation stack."""

__version__ = "0.1.0"
