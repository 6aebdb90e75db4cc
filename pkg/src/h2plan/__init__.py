"""Capacity-expansion planning for coupled electricity, heat and hydrogen systems."""

__version__ = "0.1.0"
