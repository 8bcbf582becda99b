"""Simulation toolkit for hidden optical-polarization states (HOPS)."""

__version__ = "0.1.0"
