"""Numerical workbench for the tangent-bundle metric II+III and its lifts."""

__version__ = "0.1.0"
