"""Four-component Dirac-like model of a two-level atom in a classical laser field."""

__version__ = "0.1.0"
