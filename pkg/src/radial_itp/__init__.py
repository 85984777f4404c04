"""Interior transmission eigenvalues for radially symmetric acoustic profiles."""

__version__ = "0.1.0"
