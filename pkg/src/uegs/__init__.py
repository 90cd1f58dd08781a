"""Universal elliptic Gauss sums and their use in point counting."""

__version__ = "0.1.0"
