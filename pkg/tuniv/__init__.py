"""tuniv: T-universal polynomial series with prescribed approximation curves."""

__version__ = "0.3.0"
