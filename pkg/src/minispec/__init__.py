"""minispec: behavioral contracts for a small C-like language, checked by bounded
exhaustive enumeration."""

__version__ = "0.1.0"
