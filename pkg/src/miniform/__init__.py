"""A batch interpreter for a small FORM dialect."""

__version__ = "0.1.0"
