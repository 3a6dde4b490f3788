"""Cross-language semantic clone detection by input/output behavior."""

__version__ = "0.1.0"
