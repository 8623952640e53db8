"""Domain-adapted transfer learning for per-capita GDP prediction from CO2 emission series."""

__version__ = "0.1.0"
