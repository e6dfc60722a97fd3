"""Lattice gauge theory Hamiltonians (U(1), SU(2), SU(3)) on qubit registers."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import CapacityError, ConfigError, DomainError, GaugeForgeError, NumericError

__all__ = ["__version__", "GaugeForgeError", "DomainError", "ConfigError", "CapacityError", "NumericError"]
