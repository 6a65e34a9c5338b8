"""Exact and numeric verification engine for partition-rank identities."""

from __future__ import annotations

from .cyclotomic import CycNum, UnitAngle, zeta

__version__ = "0.1.0"

__all__ = ["CycNum", "UnitAngle", "zeta", "__version__"]
