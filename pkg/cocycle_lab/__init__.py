"""
cocycle-lab
Finite-horizon numerics for recurrence of R^d-valued cocycles over measure-preserving systems.
"""

__version__ = "0.1.0"
