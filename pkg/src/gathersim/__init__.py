"""Simulation and certification of contracting gathering protocols for robot swarms."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
