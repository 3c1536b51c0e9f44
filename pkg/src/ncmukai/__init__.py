"""Noncommutative-torus duality machinery and its verification harness."""

from .torus import TorusData, build_torus, standard_torus

__all__ = ["TorusData", "build_torus", "standard_torus"]

__version__ = "0.1.0"
