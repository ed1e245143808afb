"""Finite model theory workbench: preservation properties and the finite Los-Tarski counterexample."""

__version__ = "0.1.0"
