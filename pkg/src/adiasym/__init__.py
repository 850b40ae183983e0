"""Simulation of adiabatic quantum algorithms on small spin systems.

Subpackages cover Pauli operators and symmetry sectors (``pauli``), reference
models (``models``), exact-cover and factoring encodings (``ec3``,
``factoring``), eigen-solvers and gap fits (``spectra``), time evolution
(``evolve``), entanglement (``entangle``) and batch experiments (``harness``).
"""

__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: E402
