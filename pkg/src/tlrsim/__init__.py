"""Simulator for dual-rail microwave-photon qubits in superconducting resonators."""

__version__ = "0.1.0"
