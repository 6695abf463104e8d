"""Simulation toolkit for quantum-channel cryptographic protocols.

Classical simulation of BB84-style qubit transmission, commitment schemes,
the commit-and-open compiler, coin flipping and zero-knowledge proofs of
knowledge, with a deterministic two-party session harness.
"""

__version__ = "0.1.0"
