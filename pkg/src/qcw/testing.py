"""Ground-truth access for tests and demos.

Protocol code never calls these; they exist so that tests can compare what
a party learned with what was actually sent.
"""

from __future__ import annotations

import numpy as np

from .qchannel import QubitBatch, _inspect


def inspect_batch(batch: QubitBatch) -> tuple[np.ndarray, np.ndarray]:
    """The prepared bits and bases of every qubit in ``batch``."""
    return _inspect(batch)


__all__ = ["inspect_batch"]
