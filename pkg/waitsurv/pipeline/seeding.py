"""Derivation of independent random streams from the master seed."""

import numpy as np

_PURPOSES = {
    "folds": 1,
    "relief": 2,
    "network": 3,
    "search": 4,
    "inner_split": 5,
}


def derive_seed(master: int, purpose: str, *indices: int) -> int:
    """Stable 32-bit seed for (master, purpose, indices); distinct keys give independent streams."""
    try:
        tag = _PURPOSES[purpose]
    except KeyError:
        raise ValueError(f"Unknown seed purpose: {purpose}") from None
    sequence = np.random.SeedSequence([int(master), tag, *(int(i) for i in indices)])
    return int(sequence.generate_state(1)[0])
