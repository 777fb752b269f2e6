import hashlib

import numpy as np

SUBSTREAMS = ("clustering", "tree", "cv", "search", "reestimate")


def _name_key(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:4], "big")


def derive_seed(root_seed: int, name: str) -> int:
    """Integer seed of the named substream of ``root_seed``.

    Each component reseeds independently of the others: changing how many
    draws clustering consumes never shifts the tree or CV streams.
    """
    sequence = np.random.SeedSequence(entropy=root_seed, spawn_key=(_name_key(name),))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
