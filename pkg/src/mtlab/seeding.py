"""Stable seed derivation (no dependence on ``hash()`` randomisation)."""

import hashlib


def derive_seed(base: int, *labels) -> int:
    text = "/".join([str(int(base))] + [str(x) for x in labels])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:4], "big")
