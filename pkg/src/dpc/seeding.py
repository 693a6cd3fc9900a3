"""Sub-seed derivation: one user seed, independent streams per purpose."""

import hashlib


def derive_seed(seed: int, purpose: str) -> int:
    """First 8 bytes (little-endian) of ``sha256(f"{seed}:{purpose}")``, as a non-negative int."""
    digest = hashlib.sha256(f"{int(seed)}:{purpose}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
