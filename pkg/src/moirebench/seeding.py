"""Deterministic seed derivation.

All randomness in the toolkit flows from numpy PCG64 generators whose seeds
are derived by hashing a master seed with string/int context labels, so any
entry of a build (or any sub-stream of a pipeline run) can be reproduced in
isolation, in any order, on any platform.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_seed", "rng_from", "GEOMETRY_STREAM", "NOISE_STREAM"]

# Sub-stream labels used by the degradation pipeline. The geometry stream
# feeds corner jitter draws; the noise stream feeds the sensor noise field
# and is re-created verbatim for the pattern-only run.
GEOMETRY_STREAM = "geometry"
NOISE_STREAM = "noise"


def derive_seed(*parts) -> int:
    """Hash context parts (ints/strings) into a 64-bit seed.

    The derivation is sha256 over the parts rendered as text and joined
    with ``/``, so it is stable across platforms and Python versions.
    """
    text = "/".join(_render(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def rng_from(*parts) -> np.random.Generator:
    """Generator seeded from :func:`derive_seed` of the given parts."""
    return np.random.Generator(np.random.PCG64(derive_seed(*parts)))


def _render(part) -> str:
    if isinstance(part, bool):
        raise TypeError("bool is ambiguous in seed context")
    if isinstance(part, (int, np.integer)):
        return f"i:{int(part)}"
    if isinstance(part, str):
        return f"s:{part}"
    raise TypeError(f"unsupported seed part type: {type(part).__name__}")
