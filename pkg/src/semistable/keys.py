"""Seeded hashing of queries to uniforms, and weighted order keys.

Every uniform is a pure function of ``(seed, query)``: the MD5 digest of
``seed 0x1F query`` (plus ``0x1F "refresh"`` for the refresh stream) is
cut to its first 8 bytes, read big-endian as ``h``, and mapped to
``(h + 0.5) / 2**64``.

Order keys are kept in the log domain, ``ln(u) / w``.  This orders items
exactly like ``u ** (1 / w)`` but does not collapse to 1.0 for large
weights.
"""
from __future__ import annotations

import hashlib
import math

SEPARATOR = b"\x1f"
REFRESH_SUFFIX = SEPARATOR + b"refresh"

_TWO_POW_65 = 2**65
# largest double below 1.0; (h + 0.5) / 2**64 rounds up to 1.0 for the
# top ~1024 values of h
_BELOW_ONE = math.nextafter(1.0, 0.0)


def _digest_to_unit(digest: bytes) -> float:
    h = int.from_bytes(digest[:8], "big")
    # int / int true division is correctly rounded
    return min((2 * h + 1) / _TWO_POW_65, _BELOW_ONE)


def sample_hash(seed: str, query: str) -> float:
    """Uniform in (0, 1) for ``query`` under ``seed``."""
    data = seed.encode("utf-8") + SEPARATOR + query.encode("utf-8")
    return _digest_to_unit(hashlib.md5(data).digest())


def refresh_hash(seed: str, query: str) -> float:
    """Uniform in (0, 1), independent of :func:`sample_hash` for the same pair."""
    data = seed.encode("utf-8") + SEPARATOR + query.encode("utf-8") + REFRESH_SUFFIX
    return _digest_to_unit(hashlib.md5(data).digest())


class UniformHasher:
    """Both hash streams for one seed, with the seed prefix pre-encoded.

    Equivalent to :func:`sample_hash` / :func:`refresh_hash`; used in hot
    loops over large populations.
    """

    __slots__ = ("seed", "_prefix")

    def __init__(self, seed: str):
        self.seed = seed
        self._prefix = seed.encode("utf-8") + SEPARATOR

    def sample(self, query: str) -> float:
        return _digest_to_unit(hashlib.md5(self._prefix + query.encode("utf-8")).digest())

    def refresh(self, query: str) -> float:
        data = self._prefix + query.encode("utf-8") + REFRESH_SUFFIX
        return _digest_to_unit(hashlib.md5(data).digest())


def es_order_key(u: float, w: int) -> float:
    """Log-domain weighted order key ``ln(u) / w``.

    Larger is better.  Zero-weight queries are not part of the population
    and must be dropped before keys are computed.
    """
    if w < 1:
        raise ValueError(f"weight must be >= 1, got {w!r}")
    if not 0.0 < u < 1.0:
        raise ValueError(f"uniform must lie in the open interval (0, 1), got {u!r}")
    return math.log(u) / w


def new_seed(period_index: int, namespace: str) -> str:
    """Reproducible seed for ``period_index`` within ``namespace``."""
    if period_index < 0:
        raise ValueError(f"period_index must be non-negative, got {period_index}")
    return f"{namespace}:{period_index}"
