"""MinHash signatures over token-shingled code contexts.

The signature kernel evaluates 128 universal hash functions
((a*x + b) mod p, p = 2^61 - 1) over every shingle and keeps the minimum
per function. The modular multiply is done exactly in 64-bit arithmetic by
splitting operands at 31 bits, so the Numba kernel and the pure-NumPy
fallback produce identical signatures. Set WARNMINER_NO_NUMBA=1 to force
the NumPy path.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass

import numpy as np

MERSENNE_PRIME = np.uint64((1 << 61) - 1)
NUM_PERMUTATIONS = 128
SIGNATURE_SEED = 0x5CA1AB1E

_MASK31 = np.uint64((1 << 31) - 1)
_MASK30 = np.uint64((1 << 30) - 1)

_WS_RE = re.compile(r"\s+")


def _numba_disabled() -> bool:
    return os.environ.get("WARNMINER_NO_NUMBA", "").strip() not in ("", "0", "false")


HAS_NUMBA = False
if not _numba_disabled():
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        HAS_NUMBA = False


def active_backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"


@dataclass(frozen=True)
class ContextShingleSet:
    shingles: frozenset[int]  # 64-bit hashes of 3-token windows


@dataclass(frozen=True)
class MinHashSignature:
    values: tuple[int, ...]
    seed: int = SIGNATURE_SEED

    def __post_init__(self):
        if len(self.values) != NUM_PERMUTATIONS:
            raise ValueError(f"signature must have {NUM_PERMUTATIONS} values")


def _hash64(token_window: str) -> int:
    digest = hashlib.blake2b(token_window.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def shingle(text: str, k: int = 3) -> ContextShingleSet:
    """Token k-shingles of the normalized text (lowercased, whitespace-collapsed).

    Texts with fewer than k tokens yield one shingle over the whole text.
    """
    normalized = _WS_RE.sub(" ", text.lower()).strip()
    tokens = normalized.split(" ") if normalized else []
    if len(tokens) < k:
        return ContextShingleSet(frozenset({_hash64(normalized)}))
    hashes = {_hash64(" ".join(tokens[i : i + k])) for i in range(len(tokens) - k + 1)}
    return ContextShingleSet(frozenset(hashes))


def _permutation_params(seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.PCG64(seed))
    p = int(MERSENNE_PRIME)
    a = rng.integers(1, p, size=NUM_PERMUTATIONS, dtype=np.uint64)
    b = rng.integers(0, p, size=NUM_PERMUTATIONS, dtype=np.uint64)
    return a, b


_PARAM_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _params(seed: int) -> tuple[np.ndarray, np.ndarray]:
    if seed not in _PARAM_CACHE:
        _PARAM_CACHE[seed] = _permutation_params(seed)
    return _PARAM_CACHE[seed]


def _signature_numpy(xs: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    p = MERSENNE_PRIME
    x = (xs % p)[np.newaxis, :]  # (1, n)
    ac = a[:, np.newaxis]  # (m, 1)
    a1, a0 = ac >> np.uint64(31), ac & _MASK31
    x1, x0 = x >> np.uint64(31), x & _MASK31
    hi = a1 * x1  # < 2^60
    mid = (a1 * x0 + a0 * x1) % p  # summands < 2^61 each
    lo = a0 * x0  # < 2^62
    m1, m0 = mid >> np.uint64(30), mid & _MASK30
    # a*x = hi*2^62 + mid*2^31 + lo, with 2^61 = 1 (mod p).
    term = (hi * np.uint64(2)) % p + (m1 + (m0 << np.uint64(31))) % p + lo % p
    h = (term + b[:, np.newaxis]) % p
    return h.min(axis=1)


if HAS_NUMBA:

    @njit(cache=True)
    def _signature_numba(xs, a, b):  # pragma: no cover - exercised via wrapper
        p = np.uint64((1 << 61) - 1)
        mask31 = np.uint64((1 << 31) - 1)
        mask30 = np.uint64((1 << 30) - 1)
        m = a.shape[0]
        n = xs.shape[0]
        out = np.empty(m, dtype=np.uint64)
        for i in range(m):
            a1 = a[i] >> np.uint64(31)
            a0 = a[i] & mask31
            best = p
            for j in range(n):
                x = xs[j] % p
                x1 = x >> np.uint64(31)
                x0 = x & mask31
                hi = a1 * x1
                mid = (a1 * x0 + a0 * x1) % p
                lo = a0 * x0
                m1 = mid >> np.uint64(30)
                m0 = mid & mask30
                term = (hi * np.uint64(2)) % p + (m1 + (m0 << np.uint64(31))) % p + lo % p
                h = (term + b[i]) % p
                if h < best:
                    best = h
            out[i] = best
        return out


def minhash(shingles: ContextShingleSet, seed: int = SIGNATURE_SEED) -> MinHashSignature:
    """128-value MinHash signature of a shingle set. Deterministic per seed."""
    if not shingles.shingles:
        raise ValueError("cannot minhash an empty shingle set")
    xs = np.fromiter(sorted(shingles.shingles), dtype=np.uint64)
    a, b = _params(seed)
    if HAS_NUMBA:
        values = _signature_numba(xs, a, b)
    else:
        values = _signature_numpy(xs, a, b)
    return MinHashSignature(values=tuple(int(v) for v in values), seed=seed)


def estimate_jaccard(a: MinHashSignature, b: MinHashSignature) -> float:
    """Fraction of agreeing signature positions; unbiased Jaccard estimate."""
    if a.seed != b.seed or len(a.values) != len(b.values):
        raise ValueError("signatures are not comparable (seed/length mismatch)")
    agree = sum(1 for x, y in zip(a.values, b.values) if x == y)
    return agree / len(a.values)


def brute_force_jaccard(a: set, b: set) -> float:
    """Exact |a n b| / |a u b|; 1.0 when both sets are empty."""
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)
