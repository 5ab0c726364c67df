"""Bit strings, seeded randomness, mutation operators and threshold arithmetic.

Bit strings are plain ``bytes``/``bytearray`` objects holding the values 0 and 1,
one byte per position. ``bytes`` is the immutable form handed out by the public
operators; the trial loops work on a private ``bytearray`` and flip in place.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TWO64 = 1 << 64
_INV53 = 1.0 / (1 << 53)
# geometric skips are clamped here; any larger value means "beyond every string"
GEOM_CAP = 1 << 53
# trigger counts saturate here; a saturated trigger never fires
NEVER = (1 << 63) - 1

BitString = bytes


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive(seed: int, index: int) -> int:
    """Per-trial seed, a pure function of ``(seed, index)``."""
    a = _mix64((seed + _GOLDEN) & MASK64)
    return _mix64((a ^ _mix64(((index + 1) * _GOLDEN) & MASK64)) & MASK64)


class RandomSource:
    """splitmix64 stream.

    The compiled kernel runs the identical recurrence, so a trial can hand its
    state across the Python/kernel boundary and continue the same stream.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int = 0):
        self.state = seed & MASK64

    @classmethod
    def derived(cls, seed: int, index: int) -> "RandomSource":
        return cls(derive(seed, index))

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & MASK64
        return _mix64(self.state)

    def below(self, k: int) -> int:
        """Uniform integer in ``[0, k)`` by rejection (no modulo bias)."""
        if k <= 0:
            raise ValueError("k must be positive")
        limit = _TWO64 - (_TWO64 % k)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % k

    def random(self) -> float:
        """Uniform double in ``[0, 1)`` with 53 random bits."""
        return (self.next_u64() >> 11) * _INV53

    def bit(self) -> int:
        return self.next_u64() >> 63

    def geometric(self, log_q: float) -> int:
        """Number of failures before the first success, ``log_q = log1p(-p)``."""
        u = 1.0 - self.random()
        v = math.log(u) / log_q
        return math.floor(v) if v < GEOM_CAP else GEOM_CAP

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def bits(text: str | Iterable[int]) -> BitString:
    """Build a bit string from ``"0101"`` or an iterable of 0/1 values.

    Whitespace and underscores in strings are ignored as separators.
    """
    if isinstance(text, str):
        stripped = "".join(text.split()).replace("_", "")
        if any(c not in "01" for c in stripped):
            raise ValueError(f"bit strings hold only 0 and 1, got {text!r}")
        values = [int(c) for c in stripped]
    else:
        values = [int(v) for v in text]
    if any(v not in (0, 1) for v in values):
        raise ValueError("bit strings hold only 0 and 1")
    return bytes(values)


def to_str(x: Sequence[int]) -> str:
    return "".join("1" if v else "0" for v in x)


def ones_count(x: Sequence[int]) -> int:
    if isinstance(x, (bytes, bytearray)):
        return x.count(1)
    return int(sum(x))


def random_bits(n: int, rng: RandomSource) -> bytearray:
    """Uniform point of ``{0,1}^n``; consumes one 64-bit word per 64 positions."""
    out = bytearray(n)
    word = 0
    for i in range(n):
        if i % 64 == 0:
            word = rng.next_u64()
        out[i] = (word >> (i % 64)) & 1
    return out


def hamming(a: Sequence[int], b: Sequence[int]) -> int:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} != {len(b)}")
    return sum(1 for u, v in zip(a, b) if u != v)


def flip_positions(x: bytearray, positions: Iterable[int]) -> None:
    for i in positions:
        x[i] ^= 1


def choose_positions(perm: list[int], s: int, rng: RandomSource) -> list[int]:
    """Partial Fisher-Yates: the first ``s`` entries of ``perm`` after the call.

    ``perm`` may be any permutation of ``range(n)``; it is left permuted, which
    is how the trial loops reuse it across steps.
    """
    n = len(perm)
    for i in range(s):
        j = i + rng.below(n - i)
        perm[i], perm[j] = perm[j], perm[i]
    return perm[:s]


def s_flip(x: Sequence[int], s: int, rng: RandomSource) -> BitString:
    """Flip exactly ``s`` distinct positions chosen uniformly at random."""
    n = len(x)
    if not 1 <= s <= n:
        raise ValueError(f"strength s={s} outside [1, {n}]")
    y = bytearray(x)
    flip_positions(y, choose_positions(list(range(n)), s, rng))
    return bytes(y)


def bernoulli_positions(n: int, p: float, rng: RandomSource) -> list[int]:
    """Positions of a length-``n`` Bernoulli(p) pattern, via geometric gaps."""
    if p <= 0.0:
        return []
    if p >= 1.0:
        return list(range(n))
    log_q = math.log1p(-p)
    out = []
    pos = rng.geometric(log_q)
    while pos < n:
        out.append(pos)
        pos += 1 + rng.geometric(log_q)
    return out


def standard_bit_mutation(x: Sequence[int], p: float, rng: RandomSource) -> BitString:
    """Flip every bit independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mutation probability {p} outside [0, 1]")
    y = bytearray(x)
    flip_positions(y, bernoulli_positions(len(y), p, rng))
    return bytes(y)


def power_law_cdf(n: int, beta: float) -> list[float]:
    """Cumulative distribution of ``alpha`` on ``1..n//2`` with weight ``i**-beta``."""
    if n < 2:
        raise ValueError("heavy-tailed mutation needs n >= 2")
    if beta <= 1.0:
        raise ValueError("beta must exceed 1")
    weights = [i ** -beta for i in range(1, n // 2 + 1)]
    total = math.fsum(weights)
    cdf, acc = [], 0.0
    for w in weights:
        acc += w
        cdf.append(acc / total)
    cdf[-1] = 1.0
    return cdf


def sample_alpha(cdf: Sequence[float], rng: RandomSource) -> int:
    u = rng.random()
    lo, hi = 0, len(cdf) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if u < cdf[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo + 1


def heavy_tailed_mutation(x: Sequence[int], beta: float, rng: RandomSource) -> BitString:
    """Fast-GA mutation: power-law ``alpha``, then standard bit mutation at ``alpha/n``."""
    n = len(x)
    alpha = sample_alpha(power_law_cdf(n, beta), rng)
    return standard_bit_mutation(x, alpha / n, rng)


def binom(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def sd_threshold(n: int, s: int, R: float) -> float:
    """``C(n, s) * ln R``; ``inf`` once the value leaves the double range."""
    if R <= 1:
        raise ValueError("R must exceed 1")
    ln_r = math.log(R)
    if log_binom(n, s) + math.log(ln_r) > 709.0:
        return math.inf
    return float(binom(n, s)) * ln_r


def trigger_count(threshold: float) -> int:
    """Smallest integer counter value strictly above ``threshold``."""
    if threshold >= NEVER:
        return NEVER
    return math.floor(threshold) + 1


def sd_triggers(n: int, R: float) -> list[int]:
    """Trigger counts indexed by strength ``s`` (index 0 unused)."""
    return [NEVER] + [trigger_count(sd_threshold(n, s, R)) for s in range(1, n + 1)]


def sd_ea_threshold(n: int, r: int, R: float) -> float:
    """Phase length for rate ``r/n``: inverse chance of one fixed ``r``-flip, times ``ln R``."""
    if not 1 <= r < n:
        raise ValueError(f"rate strength r={r} outside [1, {n - 1}]")
    log_t = r * math.log(n / r) + (n - r) * math.log(n / (n - r))
    ln_r = math.log(R)
    if log_t + math.log(ln_r) > 709.0:
        return math.inf
    return math.exp(log_t) * ln_r
