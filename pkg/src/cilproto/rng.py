"""Deterministic, cross-platform PRNG stack.

Everything that needs reproducible randomness (class-order shuffles,
synthetic data) runs on the generators in this module rather than on
``random`` or numpy's generators, whose streams are not pinned by this
package. The construction is:

* splitmix64 expands a 64-bit seed into generator state,
* xoshiro256** produces the uniform 64-bit stream,
* doubles in [0, 1) take the top 53 bits: ``(u64 >> 11) * 2**-53``,
* normals come from the Box-Muller transform (pair cached),
* bounded integers use power-of-two rejection sampling (no modulo bias),
* shuffles are Fisher-Yates, high index down to 1.

Named streams derive independent substreams from one seed by XOR-ing the
seed with the FNV-1a 64-bit hash of the stream label before splitmix64
expansion. All integer arithmetic is masked to 64 bits, so the integer
stream is identical on every platform; floating-point outputs are as
portable as the host libm (sqrt/log/cos/sin).
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash, used to derive named substream seeds."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def splitmix64_next(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** with splitmix64 seeding and Box-Muller normals."""

    __slots__ = ("_s", "_cached_normal")

    def __init__(self, state: tuple[int, int, int, int]):
        if len(state) != 4 or not any(state):
            raise ValueError("xoshiro256** state must be 4 words, not all zero")
        self._s = [w & _MASK64 for w in state]
        self._cached_normal: float | None = None

    @classmethod
    def from_seed(cls, seed: int, stream: str = "") -> "Xoshiro256StarStar":
        """Seed a generator; distinct `stream` labels give independent streams."""
        base = seed & _MASK64
        if stream:
            base ^= fnv1a64(stream.encode("utf-8"))
        words = []
        sm = base
        for _ in range(4):
            sm, out = splitmix64_next(sm)
            words.append(out)
        return cls(tuple(words))

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform double in [0, 1), top 53 bits of one u64."""
        return (self.next_u64() >> 11) * 2.0**-53

    def normal(self) -> float:
        """Standard normal via Box-Muller; draws two uniforms per pair.

        u1 is mapped into (0, 1] so the log is always finite; the sine
        mate of each pair is cached and returned on the next call.
        """
        if self._cached_normal is not None:
            z = self._cached_normal
            self._cached_normal = None
            return z
        u1 = ((self.next_u64() >> 11) + 1) * 2.0**-53
        u2 = (self.next_u64() >> 11) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._cached_normal = r * math.sin(theta)
        return r * math.cos(theta)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by bitmask rejection."""
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        bits = (n - 1).bit_length()
        mask = (1 << bits) - 1
        while True:
            r = self.next_u64() & mask
            if r < n:
                return r


def fisher_yates(items: list, rng: Xoshiro256StarStar) -> None:
    """In-place Fisher-Yates shuffle driven by `rng`, index n-1 down to 1."""
    for i in range(len(items) - 1, 0, -1):
        j = rng.randbelow(i + 1)
        items[i], items[j] = items[j], items[i]
