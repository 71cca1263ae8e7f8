"""Reduced words in the free group on k generators.

Letters are pairs ``(generator, sign)``.  Internally a letter is also given an
integer code ``2 * generator + (0 if sign > 0 else 1)`` so that the inverse of
code ``c`` is ``c ^ 1`` and the lexicographic order on codes is
``a < A < b < B < ...`` (upper case = inverse).  Balls are enumerated by length,
then lexicographically in that code order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import BallCapError, UsageError

DEFAULT_BALL_CAP = 2_000_000


def letter_code(letter):
    gen, sign = letter
    return 2 * gen + (0 if sign > 0 else 1)


def code_letter(code):
    return (int(code) >> 1, 1 if code % 2 == 0 else -1)


@dataclass(frozen=True)
class FreeWord:
    letters: tuple = ()

    def __post_init__(self):
        letters = tuple((int(g), int(s)) for g, s in self.letters)
        for g, s in letters:
            if g < 0 or s not in (1, -1):
                raise UsageError(f"bad letter ({g}, {s})")
        for (g0, s0), (g1, s1) in zip(letters, letters[1:]):
            if g0 == g1 and s0 == -s1:
                raise UsageError(f"word {letters} is not reduced")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def from_codes(cls, codes: Iterable[int]) -> "FreeWord":
        return cls(tuple(code_letter(c) for c in codes))

    @classmethod
    def parse(cls, text: str) -> "FreeWord":
        """Parse ``"aB"``-style strings; ``""`` and ``"1"`` denote the identity."""
        if text in ("", "1"):
            return cls()
        letters = []
        for ch in text:
            if not ch.isalpha():
                raise UsageError(f"cannot parse word {text!r}")
            gen = ord(ch.lower()) - ord("a")
            letters.append((gen, 1 if ch.islower() else -1))
        return cls(tuple(reduce_letters(letters)))

    @property
    def codes(self):
        return tuple(letter_code(x) for x in self.letters)

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple((g, -s) for g, s in reversed(self.letters)))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other):
        return multiply_words(self, other)

    def __pow__(self, n):
        return word_power(self, n)

    def __str__(self):
        return "".join(chr(ord("a") + g) if s > 0 else chr(ord("A") + g) for g, s in self.letters)

    def __repr__(self):
        return f"FreeWord({str(self)!r})"


def reduce_letters(letters: Sequence) -> list:
    out = []
    for g, s in letters:
        if out and out[-1][0] == g and out[-1][1] == -s:
            out.pop()
        else:
            out.append((g, s))
    return out


def multiply_words(u: FreeWord, v: FreeWord) -> FreeWord:
    a, b = u.letters, v.letters
    c = 0
    while c < min(len(a), len(b)) and a[-1 - c][0] == b[c][0] and a[-1 - c][1] == -b[c][1]:
        c += 1
    return FreeWord(a[: len(a) - c] + b[c:])


def word_power(w: FreeWord, n: int) -> FreeWord:
    if n < 0:
        return word_power(w.inverse(), -n)
    conj, core = cyclic_reduce(w)
    body = FreeWord(core.letters * n)
    return conj * body * conj.inverse()


def cyclic_reduce(w: FreeWord):
    """Return ``(s, c)`` with ``w = s c s^-1`` and ``c`` cyclically reduced."""
    x = w.letters
    t = 0
    while 2 * t + 1 < len(x) and x[t][0] == x[-1 - t][0] and x[t][1] == -x[-1 - t][1]:
        t += 1
    return FreeWord(x[:t]), FreeWord(x[t: len(x) - t])


def exponent_sums(w: FreeWord, k: int):
    out = [0] * k
    for g, s in w.letters:
        out[g] += s
    return out


def ball_size(k: int, L: int) -> int:
    if k < 1 or L < 0:
        raise UsageError(f"need k >= 1 and L >= 0, got k={k}, L={L}")
    return 1 + sum(2 * k * (2 * k - 1) ** (m - 1) for m in range(1, L + 1))


def sphere_offset(k: int, m: int) -> int:
    """Index of the first word of length ``m`` in ball order."""
    return ball_size(k, m - 1) if m > 0 else 0


def enumerate_ball(k: int, L: int, cap: int = DEFAULT_BALL_CAP) -> list:
    """All reduced words of length <= L, ordered by length then lexicographically."""
    count = ball_size(k, L)
    if count > cap:
        raise BallCapError(count, cap)
    return [FreeWord.from_codes(c) for c in _ball_codes(k, L)]


@lru_cache(maxsize=32)
def _ball_codes(k, L):
    layers = [[()]]
    for _ in range(L):
        nxt = []
        for w in layers[-1]:
            for c in range(2 * k):
                if w and c == (w[-1] ^ 1):
                    continue
                nxt.append(w + (c,))
        layers.append(nxt)
    return tuple(w for layer in layers for w in layer)


@lru_cache(maxsize=32)
def ball_arrays(k: int, L: int):
    """Padded code matrix (``-1`` fill) and lengths for the ball, as read-only arrays."""
    codes = _ball_codes(k, L)
    if len(codes) > DEFAULT_BALL_CAP:
        raise BallCapError(len(codes), DEFAULT_BALL_CAP)
    mat = np.full((len(codes), max(L, 1)), -1, dtype=np.int8)
    lengths = np.zeros(len(codes), dtype=np.int64)
    for i, w in enumerate(codes):
        mat[i, : len(w)] = w
        lengths[i] = len(w)
    mat.flags.writeable = False
    lengths.flags.writeable = False
    return mat, lengths


def word_index(w: FreeWord, k: int) -> int:
    """Position of ``w`` in the ball ordering (independent of the radius)."""
    codes = w.codes
    m = len(codes)
    idx = 0
    prev = -1
    for i, c in enumerate(codes):
        if c >= 2 * k:
            raise UsageError(f"word {w} uses a generator outside 0..{k - 1}")
        if i == 0:
            digit, radix = c, 2 * k
        else:
            digit = c if c < (prev ^ 1) else c - 1
            radix = 2 * k - 1
        idx = idx * radix + digit
        prev = c
    return sphere_offset(k, m) + idx
