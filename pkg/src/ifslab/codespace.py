"""Finite words and eventually-periodic infinite words over a finite alphabet.

Letters are the integers ``0 .. size-1``.  Infinite words are only ever held
as :class:`AddressSpec` values (a preperiod followed by a repeated period),
which keeps equality and the code-space distance decidable.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

DEFAULT_WORD_CAP = 10**6


class AlphabetError(ValueError):
    """Letter out of range or words over different alphabets combined."""


class EnumerationCapError(ValueError):
    """Raised when |I|^n exceeds the configured enumeration cap."""


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise AlphabetError(f"alphabet size must be a positive integer, got {self.size!r}")

    def check(self, letter: int) -> int:
        if not (0 <= letter < self.size):
            raise AlphabetError(f"letter {letter} not in alphabet of size {self.size}")
        return letter

    def __len__(self):
        return self.size


@dataclass(frozen=True)
class Word:
    """A finite word; ``Word((), a)`` is the empty word."""

    letters: tuple[int, ...]
    alphabet: Alphabet

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(x) for x in self.letters))
        for x in self.letters:
            self.alphabet.check(x)

    @classmethod
    def empty(cls, alphabet: Alphabet) -> "Word":
        return cls((), alphabet)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.letters[item], self.alphabet)
        return self.letters[item]

    def __add__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __str__(self):
        return format_word(self)


def concat(u: Word, v: Word) -> Word:
    if u.alphabet != v.alphabet:
        raise AlphabetError(f"cannot concatenate words over {u.alphabet} and {v.alphabet}")
    return Word(u.letters + v.letters, u.alphabet)


def _primitive_root(period: tuple[int, ...]) -> tuple[int, ...]:
    p = len(period)
    for d in range(1, p + 1):
        if p % d == 0 and period[:d] * (p // d) == period:
            return period[:d]
    return period


def _canonical(pre: tuple[int, ...], per: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    per = _primitive_root(per)
    # Absorb trailing preperiod letters into a rotated period: u·a·(v·a)^∞ = u·(a·v)^∞.
    while pre and pre[-1] == per[-1]:
        pre = pre[:-1]
        per = per[-1:] + per[:-1]
    return pre, per


@dataclass(frozen=True)
class AddressSpec:
    """The infinite word ``preperiod · period · period · …``, kept canonical.

    Canonical means the period is primitive (not a proper power) and the
    preperiod is as short as possible, so two specs denote the same infinite
    word exactly when their fields are equal.
    """

    preperiod: Word
    period: Word

    def __post_init__(self):
        if self.preperiod.alphabet != self.period.alphabet:
            raise AlphabetError("preperiod and period use different alphabets")
        if len(self.period) == 0:
            raise ValueError("period must be non-empty")
        pre, per = _canonical(self.preperiod.letters, self.period.letters)
        a = self.period.alphabet
        object.__setattr__(self, "preperiod", Word(pre, a))
        object.__setattr__(self, "period", Word(per, a))

    @classmethod
    def of(cls, alphabet: Alphabet, preperiod: Sequence[int], period: Sequence[int]) -> "AddressSpec":
        return cls(Word(tuple(preperiod), alphabet), Word(tuple(period), alphabet))

    @property
    def alphabet(self) -> Alphabet:
        return self.period.alphabet

    def letter(self, k: int) -> int:
        """0-based letter ``k`` of the denoted infinite word."""
        pre = self.preperiod.letters
        if k < len(pre):
            return pre[k]
        per = self.period.letters
        return per[(k - len(pre)) % len(per)]

    def letters(self) -> Iterator[int]:
        yield from self.preperiod.letters
        yield from itertools.cycle(self.period.letters)

    def shift(self, n: int = 1) -> "AddressSpec":
        """Drop the first ``n`` letters."""
        pre = self.preperiod.letters
        per = self.period.letters
        if n <= len(pre):
            return AddressSpec(Word(pre[n:], self.alphabet), self.period)
        r = (n - len(pre)) % len(per)
        return AddressSpec(Word((), self.alphabet), Word(per[r:] + per[:r], self.alphabet))

    def __str__(self):
        return format_address(self)


def prefix(a: AddressSpec, m: int) -> Word:
    if m < 0:
        raise ValueError("prefix length must be non-negative")
    return Word(tuple(itertools.islice(a.letters(), m)), a.alphabet)


def periodicize(w: Word) -> AddressSpec:
    """The periodic infinite word ``w w w …``."""
    if len(w) == 0:
        raise ValueError("the empty word has no periodic extension")
    return AddressSpec(Word.empty(w.alphabet), w)


def shift_insert(i: int, a: AddressSpec) -> AddressSpec:
    a.alphabet.check(i)
    return AddressSpec(Word((i,) + a.preperiod.letters, a.alphabet), a.period)


def prepend(u: Word, a: AddressSpec) -> AddressSpec:
    """The address ``u`` followed by ``a``."""
    return AddressSpec(concat(u, a.preperiod), a.period)


def first_difference(a: AddressSpec, b: AddressSpec) -> int | None:
    """1-based index of the first differing letter, or None if a == b."""
    if a == b:
        return None
    p1, p2 = len(a.period), len(b.period)
    bound = max(len(a.preperiod), len(b.preperiod)) + p1 * p2 // math.gcd(p1, p2)
    for k in range(bound):
        if a.letter(k) != b.letter(k):
            return k + 1
    raise AssertionError("unequal canonical addresses agree on the comparison window")


def code_distance(a: AddressSpec, b: AddressSpec) -> float:
    if a.alphabet != b.alphabet:
        raise AlphabetError("addresses over different alphabets")
    k = first_difference(a, b)
    if k is None:
        return 0.0
    return math.ldexp(1.0, -k)


def enumerate_words(alphabet: Alphabet, n: int, cap: int = DEFAULT_WORD_CAP) -> list[Word]:
    """All words of length ``n`` in lexicographic order."""
    if n < 0:
        raise ValueError("word length must be non-negative")
    count = alphabet.size**n
    if count > cap:
        raise EnumerationCapError(f"{alphabet.size}^{n} = {count} words exceeds cap {cap}")
    return [Word(t, alphabet) for t in itertools.product(range(alphabet.size), repeat=n)]


def enumerate_words_upto(alphabet: Alphabet, max_len: int, cap: int = DEFAULT_WORD_CAP) -> list[Word]:
    """All non-empty words of length at most ``max_len``, shortest first."""
    total = sum(alphabet.size**n for n in range(1, max_len + 1))
    if total > cap:
        raise EnumerationCapError(f"{total} words up to length {max_len} exceeds cap {cap}")
    out: list[Word] = []
    for n in range(1, max_len + 1):
        out.extend(enumerate_words(alphabet, n, cap))
    return out


# -- text form ---------------------------------------------------------------

def format_word(w: Word, names: Sequence[str] | None = None) -> str:
    if names is None:
        return ".".join(str(x) for x in w.letters)
    return ".".join(names[x] for x in w.letters)


def format_address(a: AddressSpec, names: Sequence[str] | None = None) -> str:
    return f"{format_word(a.preperiod, names)}|{format_word(a.period, names)}"


def parse_word(text: str, alphabet: Alphabet, names: Sequence[str] | None = None) -> Word:
    text = text.strip()
    if not text:
        return Word.empty(alphabet)
    if names is None:
        names = [str(i) for i in range(alphabet.size)]
    lookup = {name: i for i, name in enumerate(names)}
    letters = []
    for tok in text.split("."):
        if tok not in lookup:
            raise AlphabetError(f"unknown letter {tok!r}")
        letters.append(lookup[tok])
    return Word(tuple(letters), alphabet)


def parse_address(text: str, alphabet: Alphabet, names: Sequence[str] | None = None) -> AddressSpec:
    if text.count("|") != 1:
        raise ValueError(f"address must look like 'pre|per', got {text!r}")
    pre, per = text.split("|")
    period = parse_word(per, alphabet, names)
    if len(period) == 0:
        raise ValueError("address period must be non-empty")
    return AddressSpec(parse_word(pre, alphabet, names), period)
