"""Points of the subshift, one-block codes and product systems."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Union

from .errors import InputError
from .words import DEFAULT_LENGTH_CAP, ONE, LanguageOracle, Substitution, iterate, iterate_length


@dataclass(frozen=True)
class FixedPoint:
    """The constant point 1^inf."""

    def window(self, lo, hi):
        return ONE * (hi - lo + 1)

    def shift(self, k):
        return self


@dataclass(frozen=True)
class CompactSupport:
    """The point 1^inf u.v 1^inf: ``v`` starts at coordinate 0, ``u`` ends at -1."""

    left: str
    right: str
    offset: int = 0  # accumulated shift

    def _letter(self, i):
        i += self.offset
        if -len(self.left) <= i < 0:
            return self.left[i]
        if 0 <= i < len(self.right):
            return self.right[i]
        return ONE

    def window(self, lo, hi):
        return "".join(self._letter(i) for i in range(lo, hi + 1))

    def shift(self, k):
        return CompactSupport(self.left, self.right, self.offset + k)


@dataclass(frozen=True)
class Generated:
    """The point 1^inf . sigma^inf(seed), expanded lazily.

    Coordinates 0, 1, 2, ... carry the one-sided fixed point of the
    substitution grown from the seed; every negative coordinate is 1.
    """

    sub: Substitution
    seed: str = None
    offset: int = 0
    cap: int = DEFAULT_LENGTH_CAP

    def _seed(self):
        return self.seed if self.seed is not None else self.sub.seed

    def window(self, lo, hi):
        lo, hi = lo + self.offset, hi + self.offset
        need = hi + 1
        n = 0
        while iterate_length(self.sub, self._seed(), n) < need:
            n += 1
        word = iterate(self.sub, self._seed(), n, self.cap) if need > 0 else ""
        return "".join(word[i] if i >= 0 else ONE for i in range(lo, hi + 1))

    def shift(self, k):
        return Generated(self.sub, self.seed, self.offset + k, self.cap)


Point = Union[FixedPoint, CompactSupport, Generated]


def window(p: Point, lo: int, hi: int) -> str:
    if lo > hi:
        raise InputError("window needs lo <= hi")
    return p.window(lo, hi)


def shift(p: Point, k: int) -> Point:
    """The point S^k p, i.e. (S^k p)_i = p_{i+k}."""
    return p.shift(k)


def in_subshift(oracle: LanguageOracle, p: Point, radius: int) -> bool:
    """Whether every window of ``p`` inside [-radius, radius] is allowed."""
    return oracle.contains(p.window(-radius, radius))


@dataclass(frozen=True)
class SubscriptMap:
    """A letter-to-letter map with f(1) = 1, onto its target alphabet."""

    mapping: tuple
    target_size: int

    def __post_init__(self):
        table = dict(self.mapping)
        if self.target_size < 2:
            raise InputError("a subscript map needs a target alphabet of at least 2 letters")
        if table.get(ONE) != ONE:
            raise InputError("a subscript map must send 1 to 1")
        targets = {str(i) for i in range(1, self.target_size + 1)}
        if set(table.values()) != targets:
            raise InputError("a subscript map must be onto its target alphabet")

    @classmethod
    def from_mapping(cls, mapping: Mapping, target_size=None):
        table = {str(a): str(b) for a, b in mapping.items()}
        size = target_size if target_size is not None else max(int(b) for b in table.values())
        return cls(tuple(sorted(table.items())), size)

    @classmethod
    def parse(cls, text: str):
        """Parse the inline form ``"1:1,2:2,3:2"``."""
        try:
            pairs = dict(item.split(":") for item in text.split(","))
        except ValueError:
            raise InputError(f"bad letter map {text!r}") from None
        return cls.from_mapping(pairs)

    @classmethod
    def identity(cls, size):
        return cls.from_mapping({str(i): str(i) for i in range(1, size + 1)}, size)

    def __call__(self, a):
        table = dict(self.mapping)
        try:
            return table[a]
        except KeyError:
            raise InputError(f"letter {a!r} is outside the source alphabet") from None

    def compose(self, inner: "SubscriptMap") -> "SubscriptMap":
        """The map ``self o inner``."""
        return SubscriptMap.from_mapping({a: self(b) for a, b in inner.mapping}, self.target_size)


@dataclass(frozen=True)
class CodedPoint:
    code: SubscriptMap
    base: Point

    def window(self, lo, hi):
        return apply_code(self.code, self.base.window(lo, hi))

    def shift(self, k):
        return CodedPoint(self.code, self.base.shift(k))


def apply_code(f: SubscriptMap, w):
    if isinstance(w, str):
        return "".join(f(a) for a in w)
    if isinstance(w, FixedPoint):
        return w
    return CodedPoint(f, w)


def image_language(f: SubscriptMap, oracle: LanguageOracle, length: int) -> set:
    return {apply_code(f, w) for w in oracle.factors(length)}


@dataclass(frozen=True)
class ProductSystem:
    left: LanguageOracle
    right: LanguageOracle

    fixed_letter = (ONE, ONE)

    def language(self, length):
        return product_language(self.left, self.right, length)


def product_language(a: LanguageOracle, b: LanguageOracle, length: int) -> set:
    """Pairs of equal-length factors, each encoded as a tuple of letter pairs."""
    return {tuple(zip(u, v)) for u, v in product(sorted(a.factors(length)),
                                                 sorted(b.factors(length)))}
