"""Clopen subsets of the subshift in canonical form.

A clopen set is stored as a coordinate window ``[lo, hi]`` together with the
set of allowed words that the window of a point must show. Two clopens are
compared after both are lifted to the union of their windows, and
:meth:`ClopenAlgebra.normalize` picks the narrowest, then leftmost, window
describing a set.
"""

from __future__ import annotations

from dataclasses import dataclass
from .errors import InputError
from .words import ONE, LanguageOracle


@dataclass(frozen=True)
class Clopen:
    lo: int
    hi: int
    words: frozenset

    def __post_init__(self):
        if self.hi < self.lo - 1:
            raise InputError("clopen window must satisfy lo <= hi + 1")
        if any(len(w) != self.hi - self.lo + 1 for w in self.words):
            raise InputError("clopen words must match the window length")

    @property
    def width(self):
        return self.hi - self.lo + 1

    def contains_fixed_point(self):
        return ONE * self.width in self.words

    def shifted(self, j):
        """S^j of this set, with (S x)_i = x_{i+1}."""
        return Clopen(self.lo - j, self.hi - j, self.words)

    def describe(self):
        """Render as a sorted list of ``u.v`` cylinder strings."""
        out = []
        for w in sorted(self.words):
            cut = -self.lo
            if 0 <= cut <= len(w):
                out.append(f"{w[:cut]}.{w[cut:]}")
            else:
                out.append(f"{w}@{self.lo}")
        return out


def cylinder(u: str, v: str) -> Clopen:
    """The cylinder [u.v]: u occupies -|u|..-1 and v occupies 0..|v|-1."""
    return Clopen(-len(u), len(v) - 1, frozenset({u + v}))


def parse_cylinder(text: str) -> Clopen:
    """``"212"`` means [.212]; ``"1.21"`` means [1.21]."""
    if "." in text:
        u, v = text.split(".", 1)
    else:
        u, v = "", text
    if not (u + v).isdigit():
        raise InputError(f"bad cylinder {text!r}")
    return cylinder(u, v)


def parse_union(text: str, lang=None) -> Clopen:
    """``"2112|1.21"`` is the union of the listed cylinders.

    A single cylinder needs no language; a union is formed over ``lang``.
    """
    parts = [parse_cylinder(t.strip()) for t in text.split("|")]
    if len(parts) == 1:
        return parts[0]
    if lang is None:
        raise InputError("a union of cylinders needs a language")
    return ClopenAlgebra(lang).union(*parts)


class ClopenAlgebra:
    """Boolean operations on clopen sets over a fixed language."""

    def __init__(self, lang: LanguageOracle):
        self.lang = lang

    def full(self) -> Clopen:
        return Clopen(0, -1, frozenset({""}))

    def empty(self) -> Clopen:
        return Clopen(0, -1, frozenset())

    def restrict(self, c: Clopen) -> Clopen:
        """Drop words that are not in the language."""
        allowed = self.lang.factors(c.width)
        return Clopen(c.lo, c.hi, frozenset(c.words & allowed))

    def lift(self, c: Clopen, lo: int, hi: int) -> Clopen:
        """The same set described at the larger window [lo, hi]."""
        if lo > c.lo or hi < c.hi:
            raise InputError("lift target must contain the current window")
        if (lo, hi) == (c.lo, c.hi):
            return self.restrict(c)
        a, b = c.lo - lo, c.hi - lo + 1
        words = c.words
        return Clopen(lo, hi, frozenset(
            w for w in self.lang.factors(hi - lo + 1) if w[a:b] in words))

    def lift_any(self, c: Clopen, lo: int, hi: int) -> Clopen:
        """Like :meth:`lift`, but a zero-width set (everything or nothing) fits anywhere."""
        if c.width == 0:
            return Clopen(lo, hi, self.lang.factors(hi - lo + 1) if c.words else frozenset())
        return self.lift(c, lo, hi)

    def align(self, *cs: Clopen):
        wide = [c for c in cs if c.width > 0]
        if not wide:
            return list(cs)
        lo = min(c.lo for c in wide)
        hi = max(c.hi for c in wide)
        return [self.lift_any(c, lo, hi) for c in cs]

    def union(self, *cs: Clopen) -> Clopen:
        if not cs:
            return self.empty()
        al = self.align(*cs)
        return Clopen(al[0].lo, al[0].hi, frozenset().union(*(c.words for c in al)))

    def intersection(self, *cs: Clopen) -> Clopen:
        al = self.align(*cs)
        words = al[0].words
        for c in al[1:]:
            words = words & c.words
        return Clopen(al[0].lo, al[0].hi, frozenset(words))

    def difference(self, a: Clopen, b: Clopen) -> Clopen:
        x, y = self.align(a, b)
        return Clopen(x.lo, x.hi, x.words - y.words)

    def complement(self, c: Clopen) -> Clopen:
        c = self.restrict(c)
        return Clopen(c.lo, c.hi, self.lang.factors(c.width) - c.words)

    def symmetric_difference(self, a: Clopen, b: Clopen) -> Clopen:
        x, y = self.align(a, b)
        return Clopen(x.lo, x.hi, x.words ^ y.words)

    def subset(self, a: Clopen, b: Clopen) -> bool:
        x, y = self.align(a, b)
        return x.words <= y.words

    def equal(self, a: Clopen, b: Clopen) -> bool:
        x, y = self.align(a, b)
        return x.words == y.words

    def is_empty(self, c: Clopen) -> bool:
        return not self.restrict(c).words

    def disjoint(self, a: Clopen, b: Clopen) -> bool:
        x, y = self.align(a, b)
        return not (x.words & y.words)

    def contains_fixed_point(self, c: Clopen) -> bool:
        return self.restrict(c).contains_fixed_point()

    def normalize(self, c: Clopen) -> Clopen:
        """A normal form: the narrowest window describing ``c``, leftmost on ties.

        Windows are searched inside the greedily shrunk window widened by its
        own width on each side. Different minimal windows can describe the
        same set (for the default language 112 at [0, 2] equals 212 at
        [2, 4]), which is why the tie rule is needed.
        """
        c = self._shrink(c)
        if c.width == 0:
            return c
        lo0, hi0 = c.lo - c.width, c.hi + c.width
        big = self.lift(c, lo0, hi0).words
        for width in range(1, c.width + 1):
            for a in range(lo0, hi0 - width + 2):
                cut = a - lo0
                cand = Clopen(a, a + width - 1, frozenset(w[cut:cut + width] for w in big))
                if self.lift(cand, lo0, hi0).words == big:
                    return cand
        return c

    def _shrink(self, c: Clopen) -> Clopen:
        c = self.restrict(c)
        if not c.words:
            return self.empty()
        changed = True
        while changed and c.width > 0:
            changed = False
            for side in ("left", "right"):
                if c.width == 0:
                    break
                proj = (frozenset(w[1:] for w in c.words) if side == "left"
                        else frozenset(w[:-1] for w in c.words))
                lo, hi = (c.lo + 1, c.hi) if side == "left" else (c.lo, c.hi - 1)
                smaller = Clopen(lo, hi, proj)
                if self.lift(smaller, c.lo, c.hi).words == c.words:
                    c, changed = smaller, True
        return self.full() if c.width == 0 else c
