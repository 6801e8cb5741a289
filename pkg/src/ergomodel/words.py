"""Words, substitutions and the factor language of a substitution subshift.

Words are Python strings over the digits ``"1"`` .. ``"9"``; letter ``"1"``
is the distinguished letter whose constant point ``1^inf`` is the unique
fixed point. Positions are 1-based wherever a position is reported.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import InputError, ResourceError, StabilizationError

ONE = "1"
DEFAULT_LENGTH_CAP = 2**20
DEFAULT_HORIZON = 4096


@dataclass(frozen=True)
class Substitution:
    """A substitution on the letters ``1..alphabet_size``.

    Parameters
    ----------
    alphabet_size : int
        Number of letters, at most 9 so that words stay plain strings.
    images : tuple of (letter, image) pairs
        Use :meth:`from_mapping` to build from a dict.
    seed : str
        A letter other than ``1`` whose image starts and ends with itself.

    Examples
    --------
    >>> DEFAULT.image("2")
    '212'
    """

    alphabet_size: int
    images: tuple
    seed: str

    def __post_init__(self):
        k = self.alphabet_size
        if not isinstance(k, int) or k < 2:
            raise InputError(f"alphabet size must be an integer >= 2, got {k!r}")
        if k > 9:
            raise InputError("alphabets larger than 9 letters are not supported")
        letters = self.letters
        imgs = dict(self.images)
        if sorted(imgs) != list(letters):
            raise InputError(f"images must cover exactly the letters {letters}")
        for a, img in imgs.items():
            if not img or any(c not in letters for c in img):
                raise InputError(f"image of {a} must be a nonempty word over the alphabet")
        if set(imgs[ONE]) != {ONE} or len(imgs[ONE]) < 2:
            raise InputError("image of 1 must be 1^k with k >= 2")
        for a, img in imgs.items():
            if a != ONE and (img[0] == ONE or img[-1] == ONE):
                raise InputError(f"image of {a} must begin and end with a letter other than 1")
        s = self.seed
        if s not in letters or s == ONE:
            raise InputError(f"seed must be a letter other than 1, got {s!r}")
        if imgs[s][0] != s or imgs[s][-1] != s:
            raise InputError(f"image of the seed {s} must begin and end with {s}")

    @classmethod
    def from_mapping(cls, images: Mapping, seed, alphabet_size=None):
        imgs = {str(a): str(w) for a, w in images.items()}
        size = alphabet_size if alphabet_size is not None else len(imgs)
        return cls(int(size), tuple(sorted(imgs.items())), str(seed))

    @classmethod
    def from_json(cls, text_or_obj):
        obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
        try:
            images = obj["images"]
            if any(not isinstance(w, str) for w in images.values()):
                raise InputError("words must be strings of single-digit letters")
            return cls.from_mapping(images, obj["seed"], obj.get("alphabet_size"))
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"bad substitution config: {exc}") from None

    def to_json_obj(self):
        return {
            "alphabet_size": self.alphabet_size,
            "images": dict(self.images),
            "seed": int(self.seed),
        }

    @property
    def letters(self):
        return tuple(str(i) for i in range(1, self.alphabet_size + 1))

    def image(self, a):
        for b, img in self.images:
            if b == a:
                return img
        raise InputError(f"letter {a!r} is not in the alphabet")


DEFAULT = Substitution.from_mapping({"1": "11", "2": "212"}, seed="2")


def substitute(sub: Substitution, w: str) -> str:
    table = dict(sub.images)
    try:
        return "".join(table[a] for a in w)
    except KeyError as exc:
        raise InputError(f"letter {exc.args[0]!r} is not in the alphabet") from None


def iterate_length(sub: Substitution, a: str, n: int) -> int:
    """Length of sigma^n(a) without building the word."""
    lengths = {b: 1 for b in sub.letters}
    for _ in range(n):
        lengths = {b: sum(lengths[c] for c in sub.image(b)) for b in sub.letters}
    return lengths[a]


def iterate(sub: Substitution, a: str, n: int, cap: int = DEFAULT_LENGTH_CAP) -> str:
    if a not in sub.letters:
        raise InputError(f"letter {a!r} is not in the alphabet")
    if n < 0:
        raise InputError("iteration count must be nonnegative")
    size = iterate_length(sub, a, n)
    if size > cap:
        raise ResourceError(
            f"sigma^{n}({a}) has {size} letters, above the cap of {cap}",
            required_n=n, length=size, cap=cap,
        )
    w = a
    for _ in range(n):
        w = substitute(sub, w)
    return w


def occurrences(host: Sequence, pattern: Sequence) -> list:
    """All 1-based start positions of ``pattern`` in ``host``, overlaps included.

    >>> occurrences("11111", "1111")
    [1, 2]
    """
    if len(pattern) == 0:
        raise InputError("pattern must be nonempty")
    if isinstance(host, str) and isinstance(pattern, str):
        out, i = [], host.find(pattern)
        while i >= 0:
            out.append(i + 1)
            i = host.find(pattern, i + 1)
        return out
    m = len(pattern)
    pattern = tuple(pattern)
    return [i + 1 for i in range(len(host) - m + 1) if tuple(host[i:i + m]) == pattern]


def factors_of(word: Sequence, length: int) -> set:
    return {word[i:i + length] for i in range(len(word) - length + 1)}


@dataclass
class LanguageOracle:
    """Factor language of the subshift generated by ``sub``.

    The language is the union of the factor sets of sigma^n(seed) together
    with every block of 1s. ``factors(L)`` is certified once two consecutive
    depths agree and the depth is at least ``ceil(log2 L) + 2``.
    """

    sub: Substitution = DEFAULT
    horizon: int = DEFAULT_HORIZON
    cap: int = DEFAULT_LENGTH_CAP
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _depth: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False,
                                  compare=False)

    def __hash__(self):
        return hash((self.sub, self.horizon, self.cap))

    def host(self, n: int) -> str:
        return iterate(self.sub, self.sub.seed, n, self.cap)

    def _min_depth(self, length):
        return (math.ceil(math.log2(length)) if length > 1 else 0) + 2

    def factors(self, length: int) -> frozenset:
        if length < 0:
            raise InputError("length must be nonnegative")
        if length > self.horizon:
            raise ResourceError(
                f"length {length} is beyond the enumeration horizon {self.horizon}",
                length=length, horizon=self.horizon,
            )
        with self._lock:
            hit = self._cache.get(length)
        if hit is not None:
            return hit
        if length == 0:
            result, depth = frozenset({""}), 0
        else:
            result, depth = self._stabilize(length)
        with self._lock:
            self._cache[length] = result
            self._depth[length] = depth
        return result

    def _stabilize(self, length):
        ones = ONE * length
        n = self._min_depth(length)
        prev = None
        while True:
            try:
                word = self.host(n)
            except ResourceError:
                raise StabilizationError(
                    f"factors of length {length} did not stabilize below the length cap",
                    length=length, last_two=(prev, None),
                ) from None
            cur = frozenset(factors_of(word, length) | {ones})
            if prev is not None and cur == prev:
                return cur, n - 1
            if prev is not None and iterate_length(self.sub, self.sub.seed, n + 1) > self.cap:
                raise StabilizationError(
                    f"factors of length {length} did not stabilize below the length cap",
                    length=length, last_two=(prev, cur),
                )
            prev, n = cur, n + 1

    def stabilization_depth(self, length: int) -> int:
        self.factors(length)
        return self._depth[length]

    def contains(self, w: str) -> bool:
        return w in self.factors(len(w))


def factors(oracle: LanguageOracle, length: int) -> frozenset:
    return oracle.factors(length)
