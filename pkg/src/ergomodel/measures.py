"""Exact invariant measures on the clopen algebra.

Cylinder frequencies are obtained by counting occurrences inside the
compact-support point 1^inf . sigma^n(seed) 1^inf. Counts are assembled
recursively from summaries of sigma^(n-1)(a) (length, head, tail, count),
so occurrences straddling the boundary between two images are counted from
the short head/tail strings and the long words are never built.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering

import numpy as np

from .clopen import Clopen, ClopenAlgebra
from .errors import InputError, StabilizationError
from .subshift import SubscriptMap, apply_code
from .words import ONE, LanguageOracle, Substitution, iterate


@total_ordering
class _Infinite:
    """Measure of a clopen set that contains the fixed point.

    Only comparison is allowed; any arithmetic raises ``TypeError``.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE"

    __str__ = __repr__

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("INFINITE")

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def _forbidden(self, *_):
        raise TypeError("arithmetic with INFINITE is not defined")

    __add__ = __radd__ = __sub__ = __rsub__ = __mul__ = __rmul__ = _forbidden
    __truediv__ = __rtruediv__ = __neg__ = _forbidden


INFINITE = _Infinite()


@dataclass(frozen=True)
class _Summary:
    length: int
    head: str
    tail: str
    count: int


def _combine(a: _Summary, b: _Summary, pattern: str) -> _Summary:
    keep = len(pattern) - 1
    if keep == 0:
        return _Summary(a.length + b.length, "", "", a.count + b.count)
    joint = a.tail + b.head
    cross, i = 0, joint.find(pattern)
    while i >= 0:
        cross += 1
        i = joint.find(pattern, i + 1)
    head = (a.head + b.head)[:keep] if a.length < keep else a.head
    tail = (a.tail + b.tail)[-keep:] if b.length < keep else b.tail
    return _Summary(a.length + b.length, head, tail, a.count + b.count + cross)


class _Counter:
    """Occurrence counts of one pattern in iterates of a substitution."""

    def __init__(self, sub: Substitution, pattern: str):
        self.sub, self.pattern = sub, pattern
        self.memo = {}

    def leaf(self, a):
        keep = len(self.pattern) - 1
        return _Summary(1, a[:keep], a[:keep], int(a == self.pattern))

    def summary(self, a, n):
        key = (a, n)
        if key not in self.memo:
            if n == 0:
                self.memo[key] = self.leaf(a)
            else:
                acc = None
                for b in self.sub.image(a):
                    s = self.summary(b, n - 1)
                    acc = s if acc is None else _combine(acc, s, self.pattern)
                self.memo[key] = acc
        return self.memo[key]

    def padded_count(self, n):
        """Occurrences in 1^L sigma^n(seed) 1^L with L the pattern length."""
        pad = None
        for _ in range(len(self.pattern)):
            leaf = self.leaf(ONE)
            pad = leaf if pad is None else _combine(pad, leaf, self.pattern)
        core = self.summary(self.sub.seed, n)
        return _combine(_combine(pad, core, self.pattern), pad, self.pattern).count


def naive_padded_count(sub: Substitution, w: str, n: int) -> int:
    """Direct scan; the independent route used to cross-check the recursion."""
    pad = ONE * len(w)
    host = pad + iterate(sub, sub.seed, n) + pad
    return sum(1 for i in range(len(host) - len(w) + 1) if host.startswith(w, i))


def padded_count(sub: Substitution, w: str, n: int) -> int:
    return _Counter(sub, w).padded_count(n)


class CylinderMeasure:
    """The invariant measure normalized by mu([.seed]) = 1.

    Values are exact ``Fraction`` objects, or ``INFINITE`` for cylinders
    made of 1s only. Memoization is guarded by a lock and every fill of a
    key writes the same value, so concurrent use is safe.
    """

    max_depth = 64

    def __init__(self, oracle: LanguageOracle):
        self.oracle = oracle
        self.sub = oracle.sub
        self.algebra = ClopenAlgebra(oracle)
        self._memo = {}
        self._lock = threading.Lock()

    @property
    def language(self):
        return self.oracle

    def __call__(self, w: str):
        with self._lock:
            if w in self._memo:
                return self._memo[w]
        value = self._compute(w)
        with self._lock:
            self._memo[w] = value
        return value

    def trajectory(self, w: str, depths):
        anchor = _Counter(self.sub, self.sub.seed)
        counter = _Counter(self.sub, w)
        return [Fraction(counter.padded_count(n), anchor.padded_count(n)) for n in depths]

    def _compute(self, w):
        if any(a not in self.sub.letters for a in w):
            raise InputError(f"word {w!r} is not over the alphabet")
        if set(w) <= {ONE}:
            return INFINITE
        if len(w) <= self.oracle.horizon and not self.oracle.contains(w):
            return Fraction(0)
        start = self.oracle.stabilization_depth(min(len(w), self.oracle.horizon))
        anchor = _Counter(self.sub, self.sub.seed)
        counter = _Counter(self.sub, w)
        seen = []
        for n in range(start, self.max_depth):
            seen.append(Fraction(counter.padded_count(n), anchor.padded_count(n)))
            if len(seen) >= 3 and seen[-1] == seen[-2] == seen[-3]:
                return seen[-1]
        raise StabilizationError(f"frequency of {w!r} did not stabilize", trajectory=seen[-5:])

    def clopen(self, e: Clopen):
        return clopen_measure(self, e)


def cylinder_measure(sub_or_oracle, w: str):
    oracle = sub_or_oracle if isinstance(sub_or_oracle, LanguageOracle) else LanguageOracle(sub_or_oracle)
    return _measure_for(oracle)(w)


_MEASURES = {}
_MEASURES_LOCK = threading.Lock()


def _measure_for(oracle):
    with _MEASURES_LOCK:
        m = _MEASURES.get(oracle.sub)
        if m is None:
            m = _MEASURES[oracle.sub] = CylinderMeasure(oracle)
        return m


def measure_for(oracle: LanguageOracle) -> CylinderMeasure:
    """Shared measure object per substitution, so memo tables are reused."""
    return _measure_for(oracle)


def clopen_measure(m, e: Clopen):
    e = ClopenAlgebra(m.language).restrict(e)
    if e.contains_fixed_point():
        return INFINITE
    total = Fraction(0)
    for w in e.words:
        total += m(w)
    return total


# ---------------------------------------------------------------- pushforward


@dataclass
class ImageLanguage:
    """The language of a one-block factor of a substitution subshift."""

    source: LanguageOracle
    code: SubscriptMap

    @property
    def horizon(self):
        return self.source.horizon

    def factors(self, length):
        return frozenset(apply_code(self.code, w) for w in self.source.factors(length))

    def host(self, n):
        return apply_code(self.code, self.source.host(n))

    def contains(self, w):
        return w in self.factors(len(w))

    def __hash__(self):
        return hash((self.source, self.code))


class PushforwardMeasure:
    """nu([u]) = sum of mu([w]) over allowed w with f(w) = u."""

    def __init__(self, m: CylinderMeasure, f: SubscriptMap):
        source_letters = set(m.sub.letters)
        if {a for a, _ in f.mapping} != source_letters:
            raise InputError("code must be defined on the whole source alphabet")
        self.source, self.code = m, f
        self.language = ImageLanguage(m.oracle, f)
        self.algebra = ClopenAlgebra(self.language)
        self._memo = {}

    def preimages(self, u):
        return sorted(w for w in self.source.oracle.factors(len(u)) if apply_code(self.code, w) == u)

    def __call__(self, u):
        if u not in self._memo:
            if set(u) <= {ONE}:
                self._memo[u] = INFINITE
            else:
                total = Fraction(0)
                for w in self.preimages(u):
                    total += self.source(w)
                self._memo[u] = total
        return self._memo[u]

    def clopen(self, e: Clopen):
        return clopen_measure(self, e)


def pushforward(m: CylinderMeasure, f: SubscriptMap) -> PushforwardMeasure:
    return PushforwardMeasure(m, f)


def kolmogorov_defects(m, max_len: int):
    """Words w (|w| < max_len, finite measure) where mu[w] differs from
    the sum over right or left one-letter extensions. Empty when consistent."""
    lang = m.language
    bad = []
    for n in range(1, max_len):
        longer = lang.factors(n + 1)
        for w in sorted(lang.factors(n)):
            value = m(w)
            if value is INFINITE:
                if not any(m(x) is INFINITE for x in longer if x.startswith(w)):
                    bad.append((w, "right"))
                continue
            right = sum((m(x) for x in longer if x[:-1] == w), Fraction(0))
            left = sum((m(x) for x in longer if x[1:] == w), Fraction(0))
            if right != value:
                bad.append((w, "right"))
            if left != value:
                bad.append((w, "left"))
    return bad


# ------------------------------------------------------------------ Birkhoff


@dataclass
class BirkhoffReport:
    K: Clopen
    A: Clopen
    horizon: int
    eps: Fraction
    c: Fraction
    c_measure: Fraction
    m: int
    hits: int
    worst_by_hits: dict = field(repr=False)
    max_deviation: Fraction = Fraction(0)
    tail_bound: Fraction = Fraction(0)

    @property
    def consistent(self):
        return self.c == self.c_measure

    @property
    def found(self):
        return self.m <= self.hits

    @property
    def verdict(self):
        return "PASS" if self.consistent and self.found else "FAIL"


def indicator(host: str, e: Clopen, positions: range):
    """1 where the point shifted to position p lies in ``e``."""
    lo, hi, words = e.lo, e.hi, e.words
    return np.fromiter(((host[p + lo:p + hi + 1] in words) for p in positions),
                       dtype=np.int64, count=len(positions))


def birkhoff_certificate(m: CylinderMeasure, K: Clopen, A: Clopen, eps=Fraction(1, 16),
                         horizon: int = 14) -> BirkhoffReport:
    """Certify the ratio-ergodic behaviour of two-sided sums on one orbit piece.

    Every interval of positions in the padded word 1^P sigma^h(seed) 1^P is
    a section; for each number q of K-hits the largest deviation
    |S 1_A / S 1_K - c| is computed exactly. Intervals are grouped by the
    run of K-hits they contain, so only extremes of the running discrepancy
    between consecutive hits are needed.
    """
    eps = Fraction(eps)
    alg = ClopenAlgebra(m.oracle)
    K, A = alg.restrict(K), alg.restrict(A)
    if not K.words:
        raise InputError("K must be nonempty")
    if K.contains_fixed_point() or A.contains_fixed_point():
        raise InputError("K and A must be compact (avoid the fixed point)")
    c_measure = clopen_measure(m, A) / clopen_measure(m, K)
    ext = max(abs(K.lo), abs(K.hi), abs(A.lo), abs(A.hi)) + 1
    host = ONE * (2 * ext) + m.oracle.host(horizon) + ONE * (2 * ext)
    # every anchor whose window can touch a letter other than 1
    positions = range(ext, len(host) - ext)
    ind_k = indicator(host, K, positions)
    ind_a = indicator(host, A, positions)
    total_k, total_a = int(ind_k.sum()), int(ind_a.sum())
    c = Fraction(total_a, total_k)
    cp, cq = c.numerator, c.denominator
    n = len(ind_k)
    pk = np.concatenate(([0], np.cumsum(ind_k)))
    pa = np.concatenate(([0], np.cumsum(ind_a)))
    g = cq * pa - cp * pk
    hits = np.flatnonzero(ind_k)
    q_total = len(hits)
    bounds = np.concatenate(([-1], hits, [n]))
    starts = bounds[:-1] + 1
    mn = np.minimum.reduceat(g, starts)
    mx = np.maximum.reduceat(g, starts)
    # reduceat runs to the next start; the last segment ends at index n
    spread = int(g.max() - g.min())
    q_cut = min(q_total, spread * eps.denominator // (eps.numerator * cq)) if eps > 0 else q_total
    worst = {}
    for q in range(1, q_cut + 1):
        t = np.arange(0, q_total - q + 1)
        num = np.maximum(mx[t + q] - mn[t], mx[t] - mn[t + q])
        worst[q] = Fraction(int(num.max()), q * cq)
    failing = [q for q, d in worst.items() if d >= eps]
    m_found = max(failing) + 1 if failing else 1
    at_or_above = [d for q, d in worst.items() if q >= m_found]
    max_dev = max(at_or_above) if at_or_above else Fraction(0)
    tail = Fraction(spread, (q_cut + 1) * cq)
    return BirkhoffReport(K, A, horizon, eps, c, c_measure, m_found, q_total, worst,
                          max_dev, tail)


# -------------------------------------------------------------- product pair


class ProductMeasurePair:
    """Two invariant measures on the square of the subshift.

    ``product`` is mu x mu; ``diagonal`` is the graph measure
    A x B -> mu(A & B).
    """

    def __init__(self, m: CylinderMeasure):
        self.m = m
        self.algebra = ClopenAlgebra(m.oracle)

    def product(self, a: Clopen, b: Clopen):
        ma, mb = clopen_measure(self.m, a), clopen_measure(self.m, b)
        if ma is INFINITE or mb is INFINITE:
            return INFINITE if (ma != 0 and mb != 0) else Fraction(0)
        return ma * mb

    def diagonal(self, a: Clopen, b: Clopen):
        return clopen_measure(self.m, self.algebra.intersection(a, b))


def product_vs_diagonal(m: CylinderMeasure, a: Clopen, b: Clopen):
    pair = ProductMeasurePair(m)
    alg = pair.algebra
    if alg.contains_fixed_point(a) or alg.contains_fixed_point(b):
        raise InputError("rectangles must be compact")
    return pair.product(a, b), pair.diagonal(a, b)


def product_invariance_defects(m: CylinderMeasure, max_len: int = 3):
    """Compact rectangles [.u] x [.v] (|u|, |v| <= max_len) where either measure of
    the pair fails right-extension consistency or invariance under the product shift.

    Invariance is tested as nu([.u] x [.v]) = sum over letters a, b of
    nu([a.u] x [b.v]). Returns a list of (u, v, measure name, kind).
    """
    pair = ProductMeasurePair(m)
    lang = m.oracle
    letters = m.oracle.sub.letters
    words = [w for n in range(1, max_len + 1) for w in sorted(lang.factors(n)) if set(w) != {ONE}]
    bad = []
    for u in words:
        for v in words:
            for name, nu in (("product", pair.product), ("diagonal", pair.diagonal)):
                value = nu(Clopen(0, len(u) - 1, frozenset({u})), Clopen(0, len(v) - 1, frozenset({v})))
                right = sum((nu(Clopen(0, len(u), frozenset({u + a})),
                                Clopen(0, len(v), frozenset({v + b})))
                             for a in letters for b in letters), Fraction(0))
                left = sum((nu(Clopen(-1, len(u) - 1, frozenset({a + u})),
                               Clopen(-1, len(v) - 1, frozenset({b + v})))
                            for a in letters for b in letters), Fraction(0))
                if right != value:
                    bad.append((u, v, name, "extension"))
                if left != value:
                    bad.append((u, v, name, "shift"))
    return bad
