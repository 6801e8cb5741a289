"""Clopen partitions with a distinguished infinite atom.

A :class:`WindowPartition` labels every allowed word of a coordinate window
with an atom subscript. Subscripts are ints or (nested) tuples of ints, so
joins keep the product structure of their subscript sets. The atom holding
the all-1 word is the infinite atom; every other atom has finite measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .clopen import Clopen, ClopenAlgebra
from .errors import InputError, StructuralError
from .measures import INFINITE, clopen_measure
from .words import ONE


def label_key(label):
    """Total order on subscripts: ints before tuples, tuples elementwise."""
    if isinstance(label, tuple):
        return (1, tuple(label_key(x) for x in label))
    return (0, label)


def render_label(label):
    """Compact text form: ``2``, ``(2,3)``, ``((2,1),3,4)``."""
    if isinstance(label, tuple):
        return "(" + ",".join(render_label(x) for x in label) + ")"
    return str(label)


def render_name(name: Sequence):
    """A name of single-digit int labels prints as a plain word."""
    if all(isinstance(x, int) and 0 <= x <= 9 for x in name):
        return "".join(str(x) for x in name)
    return " ".join(render_label(x) for x in name)


def _label_json(label):
    return [_label_json(x) for x in label] if isinstance(label, tuple) else label


class WindowPartition:
    """Partition of the subshift read off the window ``[lo, hi]``.

    Parameters
    ----------
    lang : language object with ``factors(L)``
    lo, hi : int
        Coordinates inspected; a point lies in atom ``labels[x[lo..hi]]``.
    labels : mapping from allowed words to subscripts
    infinite : subscript of the infinite atom (the one holding 1^width)
    """

    def __init__(self, lang, lo: int, hi: int, labels: Mapping, infinite=None):
        self.lang, self.lo, self.hi = lang, lo, hi
        allowed = lang.factors(hi - lo + 1)
        self.labels = {w: l for w, l in labels.items() if w in allowed}
        missing = allowed - self.labels.keys()
        if missing:
            raise InputError(f"{len(missing)} allowed words have no atom, e.g. {min(missing)!r}")
        ones = ONE * (hi - lo + 1)
        self.infinite = self.labels[ones] if infinite is None else infinite
        if self.labels[ones] != self.infinite:
            raise InputError("the all-1 word must lie in the infinite atom")
        if len(set(self.labels.values())) < 2:
            raise InputError("a partition needs at least two atoms")

    # -- structure

    @property
    def width(self):
        return self.hi - self.lo + 1

    @property
    def subscripts(self):
        finite = sorted({l for l in self.labels.values() if l != self.infinite}, key=label_key)
        return [self.infinite] + finite

    @property
    def finite_subscripts(self):
        return self.subscripts[1:]

    def __len__(self):
        return len(self.subscripts)

    def atom(self, label) -> Clopen:
        return Clopen(self.lo, self.hi, frozenset(w for w, l in self.labels.items() if l == label))

    def support(self) -> Clopen:
        return Clopen(self.lo, self.hi,
                      frozenset(w for w, l in self.labels.items() if l != self.infinite))

    def lift(self, lo, hi) -> "WindowPartition":
        if lo > self.lo or hi < self.hi:
            raise InputError("lift target must contain the current window")
        a, b = self.lo - lo, self.hi - lo + 1
        return WindowPartition(self.lang, lo, hi,
                               {u: self.labels[u[a:b]] for u in self.lang.factors(hi - lo + 1)},
                               self.infinite)

    def relabel(self, mapping) -> "WindowPartition":
        """Apply a map on subscripts (need not be injective)."""
        return WindowPartition(self.lang, self.lo, self.hi,
                               {w: mapping(l) for w, l in self.labels.items()},
                               mapping(self.infinite))

    def shrink(self) -> "WindowPartition":
        """The same partition read off a window that cannot lose a coordinate at either end."""
        part = self
        while part.width > 1:
            for lo, hi, cut in ((part.lo + 1, part.hi, slice(1, None)),
                                (part.lo, part.hi - 1, slice(None, -1))):
                smaller = {}
                if all(smaller.setdefault(w[cut], l) == l for w, l in part.labels.items()):
                    part = WindowPartition(part.lang, lo, hi, smaller, part.infinite)
                    break
            else:
                break
        return part

    def canonical(self) -> "WindowPartition":
        """Shrunk window; infinite atom 1, finite atoms 2.. by their smallest word."""
        part = self.shrink()
        first = {}
        for w in sorted(part.labels):
            first.setdefault(part.labels[w], w)
        order = sorted((w, l) for l, w in first.items() if l != part.infinite)
        names = {l: i + 2 for i, (_, l) in enumerate(order)}
        names[part.infinite] = 1
        return part.relabel(names.__getitem__)

    def code(self, word: str) -> tuple:
        """The name of the positions whose whole window lies inside ``word``.

        Position ``p`` of the result corresponds to the letter at index
        ``p - lo`` of ``word``.
        """
        w = self.width
        labels = self.labels
        return tuple(labels[word[i:i + w]] for i in range(len(word) - w + 1))

    def name(self, point, lo: int, hi: int) -> tuple:
        """The name of ``point`` on coordinates lo..hi."""
        return self.code(point.window(lo + self.lo, hi + self.hi))

    def language(self, length: int) -> set:
        return {self.code(u) for u in self.lang.factors(length + self.width - 1)}

    def to_json_obj(self):
        return {
            "window": [self.lo, self.hi],
            "labels": {w: _label_json(self.labels[w]) for w in sorted(self.labels)},
        }

    def __eq__(self, other):
        return (isinstance(other, WindowPartition) and (self.lo, self.hi) == (other.lo, other.hi)
                and self.labels == other.labels and self.infinite == other.infinite)

    def __hash__(self):
        return hash((self.lo, self.hi, frozenset(self.labels.items())))

    def __repr__(self):
        return f"WindowPartition([{self.lo},{self.hi}], {len(self)} atoms)"


def letter_partition(lang, alphabet_size=None) -> WindowPartition:
    """The partition by the letter at coordinate 0."""
    return WindowPartition(lang, 0, 0, {a: int(a) for a in lang.factors(1)}, 1)


def from_atoms(lang, atoms, infinite) -> WindowPartition:
    """Build a partition from ``(label, Clopen)`` pairs covering the space."""
    alg = ClopenAlgebra(lang)
    sets = alg.align(*[c for _, c in atoms])
    lo, hi = sets[0].lo, sets[0].hi
    labels = {}
    for (label, _), c in zip(atoms, sets):
        for w in c.words:
            if w in labels and labels[w] != label:
                raise InputError(f"atoms {render_label(labels[w])} and {render_label(label)} overlap")
            labels[w] = label
    return WindowPartition(lang, lo, hi, labels, infinite)


def two_set_partition(lang, e: Clopen) -> WindowPartition:
    """{complement of E, E} with E as atom 2; E must avoid the fixed point."""
    alg = ClopenAlgebra(lang)
    if alg.contains_fixed_point(e):
        raise InputError("the finite atom must avoid the fixed point")
    return from_atoms(lang, [(1, alg.complement(e)), (2, e)], 1)


def common_window(*parts: WindowPartition):
    return min(p.lo for p in parts), max(p.hi for p in parts)


def join(alpha: WindowPartition, beta: WindowPartition) -> WindowPartition:
    """Atoms A & B labelled by the pair of subscripts; empty pairs dropped."""
    lo, hi = common_window(alpha, beta)
    a, b = alpha.lift(lo, hi), beta.lift(lo, hi)
    return WindowPartition(alpha.lang, lo, hi,
                           {w: (a.labels[w], b.labels[w]) for w in a.labels},
                           (alpha.infinite, beta.infinite))


def join_many(*parts: WindowPartition) -> WindowPartition:
    """Join with flat tuple subscripts (one coordinate per factor)."""
    lo, hi = common_window(*parts)
    lifted = [p.lift(lo, hi) for p in parts]
    return WindowPartition(parts[0].lang, lo, hi,
                           {w: tuple(p.labels[w] for p in lifted) for w in lifted[0].labels},
                           tuple(p.infinite for p in parts))


def iterated_join(alpha: WindowPartition, l: int, k: int) -> WindowPartition:
    """T^-l alpha v ... v T^-k alpha, subscripts are the (k-l+1)-blocks of names."""
    if l > k:
        raise InputError("need l <= k")
    if l == k == 0:
        return alpha
    lo, hi = alpha.lo + l, alpha.hi + k
    w = alpha.width
    labels = {u: tuple(alpha.labels[u[i:i + w]] for i in range(k - l + 1))
              for u in alpha.lang.factors(hi - lo + 1)}
    return WindowPartition(alpha.lang, lo, hi, labels, (alpha.infinite,) * (k - l + 1))


def refinement_map(fine: WindowPartition, coarse: WindowPartition):
    """The subscript map f with fine atom i inside coarse atom f(i), or None."""
    lo, hi = common_window(fine, coarse)
    f, c = fine.lift(lo, hi), coarse.lift(lo, hi)
    out = {}
    for w, l in f.labels.items():
        if out.setdefault(l, c.labels[w]) != c.labels[w]:
            return None
    return out


def refines(fine, coarse) -> bool:
    return refinement_map(fine, coarse) is not None


def distance(alpha: WindowPartition, beta: WindowPartition, m) -> Fraction:
    """Sum over finite subscripts of the measure of A_i symmetric-difference B_i."""
    if set(alpha.finite_subscripts) != set(beta.finite_subscripts):
        raise InputError("partitions have different subscript sets")
    lo, hi = common_window(alpha, beta)
    a, b = alpha.lift(lo, hi), beta.lift(lo, hi)
    total = Fraction(0)
    for w in a.labels:
        la, lb = a.labels[w], b.labels[w]
        if la != lb:
            # w sits in A_la \ B_la and in B_lb \ A_lb
            weight = m(w)
            if weight is INFINITE:
                raise StructuralError("infinite atoms of the two partitions differ")
            total += weight * ((la != alpha.infinite) + (lb != beta.infinite))
    return total


@dataclass
class BlockDistanceBound:
    lhs: Fraction
    rhs: Fraction
    verdict: str
    note: str = ""


def block_distance_bound(alpha, beta, k, m) -> BlockDistanceBound:
    """d of the (2k-1)-block partitions against (2k-1) * #blocks * d(alpha, beta)."""
    a_blocks = iterated_join(alpha, -k + 1, k - 1)
    b_blocks = iterated_join(beta, -k + 1, k - 1)
    if set(a_blocks.finite_subscripts) != set(b_blocks.finite_subscripts):
        return BlockDistanceBound(None, None, "SKIP", "block subscript sets differ")
    lhs = distance(a_blocks, b_blocks, m)
    rhs = (2 * k - 1) * len(a_blocks) * distance(alpha, beta, m)
    return BlockDistanceBound(lhs, rhs, "PASS" if lhs <= rhs else "FAIL")


# ------------------------------------------------------------ approximation


@dataclass
class Approximation:
    terms: list          # (translate k, subscript) pairs, F = union of T^k A_l
    F: Clopen
    error: Fraction
    eps: Fraction

    @property
    def ok(self):
        return self.error <= self.eps


def alpha_T_approx(e: Clopen, alpha: WindowPartition, eps, m, bound: int = 32) -> Approximation:
    """Cover E by disjoint translates T^k A_l of distinct finite atoms.

    Translates are tried in order of |k| (then k, then subscript) and kept
    greedily when they fit inside E and miss what is already chosen, so an
    exact decomposition at the smallest shift is found first.
    """
    alg = ClopenAlgebra(alpha.lang)
    e = alg.restrict(e)
    if e.contains_fixed_point():
        raise InputError("E must be compact")
    target = clopen_measure(m, e)
    chosen, used = [], set()
    covered = alg.empty()
    shifts = sorted(range(-bound, bound + 1), key=lambda k: (abs(k), k))
    atoms = {l: alpha.atom(l) for l in alpha.finite_subscripts}
    for k in shifts:
        for l in alpha.finite_subscripts:
            if l in used:
                continue
            piece = atoms[l].shifted(k)
            if alg.subset(piece, e) and alg.disjoint(piece, covered):
                chosen.append((k, l))
                used.add(l)
                covered = alg.union(covered, piece)
        if clopen_measure(m, covered) == target:
            break
    error = target - clopen_measure(m, covered)
    return Approximation(chosen, covered, error, Fraction(eps))


# ------------------------------------------------------ empirical statistics


def _as_name(name):
    return tuple(int(c) for c in name) if isinstance(name, str) else tuple(name)


@dataclass
class BlockDistribution:
    k: int
    frequencies: dict
    denominator: int

    def deviation(self, reference: Mapping):
        """Largest |empirical - reference| with its block word."""
        keys = sorted(set(reference) | set(self.frequencies), key=label_key)
        worst, arg = Fraction(0), None
        for v in keys:
            d = abs(self.frequencies.get(v, Fraction(0)) - reference.get(v, Fraction(0)))
            if d > worst:
                worst, arg = d, v
        return worst, arg


def block_empirical(name, k: int, infinite=1, include_last: bool = False) -> BlockDistribution:
    """Frequencies of (2k-1)-blocks centred at positions 1 <= j < |w|.

    Blocks cut off by either end of the name are not counted; the
    denominator counts positions j in the same range with w_j != infinite.
    ``include_last`` extends the range to j = |w|.
    """
    w = _as_name(name)
    stop = len(w) if include_last else len(w) - 1
    denom = sum(1 for j in range(stop) if w[j] != infinite)
    if denom == 0:
        raise InputError("section has no point in the finite support")
    counts = {}
    for j in range(k - 1, min(stop, len(w) - k + 1)):
        v = w[j - k + 1:j + k]
        if any(x != infinite for x in v):
            counts[v] = counts.get(v, 0) + 1
    return BlockDistribution(k, {v: Fraction(c, denom) for v, c in counts.items()}, denom)


def reference_distribution(alpha: WindowPartition, k: int, m) -> dict:
    """mu(block atom v) / mu(K_alpha) for every finite (2k-1)-block v."""
    k_measure = clopen_measure(m, alpha.support())
    out = {}
    for u in alpha.lang.factors(alpha.width + 2 * k - 2):
        v = alpha.code(u)
        if all(x == alpha.infinite for x in v):
            continue
        out[v] = out.get(v, Fraction(0)) + m(u)
    return {v: x / k_measure for v, x in out.items()}


@dataclass
class UniformityCertificate:
    H: int
    k: int
    eps: Fraction
    verdict: str
    worst: Fraction
    witness: object = None      # (section index or (start, length), block word)
    sections: int = 0


def uniformity_check(names, H: int, k: int, eps, reference: Mapping, infinite=1,
                     include_last=False) -> UniformityCertificate:
    """PASS iff every section with >= H finite-support points is within eps."""
    eps = Fraction(eps)
    worst, witness, scanned = Fraction(-1), None, 0
    for idx, name in enumerate(names):
        name = _as_name(name)
        if sum(1 for x in name if x != infinite) < H:
            continue
        scanned += 1
        dev, v = block_empirical(name, k, infinite, include_last).deviation(reference)
        if dev > worst:
            worst, witness = dev, (idx, v)
    worst = max(worst, Fraction(0))
    verdict = "PASS" if worst < eps else "FAIL"
    return UniformityCertificate(H, k, eps, verdict, worst, witness, scanned)


@dataclass
class WindowScan:
    """Worst deviation of the scanned sections of a coded word, by K-count."""

    k: int
    worst: dict          # K-count -> worst deviation (Fraction)
    witness: dict = field(default_factory=dict)   # K-count -> (start, length, block)
    sections: int = 0

    def smallest_passing(self, eps):
        """Smallest H with every section of >= H K-points within eps.

        None when even the sections with the largest K-count fail.
        """
        eps = Fraction(eps)
        failing = [c for c, d in self.worst.items() if d >= eps]
        if not failing:
            return 1
        top = max(failing)
        return top + 1 if top < max(self.worst) else None

    def worst_at_or_above(self, h):
        """(deviation, K-count) of the worst section with at least h K-points."""
        vals = [(d, -c) for c, d in self.worst.items() if c >= h]
        if not vals:
            return Fraction(0), None
        d, c = max(vals)
        return d, -c


class _SectionScanner:
    """Exact block deviations of sections [s, e] of a coded word via prefix sums."""

    def __init__(self, code, k, reference, infinite, include_last):
        code = list(code)
        n = len(code)
        self.n, self.k, self.last = n, k, 0 if include_last else 1
        self.keys = sorted(reference, key=label_key)
        index = {v: i for i, v in enumerate(self.keys)}
        ids = np.full(n, -1, dtype=np.int64)
        for p in range(k - 1, n - k + 1):
            v = tuple(code[p - k + 1:p + k])
            if v in index:
                ids[p] = index[v]
            elif any(x != infinite for x in v):
                raise StructuralError(f"block {render_name(v)} is outside the reference support")
        in_k = np.array([x != infinite for x in code], dtype=np.int64)
        self.pk = np.concatenate(([0], np.cumsum(in_k)))
        refs = [Fraction(reference[v]) for v in self.keys]
        self.scale = 1
        for r in refs:
            self.scale = self.scale * r.denominator // math.gcd(self.scale, r.denominator)
        self.ref_num = [int(r * self.scale) for r in refs]
        self.pv = [np.concatenate(([0], np.cumsum(ids == i))) for i in range(len(self.keys))]
        self.worst, self.witness, self.count = {}, {}, 0

    def feed(self, s, e):
        """Scan the sections [s[t], e[t]] (arrays of equal length)."""
        k, last = self.k, self.last
        cnt = self.pk[e + 1 - last] - self.pk[s]
        lo_p = s + k - 1
        hi_p = np.minimum(e - k + 1, e - last)
        valid = hi_p >= lo_p
        best = np.zeros(len(s), dtype=np.int64)
        arg = np.zeros(len(s), dtype=np.int64)
        for i, pv in enumerate(self.pv):
            cv = np.where(valid, pv[np.maximum(hi_p + 1, 0)] - pv[np.clip(lo_p, 0, self.n)], 0)
            dev = np.abs(cv * self.scale - self.ref_num[i] * cnt)
            better = dev > best
            best = np.where(better, dev, best)
            arg = np.where(better, i, arg)
        mask = cnt >= 1
        self.count += int(mask.sum())
        if not mask.any():
            return
        cs, bs, ss, es, vs = cnt[mask], best[mask], s[mask], e[mask], arg[mask]
        # per K-count keep the largest deviation, ties to the earliest start
        order = np.lexsort((ss, -bs, cs))
        cs, bs, ss, es, vs = cs[order], bs[order], ss[order], es[order], vs[order]
        first = np.concatenate(([True], cs[1:] != cs[:-1]))
        for c, b, st, en, v in zip(cs[first].tolist(), bs[first].tolist(), ss[first].tolist(),
                                   es[first].tolist(), vs[first].tolist()):
            if c not in self.worst or b > self.worst[c]:
                self.worst[c] = b
                self.witness[c] = (st, en - st + 1, self.keys[v] if b else None)

    def result(self):
        worst = {c: Fraction(b, c * self.scale) for c, b in sorted(self.worst.items())}
        return WindowScan(self.k, worst, dict(sorted(self.witness.items())), self.count)


def scan_windows(code: Sequence, k: int, reference: Mapping, infinite=1,
                 include_last=False) -> WindowScan:
    """Exact deviations of every contiguous section of ``code`` of length >= 2."""
    sc = _SectionScanner(code, k, reference, infinite, include_last)
    for length in range(2, sc.n + 1):
        s = np.arange(0, sc.n - length + 1)
        sc.feed(s, s + length - 1)
    return sc.result()


def scan_sections(code: Sequence, cuts: Sequence[int], k: int, reference: Mapping, infinite=1,
                  include_last=False) -> WindowScan:
    """Deviations of the sections code[cuts[a]:cuts[b]] for all a < b."""
    sc = _SectionScanner(code, k, reference, infinite, include_last)
    cuts = np.asarray(sorted(cuts), dtype=np.int64)
    for gap in range(1, len(cuts)):
        s = cuts[:-gap]
        sc.feed(s, cuts[gap:] - 1)
    return sc.result()


def empirical_N(scan: WindowScan, eps):
    return scan.smallest_passing(eps)
