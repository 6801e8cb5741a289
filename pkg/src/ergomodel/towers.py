"""Return words and Kakutani-Rohlin towers built from them.

For a partition alpha with infinite atom label ``inf``, the alpha-coded
orbit is cut at the occurrences of ``inf^(2n)``. The piece between two
consecutive occurrences, trimmed by n on each side, is a return word. The
points whose alpha-name on [-n, |w|+n-1] reads ``inf^n w inf^n`` form the
base of the column of w, and level j of that column is the base shifted
forward j times. With the letter partition these are the classical
return words to 1^n.1^n and the towers P_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .clopen import Clopen, ClopenAlgebra
from .errors import InputError, NotKStandardError, ResourceError, StructuralError
from .partitions import (WindowPartition, join_many, label_key, letter_partition,
                         refinement_map, render_name, two_set_partition)
from .words import ONE, LanguageOracle

MAX_CERTIFY_DEPTH = 24


# ------------------------------------------------------------- return words


def _inf_runs(code, inf):
    """For each position, the number of consecutive infinite labels starting there."""
    flags = np.fromiter((x == inf for x in code), dtype=bool, count=len(code))
    run = np.zeros(len(code) + 1, dtype=np.int64)
    for i in range(len(code) - 1, -1, -1):
        run[i] = run[i + 1] + 1 if flags[i] else 0
    return run[:-1]


def _scan_returns(code, n, inf, host=None, width=1):
    """Return words of a coded word and, when ``host`` is given, their base words."""
    run = _inf_runs(code, inf)
    occ = np.flatnonzero(run >= 2 * n)
    words = {}
    for p, q in zip(occ[:-1].tolist(), occ[1:].tolist()):
        w = tuple(code[p + n:q + n])
        bases = words.setdefault(w, set())
        if host is not None:
            bases.add(host[p:q + 2 * n + width - 1])
    return words


def _column_key(name, inf):
    trivial = len(name) == 1 and name[0] == inf
    return (not trivial, len(name), tuple(label_key(x) for x in name))


@dataclass(frozen=True)
class ReturnWordSet:
    """Return words to inf^n.inf^n, trivial word first, then by (length, lex)."""

    n: int
    words: tuple
    depth: int = 0          # host depth at which the set was certified

    def __iter__(self):
        return iter(self.words)

    def __len__(self):
        return len(self.words)

    def __contains__(self, w):
        return w in self.words

    @property
    def nontrivial(self):
        return self.words[1:]


def _certified_returns(alpha: WindowPartition, n: int, with_bases: bool):
    lang = alpha.lang
    if n < 1:
        raise InputError("n must be a positive integer")
    pad = ONE * (2 * n + alpha.width + 1)
    start = lang.stabilization_depth(min(2 * n + alpha.width, lang.horizon))
    prev = None
    for depth in range(start, MAX_CERTIFY_DEPTH + 1):
        try:
            host = pad + lang.host(depth) + pad
        except ResourceError:
            break
        code = alpha.code(host)
        cur = _scan_returns(code, n, alpha.infinite, host if with_bases else None, alpha.width)
        if prev is not None and cur == prev:
            return cur, depth - 1
        prev = cur
    raise ResourceError(
        f"return words for n={n} were not certified below the host length cap",
        n=n, horizon=depth,
    )


def coded_return_words(alpha: WindowPartition, n: int) -> ReturnWordSet:
    """Return words of the alpha-coded subshift, as tuples of labels."""
    words, depth = _certified_returns(alpha, n, False)
    ordered = sorted(words, key=lambda w: _column_key(w, alpha.infinite))
    if len(ordered) < 2:
        raise StructuralError(f"only the trivial return word exists at n={n}; "
                              "the system is not almost minimal")
    return ReturnWordSet(n, tuple(ordered), depth)


def return_words(lang: LanguageOracle, n: int) -> ReturnWordSet:
    """Return words to 1^n.1^n as strings.

    >>> return_words(LanguageOracle(), 1).words
    ('1', '12121')
    """
    coded = coded_return_words(letter_partition(lang), n)
    return ReturnWordSet(n, tuple(render_name(w) for w in coded.words), coded.depth)


def decompose(w: Sequence, parts: ReturnWordSet) -> list:
    """The unique factorization of ``w`` into members of ``parts``.

    Every parse is enumerated; zero or several parses raise StructuralError.
    """
    w = tuple(w) if not isinstance(w, str) else w
    members = list(parts.words)
    # count[i] = number of parses of w[i:], capped at 2
    count = [0] * (len(w) + 1)
    count[len(w)] = 1
    choice = [None] * (len(w) + 1)
    for i in range(len(w) - 1, -1, -1):
        for u in members:
            if w[i:i + len(u)] == u and count[i + len(u)]:
                count[i] = min(2, count[i] + count[i + len(u)])
                choice[i] = u
    if count[0] == 0:
        raise StructuralError(f"{render_name(w) if not isinstance(w, str) else w} has no parse "
                              f"into return words of level {parts.n}")
    if count[0] > 1:
        raise StructuralError(f"{w} has more than one parse into return words of level {parts.n}")
    out, i = [], 0
    while i < len(w):
        out.append(choice[i])
        i += len(choice[i])
    return out


def min_nontrivial_weight(rw: ReturnWordSet, infinite=ONE) -> int:
    """Least number of letters other than the infinite one in a nontrivial return word."""
    if not rw.nontrivial:
        raise StructuralError("no nontrivial return word")
    return min(sum(1 for x in w if x != infinite) for w in rw.nontrivial)


# ---------------------------------------------------------------- towers


@dataclass(frozen=True)
class Column:
    name: tuple          # alpha-name of every fiber, equal to the return word
    base: Clopen
    infinite: bool = False

    @property
    def height(self):
        return len(self.name)

    def level(self, j) -> Clopen:
        if not 0 <= j < self.height:
            raise InputError(f"level {j} outside column of height {self.height}")
        return self.base.shifted(j)

    def levels(self):
        return [self.level(j) for j in range(self.height)]


@dataclass(frozen=True)
class HeightProfile:
    h: int
    h_K: int
    H_K: int


@dataclass
class KRTower:
    """Kakutani-Rohlin partition t_n(alpha): one column per return word."""

    n: int
    partition: WindowPartition
    columns: list
    depth: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def lang(self):
        return self.partition.lang

    @property
    def principal(self):
        return [c for c in self.columns if not c.infinite]

    @property
    def infinite_column(self):
        return next(c for c in self.columns if c.infinite)

    @property
    def max_height(self):
        return max(c.height for c in self.columns)

    def base(self) -> Clopen:
        return ClopenAlgebra(self.lang).union(*(c.base for c in self.columns))

    def levels(self):
        """``(column index, level index, clopen)`` in canonical order."""
        return [(ci, j, c.level(j)) for ci, c in enumerate(self.columns) for j in range(c.height)]

    def words(self):
        return [render_name(c.name) for c in self.columns]

    def window(self):
        lo = min(c.base.lo - c.height + 1 for c in self.columns)
        hi = max(c.base.hi for c in self.columns)
        return lo, hi

    def level_partition(self) -> WindowPartition:
        """Levels as atoms labelled by (column index, level index); (0, 0) is infinite.

        Raises StructuralError if the levels do not partition the space.
        """
        if "partition" in self._cache:
            return self._cache["partition"]
        lo, hi = self.window()
        labels = {}
        for ci, c in enumerate(self.columns):
            for j in range(c.height):
                lev = c.level(j)
                a, b = lev.lo - lo, lev.hi - lo + 1
                for u in self.lang.factors(hi - lo + 1):
                    if u[a:b] in lev.words:
                        if u in labels:
                            raise StructuralError(
                                f"levels {labels[u]} and {(ci, j)} of the n={self.n} tower overlap")
                        labels[u] = (ci, j)
        missing = self.lang.factors(hi - lo + 1) - labels.keys()
        if missing:
            raise StructuralError(f"the n={self.n} tower misses {len(missing)} words, "
                                  f"e.g. {min(missing)}")
        part = WindowPartition(self.lang, lo, hi, labels, (0, 0))
        self._cache["partition"] = part
        return part

    def check_partition(self) -> bool:
        self.level_partition()
        return True

    def k_hits(self, column: Column, K: Clopen) -> int:
        alg = ClopenAlgebra(self.lang)
        return sum(1 for lev in column.levels() if alg.subset(lev, K))

    def check_k_standard(self, K: Clopen):
        """K must be a union of principal levels; returns the K-hit count per column."""
        alg = ClopenAlgebra(self.lang)
        hits = []
        inf = self.infinite_column.level(0)
        if not alg.disjoint(inf, K):
            raise NotKStandardError("K meets the infinite level", level=(0, 0))
        covered = alg.empty()
        for ci, c in enumerate(self.columns):
            count = 0
            for j, lev in enumerate(c.levels()):
                inside = alg.subset(lev, K)
                if not inside and not alg.disjoint(lev, K):
                    raise NotKStandardError(
                        f"level {j} of column {render_name(c.name)} meets K without lying in it",
                        level=(ci, j))
                if inside:
                    count += 1
                    covered = alg.union(covered, lev)
            hits.append(count)
        if not alg.equal(covered, K):
            raise NotKStandardError("K is not covered by tower levels", level=None)
        return hits

    def profile(self, K: Clopen) -> HeightProfile:
        hits = self.check_k_standard(K)
        principal = [h for c, h in zip(self.columns, hits) if not c.infinite]
        return HeightProfile(min(c.height for c in self.principal), min(principal), max(principal))

    def to_json_obj(self, K: Clopen = None):
        hits = self.check_k_standard(K) if K is not None else None
        cols = []
        for ci, c in enumerate(self.columns):
            item = {"word": render_name(c.name), "height": c.height}
            if c.infinite:
                item["infinite"] = True
            elif hits is not None:
                item["k_hits"] = hits[ci]
            cols.append(item)
        return {"n": self.n, "columns": cols}


def pullback_tower(alpha: WindowPartition, n: int) -> KRTower:
    """The tower t_n(alpha) on the original space.

    Column bases are the alpha-preimages of the symbolic bases
    [inf^n . w inf^n]; each base is a clopen set at the window
    [-n + lo, |w| + n - 1 + hi] of alpha.
    """
    found, depth = _certified_returns(alpha, n, True)
    inf = alpha.infinite
    ordered = sorted(found, key=lambda w: _column_key(w, inf))
    if len(ordered) < 2:
        raise StructuralError(f"only the trivial return word exists at n={n}")
    columns = []
    for w in ordered:
        base = Clopen(-n + alpha.lo, len(w) + n - 1 + alpha.hi, frozenset(found[w]))
        columns.append(Column(w, base, infinite=(len(w) == 1 and w[0] == inf)))
    return KRTower(n, alpha, columns, depth)


def kr_tower(lang: LanguageOracle, n: int, K: Clopen = None):
    """The tower P_n built from return words to 1^n.1^n, with its height profile."""
    tower = pullback_tower(letter_partition(lang), n)
    if K is None:
        return tower, None
    return tower, tower.profile(K)


# ---------------------------------------------------------- refinement


def refinement_witness(fine: KRTower, coarse: KRTower, verify=True) -> dict:
    """Map each level (column, j) of ``fine`` to the level of ``coarse`` holding it.

    Works through the decomposition of fine return words into coarse ones;
    a level in factor u_t at offset j - |u_1...u_(t-1)| goes to that offset
    of the column of u_t. With ``verify`` every inclusion is checked.
    """
    if fine.partition != coarse.partition or fine.n != coarse.n + 1:
        return refinement_by_containment(fine, coarse)
    rw = ReturnWordSet(coarse.n, tuple(c.name for c in coarse.columns))
    index = {c.name: ci for ci, c in enumerate(coarse.columns)}
    alg = ClopenAlgebra(fine.lang)
    witness = {}
    for ci, c in enumerate(fine.columns):
        offset = 0
        for u in decompose(c.name, rw):
            for j in range(len(u)):
                witness[(ci, offset + j)] = (index[u], j)
            offset += len(u)
    if verify:
        for (ci, j), (di, k) in witness.items():
            if not alg.subset(fine.columns[ci].level(j), coarse.columns[di].level(k)):
                raise StructuralError(f"level {j} of fine column {ci} is not inside "
                                      f"level {k} of coarse column {di}")
    return witness


def refinement_by_containment(fine: KRTower, coarse: KRTower) -> dict:
    """Level map found by comparing both level partitions on a common window."""
    level_map = refinement_map(fine.level_partition(), coarse.level_partition())
    if level_map is None:
        raise StructuralError(f"some level of the n={fine.n} tower straddles two levels "
                              f"of the n={coarse.n} tower")
    return level_map


def base_inclusion(fine: KRTower, coarse: KRTower) -> bool:
    return ClopenAlgebra(fine.lang).subset(fine.base(), coarse.base())


# ------------------------------------------------------------ gamma sequence


@dataclass
class GammaSequence:
    """The partitions gamma_1 <= gamma_2 <= ... with common finite support K."""

    sets: list
    alphas: list
    towers: list
    gammas: list

    @property
    def support(self) -> Clopen:
        return self.gammas[0].support()


def _tower_atoms(tower: KRTower, inside: Clopen = None):
    """Tower levels relabelled 1 (infinite, plus anything outside) and 2, 3, ..."""
    alg = ClopenAlgebra(tower.lang)
    part = tower.level_partition()
    order = {}
    for ci, c in enumerate(tower.columns):
        for j in range(c.height):
            if c.infinite:
                continue
            if inside is not None and not alg.subset(c.level(j), inside):
                continue
            order[(ci, j)] = len(order) + 2
    return part.relabel(lambda lab: order.get(lab, 1))


def gamma_sequence(lang, D: Sequence[Clopen], i: int) -> GammaSequence:
    """Build gamma_1..gamma_i from the base sets D_1..D_i.

    alpha_j is the join of the two-set partitions {Z - D_l, D_l} for l <= j,
    t_j is the pullback tower t_j(alpha_j), gamma_1 is t_1 as a partition and
    gamma_j keeps the levels of t_j inside K = K_(gamma_1), merging the rest
    into the infinite atom.
    """
    if i < 1 or len(D) < i:
        raise InputError(f"need at least {i} base sets")
    alg = ClopenAlgebra(lang)
    twos = []
    for d in D[:i]:
        if alg.contains_fixed_point(d):
            raise InputError("base sets must avoid the fixed point")
        twos.append(two_set_partition(lang, d))
    alphas, towers, gammas = [], [], []
    K = None
    for j in range(1, i + 1):
        alpha = twos[0] if j == 1 else join_many(*twos[:j])
        tower = pullback_tower(alpha, j)
        gamma = _tower_atoms(tower, K)
        if K is None:
            K = gamma.support()
        elif not alg.equal(gamma.support(), K):
            raise StructuralError(f"levels of t_{j} do not split K into whole levels")
        alphas.append(alpha)
        towers.append(tower)
        gammas.append(gamma)
    return GammaSequence(list(D[:i]), alphas, towers, gammas)
