"""Stage-by-stage construction of the triangular array of partitions.

Stage i pulls the partition gamma_i of the factor back to beta_i, builds
tau_i = {outside K, E_i, K - E_i}, joins it with the previous diagonal
partition and beta_i, and chooses n_i and delta_i by exact inequalities.
A pullback tower is grown until the fibers whose block distribution is
within delta_i of the reference cover all but delta_i of K; bad fibers
get the name of a good fiber in their column. The result is alpha_(i,i);
the lower partitions alpha_(i,j) are coordinate projections of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .clopen import Clopen, ClopenAlgebra, parse_union
from .errors import InputError, ResourceError, StructuralError
from .measures import INFINITE, clopen_measure, measure_for
from .partitions import (WindowPartition, alpha_T_approx, block_empirical, distance,
                         from_atoms, iterated_join, join, join_many, label_key,
                         reference_distribution, refinement_map, render_label, render_name,
                         scan_sections, scan_windows)
from .subshift import CompactSupport, FixedPoint, Generated, SubscriptMap
from .towers import KRTower, gamma_sequence, pullback_tower, refinement_by_containment
from .words import DEFAULT, ONE, LanguageOracle, Substitution

DEFAULT_E = ("2", "212", "2")


# ------------------------------------------------------------- parameters


def dyadic_below(bound: Fraction) -> Fraction:
    """The largest 2^-e strictly below ``bound`` (bound > 0)."""
    bound = Fraction(bound)
    if bound <= 0:
        raise InputError("bound must be positive")
    e = 0
    while Fraction(1, 2**e) >= bound:
        e += 1
    return Fraction(1, 2**e)


def choose_parameters(min_ratio, k_measure, stage: int, n_prev: int = 0, r: int = 1):
    """The minimal n_i and the maximal dyadic delta_i of a stage.

    n_i is the least integer above ``n_prev`` with 1/2^n < min_ratio / 3.
    At stage 1, delta < min(1/(4 2^n), mu(K)/(4 2^n), 1/8); at stage i >= 2,
    delta < min(1/(12 2^n r^7), mu(K)/(12 2^n r^7), 1/2^(i+2)).

    >>> choose_parameters(Fraction(1, 2), Fraction(1), 1)
    (3, Fraction(1, 64))
    """
    min_ratio, k_measure = Fraction(min_ratio), Fraction(k_measure)
    if min_ratio <= 0:
        raise StructuralError("a finite atom has zero frequency")
    n = n_prev + 1
    while Fraction(1, 2**n) >= min_ratio / 3:
        n += 1
    if stage == 1:
        scale = 4 * 2**n
        bound = min(Fraction(1, scale), k_measure / scale, Fraction(1, 8))
    else:
        scale = 12 * 2**n * r**7
        bound = min(Fraction(1, scale), k_measure / scale, Fraction(1, 2**(stage + 2)))
    return n, dyadic_below(bound)


def approximation_target(i: int, j: int) -> Fraction:
    """eps_(i,j) = 2^-j - 2^-(i+1)."""
    return Fraction(1, 2**j) - Fraction(1, 2**(i + 1))


# ------------------------------------------------------------- configuration


@dataclass
class BuildConfig:
    """Inputs of a run.

    ``source`` generates the system being modelled, ``factor`` the system
    carrying the gamma partitions, and ``code`` the one-block factor map
    from the first onto the second.
    """

    stages: int = 3
    source: Substitution = DEFAULT
    factor: Substitution = None
    code: SubscriptMap = None
    E: tuple = DEFAULT_E            # cylinder strings on the source
    D: tuple = None                 # cylinder strings on the factor (default: E)
    max_tower_n: int = 48
    scan_depth: int = 8             # host depth for the informational window scans
    scan_limit: int = 1200          # longest coded host scanned window by window
    triangle_radius: int = 8
    horizon: int = 4096
    include_last: bool = False

    def __post_init__(self):
        if self.stages < 1:
            raise InputError("stage count must be at least 1")
        if self.factor is None:
            self.factor = self.source
        if self.code is None:
            if self.factor != self.source:
                raise InputError("a factor system needs a letter code")
            self.code = SubscriptMap.identity(self.source.alphabet_size)
        if self.D is None:
            self.D = tuple(self.E)
        if not self.E or not self.D:
            raise InputError("E and D must be nonempty")

    def E_set(self, i, lang=None):
        return parse_union(self.E[(i - 1) % len(self.E)], lang)

    def D_sets(self, count, lang=None):
        return [parse_union(self.D[(i - 1) % len(self.D)], lang) for i in range(1, count + 1)]

    def to_json_obj(self):
        return {
            "stages": self.stages,
            "source": self.source.to_json_obj(),
            "factor": self.factor.to_json_obj(),
            "code": ",".join(f"{a}:{b}" for a, b in self.code.mapping),
            "E": list(self.E),
            "D": list(self.D),
            "max_tower_n": self.max_tower_n,
            "scan_depth": self.scan_depth,
            "scan_limit": self.scan_limit,
            "triangle_radius": self.triangle_radius,
            "include_last": self.include_last,
        }

    @classmethod
    def from_json_obj(cls, obj):
        obj = dict(obj)
        try:
            if "source" in obj:
                obj["source"] = Substitution.from_json(obj["source"])
            if "factor" in obj:
                obj["factor"] = Substitution.from_json(obj["factor"])
            if "code" in obj and isinstance(obj["code"], str):
                obj["code"] = SubscriptMap.parse(obj["code"])
            for key in ("E", "D"):
                if key in obj:
                    obj[key] = tuple(str(x) for x in obj[key])
            return cls(**obj)
        except TypeError as exc:
            raise InputError(f"bad build config: {exc}") from None


# ------------------------------------------------------------------ fibers


@dataclass
class FiberClass:
    name: tuple
    measure: Fraction       # measure of the set of base points with this name
    deviation: Fraction
    good: bool


@dataclass
class ColumnFibers:
    index: int
    column_name: tuple
    k_hits: int
    classes: list

    @property
    def has_good(self):
        return any(f.good for f in self.classes)


def fiber_classes(tower: KRTower, column_index: int, part: WindowPartition, m):
    """Distinct ``part``-names along a column, with the measure of their base points."""
    col = tower.columns[column_index]
    h = col.height
    lo = min(col.base.lo, part.lo)
    hi = max(col.base.hi, h - 1 + part.hi)
    alg = ClopenAlgebra(tower.lang)
    base = alg.lift(col.base, lo, hi)
    a, b = part.lo - lo, h - 1 + part.hi - lo + 1
    out = {}
    for u in base.words:
        name = part.code(u[a:b])
        out[name] = out.get(name, Fraction(0)) + m(u)
    return out


def classify_fibers(tower: KRTower, part: WindowPartition, k: int, delta, m,
                    include_last=False, reference=None):
    """Good/bad labelling of the fibers of every principal column."""
    delta = Fraction(delta)
    if reference is None:
        reference = reference_distribution(part, k, m)
    out = []
    for ci, col in enumerate(tower.columns):
        if col.infinite:
            continue
        classes = []
        for name, q in sorted(fiber_classes(tower, ci, part, m).items(),
                              key=lambda kv: tuple(label_key(x) for x in kv[0])):
            dev, _ = block_empirical(name, k, part.infinite, include_last).deviation(reference)
            classes.append(FiberClass(name, q, dev, dev < delta))
        hits = sum(1 for x in classes[0].name if x != part.infinite)
        out.append(ColumnFibers(ci, col.name, hits, classes))
    return out


def coverage(columns: Sequence[ColumnFibers]) -> Fraction:
    """Measure of K covered by good fibers."""
    return sum((f.measure * c.k_hits for c in columns for f in c.classes if f.good), Fraction(0))


def bad_measure(columns: Sequence[ColumnFibers]) -> Fraction:
    """mu(R): K inside principal columns with no good fiber."""
    return sum((f.measure * c.k_hits for c in columns if not c.has_good for f in c.classes),
               Fraction(0))


# ------------------------------------------------------------------ copying


@dataclass
class CopyEntry:
    column: int
    chosen: tuple
    overwritten: list
    changed: Fraction


@dataclass
class CopyLog:
    entries: list = field(default_factory=list)

    @property
    def changed(self):
        return sum((e.changed for e in self.entries), Fraction(0))

    def to_json_obj(self):
        return [{"column": e.column, "chosen": render_name(e.chosen),
                 "overwritten": [render_name(n) for n in e.overwritten],
                 "changed": str(e.changed)} for e in self.entries]


def copy_names(tower: KRTower, columns: Sequence[ColumnFibers], part: WindowPartition,
               beta_part=None):
    """Overwrite bad fibers with the name of a good fiber of the same column.

    The chosen good fiber is the one with the smallest deviation, ties to
    the largest measure and then the smallest name. Returns the new
    partition and the log; with nothing to copy the partition is ``part``.
    """
    plan = {}
    log = CopyLog()
    for col in columns:
        good = [f for f in col.classes if f.good]
        bad = [f for f in col.classes if not f.good]
        if not good or not bad:
            continue
        pick = min(good, key=lambda f: (f.deviation, -f.measure,
                                        tuple(label_key(x) for x in f.name)))
        changed = Fraction(0)
        for f in bad:
            diff = sum(1 for x, y in zip(f.name, pick.name) if x != y)
            changed += f.measure * diff
            if beta_part is not None:
                for x, y in zip(f.name, pick.name):
                    if x[-1] != y[-1]:
                        raise StructuralError("copying would change a beta-name")
        plan[col.index] = (pick.name, {f.name for f in bad})
        log.entries.append(CopyEntry(col.index, pick.name, [f.name for f in bad], changed))
    if not plan:
        return part, log
    levels = tower.level_partition()
    h_max = tower.max_height
    lo = min(levels.lo, part.lo - h_max + 1)
    hi = max(levels.hi, part.hi + h_max - 1)
    lev = levels.lift(lo, hi)
    labels = {}
    for u in tower.lang.factors(hi - lo + 1):
        ci, j = lev.labels[u]
        here = part.labels[u[part.lo - lo:part.hi - lo + 1]]
        if ci in plan:
            h = tower.columns[ci].height
            a = part.lo - j - lo
            b = h - 1 - j + part.hi - lo + 1
            name = part.code(u[a:b])
            chosen, bad = plan[ci]
            if name in bad:
                here = chosen[j]
        labels[u] = here
    new = WindowPartition(part.lang, lo, hi, labels, part.infinite)
    if set(new.finite_subscripts) != set(part.finite_subscripts):
        raise StructuralError("copying lost a subscript; delta must shrink")
    return new.shrink(), log


def derive_lower(alpha: WindowPartition, steps: int) -> WindowPartition:
    """Project onto the first subscript coordinate ``steps`` times."""
    for _ in range(steps):
        alpha = alpha.relabel(lambda l: l[0]).shrink()
    return alpha


def pull_back(gamma: WindowPartition, code: SubscriptMap, lang) -> WindowPartition:
    """pi^-1 gamma on the source language."""
    from .subshift import apply_code
    labels = {u: gamma.labels[apply_code(code, u)] for u in lang.factors(gamma.width)}
    return WindowPartition(lang, gamma.lo, gamma.hi, labels, gamma.infinite)


# ------------------------------------------------------- uniformity bounds


@dataclass
class ProofBound:
    eps_table: dict           # m -> eps_m
    m0: int | None
    M: int | None
    N_prime: int | None
    target: Fraction
    max_fiber_dev: Fraction

    @property
    def computable(self):
        return self.M is not None


def eps_m(m: int, max_hits: int, min_hits: int) -> Fraction:
    return Fraction(4, m - 2) * Fraction(max_hits, min_hits)


def proof_bound_M(good_hits: Sequence[int], max_fiber_dev, delta, n_i: int,
                  m_limit: int = 10**7) -> ProofBound:
    """The conservative section length M_1 and the derived N_1'.

    m0 is the least m >= 3 with eps_m < delta - max deviation of good fibers,
    M = m0 * max #(F & K) and N' = ceil(M / (1 - 1/(4 2^n))).
    """
    if not good_hits:
        raise InputError("need at least one good fiber")
    hi, lo = max(good_hits), min(good_hits)
    target = Fraction(delta) - Fraction(max_fiber_dev)
    table = {m: eps_m(m, hi, lo) for m in range(3, 11)}
    if target <= 0:
        return ProofBound(table, None, None, None, target, Fraction(max_fiber_dev))
    # eps_m < target  <=>  m > 2 + 4 hi / (lo target)
    m0 = max(3, math.floor(2 + Fraction(4 * hi, lo) / target) + 1)
    if m0 > m_limit:
        return ProofBound(table, None, None, None, target, Fraction(max_fiber_dev))
    table[m0] = eps_m(m0, hi, lo)
    M = m0 * hi
    shrink = 1 - Fraction(1, 4 * 2**n_i)
    N_prime = math.ceil(Fraction(M) / shrink)
    return ProofBound(table, m0, M, N_prime, target, Fraction(max_fiber_dev))


def mediant_holds(a: Sequence[Fraction], b: Sequence[Fraction]) -> bool:
    """min a_i/b_i <= sum a / sum b <= max a_i/b_i for positive entries."""
    ratios = [Fraction(x) / Fraction(y) for x, y in zip(a, b)]
    total = Fraction(sum(a, Fraction(0))) / Fraction(sum(b, Fraction(0)))
    return min(ratios) <= total <= max(ratios)


# ------------------------------------------------------------------ state


@dataclass
class LedgerEntry:
    stage: int
    prop: str
    verdict: str
    detail: dict

    def to_json_obj(self):
        return {"stage": self.stage, "property": self.prop, "verdict": self.verdict,
                "detail": self.detail}


@dataclass
class StageRecord:
    i: int
    n: int
    delta: Fraction
    r: int
    min_ratio: Fraction
    tower_n: int
    coverage: Fraction
    bad_measure: Fraction
    N: int
    copy_log: CopyLog
    copy_distance: Fraction
    h_K: int
    H_K: int
    eps_uniform: Fraction
    window_scan: dict = field(default_factory=dict)

    def to_json_obj(self):
        return {
            "stage": self.i, "n": self.n, "delta": str(self.delta), "r": self.r,
            "min_ratio": str(self.min_ratio), "tower_n": self.tower_n,
            "coverage": str(self.coverage), "bad_measure": str(self.bad_measure),
            "N": self.N, "h_K": self.h_K, "H_K": self.H_K,
            "eps_uniform": str(self.eps_uniform),
            "copy_distance": str(self.copy_distance),
            "copy_changed": str(self.copy_log.changed),
            "copy_log": self.copy_log.to_json_obj(),
            "window_scan": self.window_scan,
        }


@dataclass
class StageState:
    config: BuildConfig
    lang: LanguageOracle
    factor_lang: LanguageOracle
    K: Clopen
    k_measure: Fraction
    gammas: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    taus: list = field(default_factory=list)
    joins: list = field(default_factory=list)
    towers: list = field(default_factory=list)
    alpha: dict = field(default_factory=dict)      # (i, j) -> partition
    records: list = field(default_factory=list)
    ledger: list = field(default_factory=list)
    proof_bound: ProofBound = None
    gamma_towers: list = field(default_factory=list)
    window_scan_stage1: object = None

    def check(self, stage, prop, ok, **detail):
        self.ledger.append(LedgerEntry(stage, prop, "PASS" if ok else "FAIL", detail))
        return ok

    @property
    def passed(self):
        return all(e.verdict == "PASS" for e in self.ledger)

    def failures(self):
        return [e for e in self.ledger if e.verdict != "PASS"]

    def to_json_obj(self):
        return {
            "config": self.config.to_json_obj(),
            "K": self.K.describe(),
            "mu_K": str(self.k_measure),
            "stages": [r.to_json_obj() for r in self.records],
            "alpha_sizes": {f"{i},{j}": len(a) for (i, j), a in sorted(self.alpha.items())},
            "proof_bound": None if self.proof_bound is None else {
                "m0": self.proof_bound.m0, "M": self.proof_bound.M,
                "N_prime": self.proof_bound.N_prime, "target": str(self.proof_bound.target),
            },
            "ledger": [e.to_json_obj() for e in self.ledger],
            "verdict": "PASS" if self.passed else "FAIL",
        }


class LedgerFailure(StructuralError):
    """A construction property failed; ``state`` holds the partial run."""

    def __init__(self, message, state):
        super().__init__(message)
        self.state = state


# ------------------------------------------------------------------ stages


def tau_partition(lang, K: Clopen, E: Clopen) -> WindowPartition:
    """{outside K, E, K - E}; E must lie inside K."""
    alg = ClopenAlgebra(lang)
    if not alg.subset(E, K):
        raise InputError(f"E = {E.describe()} must lie inside the finite support")
    if alg.is_empty(E):
        raise InputError("E must be nonempty")
    atoms = [(1, alg.complement(K)), (2, E)]
    rest = alg.difference(K, E)
    if not alg.is_empty(rest):
        atoms.append((3, rest))
    return from_atoms(lang, atoms, 1)


def host_code(part: WindowPartition, depth: int):
    """The part-coded padded host 1^P sigma^depth(seed) 1^P, and its padding."""
    pad = ONE * (part.width + 2)
    host = pad + part.lang.host(depth) + pad
    return part.code(host), host


def fiber_cuts(tower: KRTower, host: str, offset: int, length: int):
    """Code positions where a principal fiber of ``tower`` begins.

    Position p of a code of ``length`` positions is the point at host
    index p + offset. Sections cut at these positions are unions of whole
    fibers (the infinite column carries no K-points, so its one-point
    fibers are absorbed into their neighbours).
    """
    base = ClopenAlgebra(tower.lang).union(*(c.base for c in tower.principal))
    cuts = []
    for p in range(max(0, -offset - base.lo), min(length, len(host) - base.hi - offset)):
        x = p + offset
        if host[x + base.lo:x + base.hi + 1] in base.words:
            cuts.append(p)
    return cuts


def _grow_tower(state, i, beta, J, k, delta, min_hits, m, start_n):
    """Smallest n >= start_n whose tower meets coverage and height requirements."""
    trajectory = []
    need = state.k_measure - delta
    for n in range(start_n, state.config.max_tower_n + 1):
        tower = pullback_tower(beta, n)
        hits = [sum(1 for x in c.name if x != beta.infinite) for c in tower.principal]
        cols = classify_fibers(tower, J, k, delta, m, state.config.include_last)
        cov = coverage(cols)
        trajectory.append((n, str(cov), min(hits)))
        if cov >= need and min(hits) > min_hits:
            return tower, cols, cov
    raise ResourceError(f"stage {i}: no tower up to n={state.config.max_tower_n} reaches "
                        f"coverage {need}", trajectory=trajectory)


def _stage(state: StageState, i: int):
    cfg = state.config
    lang, m = state.lang, measure_for(state.lang)
    gamma = state.gammas[i - 1]
    beta = pull_back(gamma, cfg.code, lang)
    state.betas.append(beta)
    E = cfg.E_set(i, lang)
    tau = tau_partition(lang, state.K, E)
    state.taus.append(tau)
    J = join(tau, beta) if i == 1 else join_many(state.alpha[(i - 1, i - 1)], tau, beta)
    state.joins.append(J)
    k = i
    reference = reference_distribution(J, k, m)
    min_ratio = min(reference.values())
    r = 1 if i == 1 else len(J)
    prev = state.records[-1] if state.records else None
    n_i, delta = choose_parameters(min_ratio, state.k_measure, i, prev.n if prev else 0, r)

    # tower: coverage by good fibers and strictly more K-points than N_(i-1)
    start_n = prev.tower_n if prev else 1
    tower, cols, cov = _grow_tower(state, i, beta, J, k, delta, prev.N if prev else 0, m, start_n)
    state.towers.append(tower)
    bad = bad_measure(cols)
    state.check(i, "coverage", cov >= state.k_measure - delta and bad <= delta,
                coverage=str(cov), bad_measure=str(bad), delta=str(delta))
    if prev is not None:
        witness_ok = True
        try:
            refinement_by_containment(tower, state.towers[-2])
        except StructuralError:
            witness_ok = False
        state.check(i, "tower refines previous tower", witness_ok)

    alpha_ii, log = copy_names(tower, cols, J, beta)
    d_copy = distance(alpha_ii, J, m)
    # each overwritten point leaves one finite atom and enters another, so the
    # partition distance is twice the measure of the changed set
    state.check(i, "copy change", log.changed <= delta and d_copy == 2 * log.changed,
                changed=str(log.changed), distance=str(d_copy), delta=str(delta))
    state.check(i, "subscripts preserved",
                set(alpha_ii.finite_subscripts) == set(J.finite_subscripts),
                atoms=len(alpha_ii))
    if i >= 2:
        state.check(i, "alphabet size equals r", len(alpha_ii) == r, size=len(alpha_ii), r=r)
    state.alpha[(i, i)] = alpha_ii
    for j in range(i - 1, 0, -1):
        state.alpha[(i, j)] = derive_lower(alpha_ii, i - j)

    # uniformity over sections made of whole fibers of the tower
    profile = [sum(1 for x in c.name if x != beta.infinite) for c in tower.principal]
    eps_u = Fraction(1, 2**n_i * r**(2 * i))
    N_i = min(profile)
    ref_alpha = reference_distribution(alpha_ii, k, m)
    depth = max(cfg.scan_depth, tower.depth)
    code, host = host_code(alpha_ii, depth)
    cuts = fiber_cuts(tower, host, -alpha_ii.lo, len(code))
    sections = scan_sections(code, cuts, k, ref_alpha, alpha_ii.infinite, cfg.include_last)
    worst, _ = sections.worst_at_or_above(N_i)
    state.check(i, "(vii) uniformity", worst < eps_u, N=N_i, k=k, eps=str(eps_u),
                worst=str(worst), sections=sections.sections, host_depth=depth)

    # informational: every window of a bounded piece of the coded host
    limited = code[:cfg.scan_limit]
    scan = scan_windows(limited, k, ref_alpha, alpha_ii.infinite, cfg.include_last)
    w_worst, _ = scan.worst_at_or_above(N_i)
    window_info = {"positions": len(limited), "worst_at_N": str(w_worst),
                   "N_at_eps": scan.smallest_passing(eps_u), "eps": str(eps_u)}
    if i == 1:
        state.window_scan_stage1 = scan
    rec = StageRecord(i, n_i, delta, r, min_ratio, tower.n, cov, bad, N_i, log, d_copy,
                      min(profile), max(profile), eps_u, window_info)
    state.records.append(rec)
    if i == 1:
        good_hits = [c.k_hits for c in cols if c.has_good]
        max_dev = max(f.deviation for c in cols for f in c.classes if f.good)
        state.proof_bound = proof_bound_M(good_hits, max_dev, delta, n_i)


def _verify(state: StageState, i: int):
    """Properties (i)-(vi) for the array after stage i."""
    lang, m = state.lang, measure_for(state.lang)
    alg = ClopenAlgebra(lang)
    # (i) alpha_(i,1) <= ... <= alpha_(i,i)
    chain = all(refinement_map(state.alpha[(i, j + 1)], state.alpha[(i, j)]) is not None
                for j in range(1, i))
    state.check(i, "(i) refinement chain", chain)
    # (ii) beta_j <= alpha_(i,j) with the same subscript map at every stage
    for j in range(1, i + 1):
        f = refinement_map(state.alpha[(i, j)], state.betas[j - 1])
        f_first = refinement_map(state.alpha[(j, j)], state.betas[j - 1])
        state.check(i, "(ii) beta refinement", f is not None and f == f_first, j=j)
    # (iii) E_j approximated by translates of atoms of alpha_(i,j)
    for j in range(1, i + 1):
        eps = approximation_target(i, j)
        ap = alpha_T_approx(state.config.E_set(j, lang), state.alpha[(i, j)], eps, m)
        state.check(i, "(iii) E approximation", ap.ok, j=j, error=str(ap.error), eps=str(eps),
                    translates=len(ap.terms))
    # (iv) Cauchy distances
    if i >= 2:
        n_i = state.records[i - 1].n
        for j in range(1, i):
            d = distance(state.alpha[(i, j)], state.alpha[(i - 1, j)], m)
            state.check(i, "(iv) Cauchy distance", d < Fraction(1, 2**n_i),
                        j=j, distance=str(d), bound=f"1/{2**n_i}")
    # (v) tower levels are unions of beta_i atoms translates
    tower, beta = state.towers[i - 1], state.betas[i - 1]
    state.check(i, "(v) beta-measurable tower", _beta_measurable(tower, beta))
    # (vi) names of t_j fibers under alpha_(i,j) occur as alpha_(j,j)-names
    for j in range(1, i):
        tj = state.towers[j - 1]
        principal = [ci for ci, col in enumerate(tj.columns) if not col.infinite]
        before, now = set(), set()
        for ci in principal:
            before |= set(fiber_classes(tj, ci, state.alpha[(j, j)], m))
            now |= set(fiber_classes(tj, ci, state.alpha[(i, j)], m))
        state.check(i, "(vi) name inheritance", now <= before, j=j, names=len(now))


def _beta_measurable(tower: KRTower, beta: WindowPartition) -> bool:
    """Each column base is exactly the set of points with a given beta-name."""
    for col in tower.columns:
        words = col.base.words
        names = {beta.code(u) for u in words}
        if len(names) != 1:
            return False
        length = col.base.width
        if {u for u in tower.lang.factors(length) if beta.code(u) in names} != set(words):
            return False
    return True


def initial_state(config: BuildConfig) -> StageState:
    lang = LanguageOracle(config.source, horizon=config.horizon)
    factor_lang = (lang if config.factor == config.source
                   else LanguageOracle(config.factor, horizon=config.horizon))
    from .subshift import apply_code
    for length in range(1, 7):
        image = {apply_code(config.code, u) for u in lang.factors(length)}
        if image != set(factor_lang.factors(length)):
            raise InputError(f"the code does not map the source language onto the factor "
                             f"language at length {length}")
    seq = gamma_sequence(factor_lang, config.D_sets(config.stages, factor_lang), config.stages)
    m = measure_for(lang)
    beta1 = pull_back(seq.gammas[0], config.code, lang)
    K = beta1.support()
    state = StageState(config, lang, factor_lang, K, clopen_measure(m, K))
    state.gammas = seq.gammas
    state.gamma_towers = seq.towers
    return state


def run_stages(config: BuildConfig, strict: bool = True) -> StageState:
    """Execute stages 1..I and record properties (i)-(vii) in the ledger."""
    state = initial_state(config)
    for i in range(1, config.stages + 1):
        _stage(state, i)
        _verify(state, i)
        if strict and not state.passed:
            bad = state.failures()[0]
            raise LedgerFailure(f"stage {bad.stage}: property {bad.prop} failed", state)
    return state


# ----------------------------------------------------------------- triangle


def default_points(config: BuildConfig):
    """The fixed point, the generated point 1^inf.sigma^inf(seed) and a shift of it.

    A point 1^inf w 1^inf with w != 1^|w| need not lie in the subshift
    (for the default substitution none does), so compact-support points are
    only used when the caller supplies them.
    """
    gen = Generated(config.source)
    return [FixedPoint(), gen, gen.shift(37)]


def triangle_check(state: StageState, points=None, radius=None) -> LedgerEntry:
    """alpha_i-coding followed by f_(beta_i, alpha_i) equals beta_i-coding and
    the gamma_i-coding of the image point, letter by letter on [-r, r]."""
    from .subshift import apply_code, in_subshift
    cfg = state.config
    radius = cfg.triangle_radius if radius is None else radius
    points = default_points(cfg) if points is None else points
    mismatches = []
    checked = 0
    for p in points:
        if not in_subshift(state.lang, p, 3 * radius + 16):
            raise InputError(f"{p} is not a point of the subshift")
        for i in range(1, len(state.records) + 1):
            alpha = state.alpha[(i, i)]
            beta = state.betas[i - 1]
            gamma = state.gammas[i - 1]
            f = refinement_map(alpha, beta)
            via_alpha = tuple(f[x] for x in alpha.name(p, -radius, radius))
            via_beta = beta.name(p, -radius, radius)
            image = apply_code(cfg.code, p.window(-radius + gamma.lo, radius + gamma.hi))
            via_gamma = gamma.code(image)
            checked += 1
            if not via_alpha == via_beta == via_gamma:
                mismatches.append({"point": repr(p), "stage": i})
    return LedgerEntry(len(state.records), "triangle", "PASS" if not mismatches else "FAIL",
                       {"checked": checked, "radius": radius, "mismatches": mismatches})
