from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ergomodel.clopen import Clopen, ClopenAlgebra, parse_cylinder
from ergomodel.errors import InputError
from ergomodel.measures import measure_for
from ergomodel.partitions import (WindowPartition, alpha_T_approx, block_empirical, distance,
                                  from_atoms, iterated_join, join, join_many, letter_partition,
                                  reference_distribution, refinement_map, refines,
                                  block_distance_bound, scan_sections, scan_windows, two_set_partition,
                                  uniformity_check)
from ergomodel.words import DEFAULT, LanguageOracle

LANG = LanguageOracle(DEFAULT)
MU = measure_for(LANG)
WINDOW = (-1, 2)
WORDS = sorted(LANG.factors(WINDOW[1] - WINDOW[0] + 1))


def random_partition(draw, labels=(2, 3)):
    """A partition on WINDOW with atoms 1 (holding 1111) and the given labels."""
    finite = [w for w in WORDS if w != "1111"]
    assignment = draw(st.lists(st.sampled_from((1,) + labels), min_size=len(finite),
                               max_size=len(finite)))
    table = dict(zip(finite, assignment))
    # every label must be used so the subscript sets agree
    for i, label in enumerate(labels):
        table[finite[i]] = label
    table["1111"] = 1
    return WindowPartition(LANG, *WINDOW, table, 1)


partitions = st.composite(random_partition)


def test_letter_partition():
    alpha = letter_partition(LANG)
    assert alpha.subscripts == [1, 2]
    assert alpha.code("12121") == (1, 2, 1, 2, 1)


def test_partition_contract():
    with pytest.raises(InputError):
        WindowPartition(LANG, 0, 0, {"1": 1}, 1)
    with pytest.raises(InputError):
        WindowPartition(LANG, 0, 0, {"1": 2, "2": 2}, 1)
    with pytest.raises(InputError):
        WindowPartition(LANG, 0, 0, {"1": 1, "2": 1})
    with pytest.raises(InputError):
        two_set_partition(LANG, parse_cylinder("1"))


def test_from_atoms_overlap():
    alg = ClopenAlgebra(LANG)
    with pytest.raises(InputError):
        from_atoms(LANG, [(1, alg.complement(parse_cylinder("2"))), (2, parse_cylinder("2")),
                          (3, parse_cylinder("212"))], 1)


def test_join_and_refinement():
    alpha = letter_partition(LANG)
    beta = two_set_partition(LANG, parse_cylinder("212"))
    j = join(alpha, beta)
    assert refines(j, alpha) and refines(j, beta)
    assert not refines(alpha, beta)
    assert refinement_map(j, alpha) == {(1, 1): 1, (2, 1): 2, (2, 2): 2}
    flat = join_many(alpha, beta, alpha)
    assert all(len(l) == 3 for l in flat.subscripts)


def test_shrink_and_canonical():
    beta = two_set_partition(LANG, parse_cylinder("2")).lift(-3, 4)
    assert beta.shrink().width == 1
    gamma = beta.relabel(lambda l: {1: 7, 2: 9}[l])
    assert gamma.canonical() == beta.canonical()


def test_iterated_join_names():
    alpha = letter_partition(LANG)
    assert iterated_join(alpha, 0, 0) is alpha
    blocks = iterated_join(alpha, -1, 1)
    assert (1, 2, 1) in blocks.subscripts
    assert (2, 2, 1) not in blocks.subscripts
    with pytest.raises(InputError):
        iterated_join(alpha, 2, 1)


def test_distance_values():
    a = two_set_partition(LANG, parse_cylinder("2"))
    b = two_set_partition(LANG, parse_cylinder("212"))
    # A_2 - B_2 = [.211], and 1 - 1 parts are infinite
    assert distance(a, b, MU) == Fraction(1, 2)
    with pytest.raises(InputError):
        distance(a, letter_partition(LANG).relabel(lambda l: l + 5 if l == 2 else l), MU)


@settings(max_examples=150, deadline=None)
@given(partitions(), partitions(), partitions())
def test_distance_is_a_metric(a, b, c):
    assert distance(a, a, MU) == 0
    assert distance(a, b, MU) == distance(b, a, MU)
    assert distance(a, c, MU) <= distance(a, b, MU) + distance(b, c, MU)
    if distance(a, b, MU) == 0:
        assert a.labels == b.labels


@settings(max_examples=60, deadline=None)
@given(partitions(labels=(2,)), partitions(labels=(2,)), st.integers(1, 2))
def test_block_distance_bound(a, b, k):
    res = block_distance_bound(a, b, k, MU)
    assert res.verdict in ("PASS", "SKIP")
    if res.verdict == "PASS":
        assert res.lhs <= res.rhs


def test_translate_approximation_finds_a_shift():
    alpha = two_set_partition(LANG, parse_cylinder("2112"))
    e = alpha.atom(2).shifted(2)
    ap = alpha_T_approx(e, alpha, Fraction(1, 100), MU)
    assert ap.terms == [(2, 2)] and ap.error == 0 and ap.ok


def test_translate_approximation_reports_error():
    alpha = two_set_partition(LANG, parse_cylinder("2112"))
    ap = alpha_T_approx(parse_cylinder("212"), alpha, Fraction(1, 100), MU)
    # a 2 followed by 11 is preceded by 1 then 2, so [.212] holds T^2 [.2112]
    assert ap.terms == [(-2, 2)]
    assert ap.error == Fraction(1, 4) and not ap.ok


def test_block_empirical_short_name():
    dist = block_empirical("12121", 1)
    # j = 1..4 (1-based) holds two 2s, both counted
    assert dist.denominator == 2 and dist.frequencies == {(2,): 1}
    ref = reference_distribution(letter_partition(LANG), 1, MU)
    assert dist.deviation(ref) == (0, None)


def test_block_empirical_counts():
    dist = block_empirical("1212121", 1)
    # positions j = 1..6 (1-based); three of them are 2s
    assert dist.denominator == 3
    assert dist.frequencies == {(2,): 1}
    assert block_empirical("1212121", 1, include_last=True).denominator == 3
    with pytest.raises(InputError):
        block_empirical("1111", 1)


def test_reference_distribution_sums_to_one():
    alpha = letter_partition(LANG)
    for k in (1, 2, 3):
        ref = reference_distribution(alpha, k, MU)
        assert sum(v for block, v in ref.items() if block[k - 1] != 1) == 1


def brute_scan(code, k, ref):
    worst = {}
    for s in range(len(code)):
        for e in range(s + 1, len(code)):
            name = code[s:e + 1]
            count = sum(1 for x in name[:-1] if x != 1)
            if count == 0:
                continue
            dev, _ = block_empirical(name, k).deviation(ref)
            worst[count] = max(worst.get(count, Fraction(0)), dev)
    return worst


@pytest.mark.parametrize("k", [1, 2])
def test_window_scan_matches_brute_force(k):
    alpha = two_set_partition(LANG, parse_cylinder("212"))
    ref = reference_distribution(alpha, k, MU)
    code = alpha.code("1" * 4 + LANG.host(4) + "1" * 4)
    assert scan_windows(code, k, ref).worst == brute_scan(code, k, ref)


def test_section_scan_uses_only_cuts():
    alpha = letter_partition(LANG)
    ref = reference_distribution(alpha, 1, MU)
    code = alpha.code("11" + LANG.host(3) + "11")
    cuts = [i for i, x in enumerate(code) if x == 2]
    scan = scan_sections(code, cuts, 1, ref)
    assert scan.sections == len(cuts) * (len(cuts) - 1) // 2
    assert scan.smallest_passing(Fraction(1, 2)) == 1


def test_uniformity_check():
    alpha = letter_partition(LANG)
    ref = reference_distribution(alpha, 2, MU)
    names = [alpha.code(LANG.host(n)) for n in range(2, 7)]
    cert = uniformity_check(names, 4, 2, Fraction(1, 2), ref)
    assert cert.verdict == "PASS" and cert.sections == 5
    strict = uniformity_check(names, 4, 2, Fraction(1, 1000), ref)
    assert strict.verdict == "FAIL" and strict.witness is not None
