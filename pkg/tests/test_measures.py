from fractions import Fraction

import pytest

from ergomodel.clopen import Clopen, ClopenAlgebra, parse_cylinder, parse_union
from ergomodel.errors import InputError
from ergomodel.measures import (INFINITE, birkhoff_certificate, clopen_measure,
                                kolmogorov_defects, measure_for, naive_padded_count,
                                padded_count, product_invariance_defects, product_vs_diagonal,
                                pushforward)
from ergomodel.subshift import SubscriptMap
from ergomodel.words import DEFAULT, LanguageOracle, Substitution

import oracle

REFINED = Substitution.from_mapping({"1": "11", "2": "21312", "3": "31212"}, "2")
MERGED = Substitution.from_mapping({"1": "11", "2": "21212"}, "2")
MERGE = SubscriptMap.parse("1:1,2:2,3:2")


@pytest.mark.parametrize("w", ["2", "212", "2112", "121", "1112111", "21211212", "22"])
@pytest.mark.parametrize("n", [3, 6, 9])
def test_recursive_count_matches_direct_scan(w, n):
    assert padded_count(DEFAULT, w, n) == naive_padded_count(DEFAULT, w, n)


def test_spot_values(mu):
    assert mu("212") == Fraction(1, 2)
    assert mu("2112") == Fraction(1, 4)
    assert mu("22") == 0
    assert mu("2") == 1
    assert mu("111") is INFINITE


@pytest.mark.parametrize("length", range(1, 7))
def test_measure_matches_oracle(lang, mu, length):
    for w in lang.factors(length):
        expected = oracle.measure(w, depth=12)
        assert (mu(w) is INFINITE) if expected is None else mu(w) == expected


def test_kolmogorov_consistency(mu):
    assert kolmogorov_defects(mu, 7) == []


def test_kolmogorov_detects_a_broken_measure(lang):
    class Skewed:
        language = lang

        def __call__(self, w):
            value = measure_for(lang)(w)
            return value * 2 if w == "2121" else value

    assert ("2121", "right") in kolmogorov_defects(Skewed(), 5)


def test_trajectory_stabilizes(mu):
    values = mu.trajectory("2112", range(4, 9))
    assert values[-1] == values[-2] == Fraction(1, 4)


def test_clopen_measure(lang, mu):
    alg = ClopenAlgebra(lang)
    assert clopen_measure(mu, parse_cylinder("1.21")) == mu("121")
    assert clopen_measure(mu, alg.complement(parse_cylinder("2"))) is INFINITE
    assert clopen_measure(mu, parse_union("2112|212", lang)) == Fraction(3, 4)
    # shift invariance on a set with a negative window
    e = Clopen(-3, -1, frozenset({"212", "211"}))
    assert clopen_measure(mu, e) == clopen_measure(mu, e.shifted(-3))


def test_infinite_marker():
    assert INFINITE > Fraction(10**9)
    assert INFINITE == INFINITE
    with pytest.raises(TypeError):
        INFINITE + 1


def test_rejects_foreign_word(mu):
    with pytest.raises(InputError):
        mu("23")


def test_pushforward_of_merge_code():
    source = LanguageOracle(REFINED)
    nu = pushforward(measure_for(source), MERGE)
    assert kolmogorov_defects(nu, 7) == []
    target = LanguageOracle(MERGED)
    for n in range(1, 7):
        assert nu.language.factors(n) == target.factors(n)
    # a one-block code is a factor map, so frequencies on the image are those
    # of the merged substitution up to a common constant
    ratios = {nu(w) / measure_for(target)(w) for n in range(2, 6)
              for w in target.factors(n) if set(w) != {"1"} and measure_for(target)(w)}
    assert len(ratios) == 1


def test_pushforward_needs_full_code(mu):
    with pytest.raises(InputError):
        pushforward(measure_for(LanguageOracle(REFINED)), SubscriptMap.identity(2))


def test_product_and_diagonal(lang, mu):
    a, b, c = parse_cylinder("212"), parse_cylinder("212"), parse_cylinder("211")
    assert product_vs_diagonal(mu, a, b) == (Fraction(1, 4), Fraction(1, 2))
    assert product_vs_diagonal(mu, a, c) == (Fraction(1, 4), 0)
    assert product_invariance_defects(mu, 3) == []
    with pytest.raises(InputError):
        product_vs_diagonal(mu, parse_cylinder("1"), a)


def test_birkhoff_certificate_matches_measure(mu):
    K = parse_cylinder("2")
    A = parse_cylinder("212")
    rep = birkhoff_certificate(mu, K, A, Fraction(1, 16), horizon=10)
    assert rep.c == rep.c_measure == Fraction(1, 2)
    assert rep.verdict == "PASS"


def test_birkhoff_worst_deviations_match_brute_force(mu):
    K = parse_cylinder("2")
    A = parse_cylinder("2112")
    rep = birkhoff_certificate(mu, K, A, Fraction(1, 100), horizon=5)
    brute = oracle.birkhoff_worst(oracle.iterate("2", 5), (0, {"2"}), (0, {"2112"}), rep.c)
    assert rep.c == Fraction(1, 4)
    assert rep.worst_by_hits
    for q, value in rep.worst_by_hits.items():
        assert value == brute[q]


def test_birkhoff_rejects_noncompact(mu):
    with pytest.raises(InputError):
        birkhoff_certificate(mu, parse_cylinder("1"), parse_cylinder("2"))
