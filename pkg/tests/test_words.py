import pytest

from ergomodel.errors import InputError, ResourceError, StabilizationError
from ergomodel.words import (DEFAULT, LanguageOracle, Substitution, factors, iterate,
                             iterate_length, occurrences, substitute)

import oracle


def test_iterate_matches_oracle():
    for n in range(8):
        assert iterate(DEFAULT, "2", n) == oracle.iterate("2", n)


def test_iterate_length_closed_form():
    # |sigma^n(2)| = (n + 2) 2^(n - 1)
    for n in range(1, 20):
        assert iterate_length(DEFAULT, "2", n) == (n + 2) * 2 ** (n - 1)


def test_substitute_rejects_foreign_letter():
    with pytest.raises(InputError):
        substitute(DEFAULT, "23")


def test_iterate_cap():
    with pytest.raises(ResourceError):
        iterate(DEFAULT, "2", 40)


@pytest.mark.parametrize("length", range(1, 9))
def test_factors_match_oracle(lang, length):
    assert set(factors(lang, length)) == oracle.factor_set(length)


def test_factor_counts(lang):
    assert [len(lang.factors(n)) for n in range(1, 7)] == [2, 3, 5, 8, 10, 13]


def test_contains(lang):
    assert lang.contains("212")
    assert lang.contains("1" * 50)
    assert not lang.contains("22")
    assert not lang.contains("2122")


def test_horizon_is_a_resource_limit(lang):
    with pytest.raises(ResourceError):
        lang.factors(10**8)


def test_stabilization_failure_reports_last_sets():
    tiny = LanguageOracle(DEFAULT, cap=64)
    with pytest.raises(StabilizationError) as info:
        tiny.factors(40)
    assert "last_two" in info.value.details


def test_stabilization_depth_grows_with_length(lang):
    depths = [lang.stabilization_depth(n) for n in (1, 4, 16, 64)]
    assert depths == sorted(depths)


def test_occurrences_overlap():
    assert occurrences("11111", "1111") == [1, 2]
    assert occurrences((1, 2, 1, 2), (1, 2)) == [1, 3]
    with pytest.raises(InputError):
        occurrences("12", "")


@pytest.mark.parametrize("images, seed", [
    ({"1": "1", "2": "212"}, "2"),          # 1 must grow
    ({"1": "11", "2": "112"}, "2"),         # image of 2 starts with 1
    ({"1": "11", "2": "213"}, "2"),         # foreign letter
    ({"1": "11", "2": "212"}, "1"),         # seed 1
])
def test_substitution_validation(images, seed):
    with pytest.raises(InputError):
        Substitution.from_mapping(images, seed)


def test_substitution_json_round_trip():
    again = Substitution.from_json(DEFAULT.to_json_obj())
    assert again == DEFAULT
    with pytest.raises(InputError):
        Substitution.from_json({"images": {"1": "11"}})
