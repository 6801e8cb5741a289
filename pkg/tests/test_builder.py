from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ergomodel.builder import (BuildConfig, choose_parameters, classify_fibers, copy_names,
                               derive_lower, dyadic_below, eps_m, initial_state, mediant_holds,
                               proof_bound_M, pull_back, run_stages, tau_partition,
                               triangle_check)
from ergomodel.clopen import parse_cylinder
from ergomodel.errors import InputError, ResourceError, StructuralError
from ergomodel.measures import measure_for
from ergomodel.partitions import distance, join
from ergomodel.subshift import CompactSupport, SubscriptMap
from ergomodel.towers import pullback_tower
from ergomodel.words import Substitution

REFINED = Substitution.from_mapping({"1": "11", "2": "21312", "3": "31212"}, "2")
MERGED = Substitution.from_mapping({"1": "11", "2": "21212"}, "2")


def test_dyadic_below():
    assert dyadic_below(Fraction(1, 3)) == Fraction(1, 4)
    assert dyadic_below(Fraction(1, 4)) == Fraction(1, 8)
    with pytest.raises(InputError):
        dyadic_below(Fraction(0))


def test_choose_parameters():
    assert choose_parameters(Fraction(1, 2), Fraction(1), 1) == (3, Fraction(1, 64))
    n, delta = choose_parameters(Fraction(1, 2), Fraction(1), 2, n_prev=3, r=2)
    assert n == 4 and delta < Fraction(1, 12 * 16 * 2**7)
    with pytest.raises(StructuralError):
        choose_parameters(Fraction(0), Fraction(1), 1)


def test_eps_m():
    assert eps_m(6, 3, 2) == Fraction(3, 2)


def test_proof_bound_arithmetic():
    bound = proof_bound_M([2, 4], Fraction(0), Fraction(1, 8), 3)
    # eps_m < 1/8 needs m > 2 + 4 * 4 / (2 * 1/8) = 66
    assert bound.m0 == 67 and bound.M == 268
    # N' = ceil(268 / (1 - 1/32))
    assert bound.N_prime == 277
    hopeless = proof_bound_M([1], Fraction(1, 4), Fraction(1, 8), 3)
    assert not hopeless.computable


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.fractions(min_value=0, max_value=50),
                          st.fractions(min_value=Fraction(1, 50), max_value=50)),
                min_size=1, max_size=8))
def test_mediant(pairs):
    a, b = zip(*pairs)
    assert mediant_holds(a, b)


def test_config_json_round_trip():
    cfg = BuildConfig(stages=2, source=REFINED, factor=MERGED,
                      code=SubscriptMap.parse("1:1,2:2,3:2"), E=("2", "212"))
    again = BuildConfig.from_json_obj(cfg.to_json_obj())
    assert again.to_json_obj() == cfg.to_json_obj()
    with pytest.raises(InputError):
        BuildConfig.from_json_obj({"stages": 0})
    with pytest.raises(InputError):
        BuildConfig.from_json_obj({"colour": "red"})
    with pytest.raises(InputError):
        BuildConfig(factor=MERGED)


def test_code_must_be_onto_the_factor():
    cfg = BuildConfig(stages=1, source=REFINED, factor=MERGED,
                      code=SubscriptMap.parse("1:1,2:2,3:3"))
    with pytest.raises(InputError):
        initial_state(cfg)


def test_tau_needs_E_inside_K():
    state = initial_state(BuildConfig(stages=1, D=("212",)))
    with pytest.raises(InputError):
        tau_partition(state.lang, state.K, parse_cylinder("2"))


def copy_setup(E):
    cfg = BuildConfig(stages=1, E=(E,), D=("2",))
    state = initial_state(cfg)
    m = measure_for(state.lang)
    beta = pull_back(state.gammas[0], cfg.code, state.lang)
    J = join(tau_partition(state.lang, state.K, cfg.E_set(1, state.lang)), beta)
    tower = pullback_tower(beta, 1)
    cols = classify_fibers(tower, J, 1, Fraction(1, 32), m)
    return tower, cols, J, beta, m


def test_copy_overwrites_bad_fibers():
    tower, cols, J, beta, m = copy_setup("2112|211111111111111112")
    assert [f.good for f in cols[0].classes] == [False, True]
    new, log = copy_names(tower, cols, J, beta)
    assert log.changed == Fraction(1, 32)
    # every changed point leaves one finite atom and enters another
    assert distance(new, J, m) == 2 * log.changed
    assert new != J


def test_copy_that_loses_a_subscript_is_refused():
    tower, cols, J, beta, m = copy_setup("2111111112")
    with pytest.raises(StructuralError):
        copy_names(tower, cols, J, beta)


def test_no_copy_when_all_fibers_are_good():
    tower, cols, J, beta, m = copy_setup("2")
    new, log = copy_names(tower, cols, J, beta)
    assert new is J and log.changed == 0


def test_derive_lower_projects():
    state = run_stages(BuildConfig(stages=2))
    top = state.alpha[(2, 2)]
    assert derive_lower(top, 1) == state.alpha[(2, 1)]
    assert all(not isinstance(l, tuple) or len(l) == 3 for l in top.subscripts)


def test_default_run_records():
    state = run_stages(BuildConfig(stages=3))
    assert state.passed
    assert state.k_measure == Fraction(5, 2)
    rows = [(r.n, r.delta, r.r, r.tower_n, r.N) for r in state.records]
    assert rows == [
        (4, Fraction(1, 128), 1, 1, 10),
        (5, Fraction(1, 2**33), 11, 2, 20),
        (6, Fraction(1, 2**41), 21, 4, 40),
    ]
    bound = state.proof_bound
    assert (bound.m0, bound.M, bound.N_prime) == (515, 5150, 5232)


def test_merge_code_run():
    cfg = BuildConfig(stages=2, source=REFINED, factor=MERGED,
                      code=SubscriptMap.parse("1:1,2:2,3:2"), E=("2", "212", "3"),
                      D=("2", "212", "2"))
    state = run_stages(cfg)
    assert state.passed
    assert state.k_measure == Fraction(7, 2)
    assert triangle_check(state).verdict == "PASS"


def test_tower_limit_is_a_resource_error():
    with pytest.raises(ResourceError):
        run_stages(BuildConfig(stages=2, max_tower_n=1))


def test_triangle_rejects_foreign_points():
    state = run_stages(BuildConfig(stages=1))
    with pytest.raises(InputError):
        triangle_check(state, [CompactSupport("", "212")])
