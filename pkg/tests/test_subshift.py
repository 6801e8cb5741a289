import pytest

from ergomodel.errors import InputError
from ergomodel.subshift import (CompactSupport, FixedPoint, Generated, SubscriptMap, apply_code,
                                image_language, in_subshift, product_language, shift, window)
from ergomodel.words import DEFAULT

import oracle


def test_fixed_point_windows():
    p = FixedPoint()
    assert window(p, -3, 3) == "1" * 7
    assert shift(p, 5) is p


def test_compact_support_single_letter():
    assert window(CompactSupport("", "2"), -1, 1) == "121"


def test_compact_support_layout():
    p = CompactSupport("21", "212")
    assert window(p, -4, 4) == "112121211"
    assert window(shift(p, 2), -2, 0) == "212"


def test_generated_point_reads_the_fixed_point():
    p = Generated(DEFAULT)
    assert window(p, 0, 47) == oracle.iterate("2", 4)
    assert window(p, -3, 2) == "111212"
    assert window(shift(p, 3), -3, 2) == window(p, 0, 5)


def test_window_order():
    with pytest.raises(InputError):
        window(FixedPoint(), 2, 1)


def test_membership(lang):
    assert in_subshift(lang, FixedPoint(), 20)
    assert in_subshift(lang, Generated(DEFAULT), 30)
    assert in_subshift(lang, Generated(DEFAULT).shift(37), 30)
    # 2s are separated by runs of 1s whose lengths form a ruler sequence of
    # powers of 2, so an isolated word inside 1s never occurs
    assert not in_subshift(lang, CompactSupport("", "212"), 10)


def test_subscript_map_contract():
    f = SubscriptMap.parse("1:1,2:2,3:2")
    assert f("3") == "2"
    assert apply_code(f, "1231") == "1221"
    with pytest.raises(InputError):
        SubscriptMap.parse("1:2,2:1")
    with pytest.raises(InputError):
        SubscriptMap.parse("1:1,2:1")
    with pytest.raises(InputError):
        SubscriptMap.parse("12")
    with pytest.raises(InputError):
        f("7")


def test_compose_and_identity():
    f = SubscriptMap.parse("1:1,2:2,3:2")
    assert f.compose(SubscriptMap.identity(3)) == f


def test_coded_point(lang):
    f = SubscriptMap.identity(2)
    p = apply_code(f, Generated(DEFAULT))
    assert p.window(-2, 4) == Generated(DEFAULT).window(-2, 4)
    assert apply_code(f, FixedPoint()) == FixedPoint()


def test_image_language_identity(lang):
    assert image_language(SubscriptMap.identity(2), lang, 5) == set(lang.factors(5))


def test_product_language_size(lang):
    assert len(product_language(lang, lang, 3)) == len(lang.factors(3)) ** 2
