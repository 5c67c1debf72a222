from fractions import Fraction

import pytest

from app.core.errors import NotInRegionError, PreconditionError
from app.models.polytope import RateTuple
from app.models.region import Category
from app.services import polytope as poly
from app.services.information import mi_bundle
from app.services.regions import RATE_AXES, clip, region_r2, region_tekin_r1, region_theorem1
from app.services.splitmap import (
    check_gap_condition,
    classify,
    counterexample_tuple,
    search_counterexample,
    split_vertices,
    transform,
)

F = Fraction


def _rates(*values):
    return RateTuple.from_fractions(RATE_AXES, values)


def _secret_total(t):
    return t.exact_value("R1s") + t.exact_value("R2s")


@pytest.mark.parametrize(
    "point, category, expected",
    [
        ((F(1, 2), 0, F(1, 2), 0), Category.ONE, (F(1, 2), 0, F(1, 2), 0)),
        ((0, F(1, 2), 0, 0), Category.TWO, (F(1, 2), 0, 0, 0)),
        ((0, 0, 0, F(1, 2)), Category.FOUR, (0, 0, F(1, 2), 0)),
        ((0, F(1, 2), 0, F(1, 2)), Category.SIX, (F(1, 2), 0, F(1, 2), 0)),
    ],
)
def test_transform_with_silent_eavesdropper(xor_constant_z, point, category, expected):
    ch, inputs = xor_constant_z
    mi = mi_bundle(ch, inputs)
    report = transform(_rates(*point), mi)
    assert report.category is category
    assert report.verified
    assert report.failed_checks() == []
    assert report.output.exact == expected


def test_transform_category_three(noiseless_xor_z):
    ch, inputs = noiseless_xor_z
    mi = mi_bundle(ch, inputs)
    report = transform(_rates(0, F(3, 4), 0, F(1, 2)), mi)
    assert report.category is Category.THREE
    assert report.verified
    assert report.output.exact == (F(1, 4), F(1, 2), 0, F(1, 2))
    assert poly.contains_point(region_r2(mi), report.output)


def test_leaky_channel_information(leaky_noiseless):
    ch, inputs = leaky_noiseless
    mi = mi_bundle(ch, inputs)
    assert (mi.i_y_given(1), mi.i_y_given(2), mi.i_y_given((1, 2))) == (3, 3, 6)
    assert (mi.i_z(1), mi.i_z(2), mi.i_z((1, 2))) == (1, 1, 3)
    assert (mi.i_z_given(1), mi.i_z_given(2)) == (2, 2)


@pytest.mark.parametrize(
    "point, category, expected",
    [
        pytest.param((1, 2, 0, 1), Category.ONE, (1, 2, 0, 1), id="one"),
        pytest.param((0, 3, 1, F(1, 2)), Category.TWO, (1, 2, 1, F(1, 2)), id="two"),
        pytest.param((0, 2, 1, 2), Category.THREE, (1, 1, 1, 2), id="three"),
        pytest.param((1, F(1, 2), 0, 3), Category.FOUR, (1, F(1, 2), 1, 2), id="four"),
        pytest.param((0, 2, 0, 3), Category.FIVE, (0, 2, 2, 1), id="five"),
        pytest.param((0, 3, 0, 3), Category.SIX, (1, 2, 2, 1), id="six"),
    ],
)
def test_transform_with_leaky_eavesdropper(leaky_noiseless, point, category, expected):
    ch, inputs = leaky_noiseless
    mi = mi_bundle(ch, inputs)
    report = transform(_rates(*point), mi)
    assert report.category is category
    assert report.verified, report.failed_checks()
    assert report.output.exact == expected
    assert poly.contains_point(region_r2(mi), report.output)
    for k in (1, 2):
        before = report.input.exact_value(f"R{k}s") + report.input.exact_value(f"R{k}o")
        after = report.output.exact_value(f"R{k}s") + report.output.exact_value(f"R{k}o")
        assert before == after
    open_total = report.output.exact_value("R1o") + report.output.exact_value("R2o")
    assert open_total <= mi.i_z((1, 2))
    if category in (Category.THREE, Category.FIVE, Category.SIX):
        # 公開速率補滿 I(X1,X2;Z)
        assert open_total == mi.i_z((1, 2))


def test_transform_accepts_float_tuple(xor_constant_z):
    ch, inputs = xor_constant_z
    report = transform(RateTuple.from_floats(RATE_AXES, [0.0, 0.5, 0.0, 0.0]), mi_bundle(ch, inputs))
    assert report.category is Category.TWO
    assert report.output.exact == (F(1, 2), 0, 0, 0)


def test_classify_outside_region(xor_constant_z):
    ch, inputs = xor_constant_z
    with pytest.raises(NotInRegionError):
        classify(_rates(1, 1, 0, 0), mi_bundle(ch, inputs))


def test_boundary_stays_in_category_one(noiseless_xor_z):
    ch, inputs = noiseless_xor_z
    mi = mi_bundle(ch, inputs)
    # o1 + o2 = I(X1,X2;Z) 仍屬第一類
    assert classify(_rates(0, F(1, 2), 0, F(1, 2)), mi) is Category.ONE


def test_every_vertex_maps_into_r2(degraded_corpus):
    for _, _, mi in degraded_corpus:
        r2 = region_r2(mi)
        reports = split_vertices(mi)
        assert reports
        for report in reports:
            assert report.verified, report.failed_checks()
            assert poly.contains_point(r2, report.output)
            for k in (1, 2):
                before = report.input.exact_value(f"R{k}s") + report.input.exact_value(f"R{k}o")
                after = report.output.exact_value(f"R{k}s") + report.output.exact_value(f"R{k}o")
                assert before == after


def test_witness_counterexample(xor_witness):
    ch, inputs = xor_witness
    mi = mi_bundle(ch, inputs)
    point = counterexample_tuple(mi)
    assert point.exact == (0, 0, 0, 1)
    assert check_gap_condition(mi)
    assert poly.contains_point(region_tekin_r1(mi), point)
    assert not poly.contains_point(region_theorem1(mi), point)
    # 等號情形：R1s + R2s = [I(X1,X2;Y) − I(X1,X2;Z)]⁺
    assert _secret_total(point) == clip(mi.i_y_given((1, 2)) - mi.i_z((1, 2)))
    with pytest.raises(NotInRegionError):
        classify(point, mi)


def test_gap_condition_fails_without_eavesdropper(xor_constant_z):
    ch, inputs = xor_constant_z
    assert not check_gap_condition(mi_bundle(ch, inputs))


def test_planted_witness_found_first(xor_witness):
    result = search_counterexample((2, 2), 2, 2, trials=1, seed=7, planted=xor_witness)
    assert result is not None
    assert result.trial == 0
    assert result.counterexample.exact == (0, 0, 0, 1)
    assert result.in_tekin_region and not result.in_theorem_region
    mi = result.bundle
    assert _secret_total(result.counterexample) == clip(mi.i_y_given((1, 2)) - mi.i_z((1, 2)))


def test_search_independent_of_workers():
    serial = search_counterexample((2, 2), 2, 2, trials=200, seed=3, workers=1)
    parallel = search_counterexample((2, 2), 2, 2, trials=200, seed=3, workers=3)
    assert (serial.trial if serial else None) == (parallel.trial if parallel else None)


def test_search_rejects_bad_arguments():
    with pytest.raises(PreconditionError):
        search_counterexample((2, 2), 2, 2, trials=0, seed=1)
    with pytest.raises(PreconditionError):
        search_counterexample((2, 2, 2), 2, 2, trials=5, seed=1)


@pytest.mark.slow
def test_random_search_finds_counterexample():
    result = search_counterexample((2, 2), 2, 2, trials=10_000, seed=2024)
    assert result is not None
    assert check_gap_condition(result.bundle)
    assert poly.contains_point(region_tekin_r1(result.bundle), result.counterexample)
    assert not poly.contains_point(region_theorem1(result.bundle), result.counterexample)
