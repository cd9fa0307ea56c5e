import numpy as np
import pytest

from errors import ArrangementError
from herm_geom import INF, is_infinite
from moebius_cover import (
    MoebiusMap,
    cross_ratio,
    ext_distance,
    invariance_residual,
    klein_identity_residual,
    klein_maps,
    quotient_cover,
)


def test_cross_ratio_examples() -> None:
    assert cross_ratio(0, 1, INF, 2 + 1j) == pytest.approx(2 + 1j)
    assert cross_ratio(1, 2, 3, 4) == pytest.approx(-3)
    with pytest.raises(ArrangementError):
        _ = cross_ratio(0, 1, 1, 2)


def test_cross_ratio_is_moebius_invariant(rng: np.random.Generator) -> None:
    g = MoebiusMap.of(1 + 2j, -0.5, 0.3j, 2)
    for _ in range(10):
        points = [complex(*xy) for xy in rng.normal(size=(4, 2))]
        moved = [g(z) for z in points]
        assert cross_ratio(*moved) == pytest.approx(cross_ratio(*points), rel=1e-9)


def test_klein_maps_for_the_square() -> None:
    m1, m2, m3 = klein_maps(-1)
    assert m1(0) == pytest.approx(-1)
    assert m1(-1) == pytest.approx(0)
    assert is_infinite(m1(1))
    assert m2(1) == pytest.approx(-1)
    assert is_infinite(m2(0))
    assert m3(0) == pytest.approx(1)
    assert is_infinite(m3(-1))


def test_klein_maps_form_the_four_group() -> None:
    lam = 0.3 + 1.7j
    m1, m2, m3 = klein_maps(lam)
    assert m1(0) == pytest.approx(lam)
    assert m1.compose(m2).projectively_equal(m3)
    assert m2.compose(m1).projectively_equal(m3)
    marked = (0, 1, INF, lam)
    for m in (m1, m2, m3):
        assert m.is_involution()
        for z in marked:
            assert min(ext_distance(m(z), w) for w in marked) < 1e-12


def test_quotient_cover_values() -> None:
    lam = 2 + 1j
    cover = quotient_cover(lam)
    assert cover(0) == pytest.approx(lam)
    assert cover(1) == pytest.approx(lam)
    assert cover(INF) == pytest.approx(lam)
    root = complex(np.sqrt(lam))
    assert cover(root) == pytest.approx(1)
    assert cover(-root) == pytest.approx(1)
    assert quotient_cover(2)(2) == pytest.approx(2)


def test_critical_values_are_zero_one_infinity() -> None:
    first, second, third = quotient_cover(0.4 - 0.9j).critical_values()
    assert abs(first) < 1e-12
    assert second == pytest.approx(1)
    assert is_infinite(third)


@pytest.mark.parametrize(("lam", "tol"), [(2, 1e-14), (1j, 1e-12), (-1, 1e-14)])
def test_klein_identity(lam, tol) -> None:
    assert klein_identity_residual(lam) < tol


def test_klein_identity_on_an_annulus(rng: np.random.Generator) -> None:
    radii = rng.uniform(0.2, 5, size=20)
    angles = rng.uniform(0, 2 * np.pi, size=20)
    for lam in radii * np.exp(1j * angles):
        if abs(lam - 1) > 0.05:
            assert klein_identity_residual(lam) < 1e-10


def test_preimages_map_to_the_target(rng: np.random.Generator) -> None:
    cover = quotient_cover(2 + 1j)
    for y in rng.normal(size=5) + 1j * rng.normal(size=5):
        found = cover.preimages(complex(y))
        assert len(found) == 4
        for z in found:
            assert ext_distance(cover(z), complex(y)) < 1e-9


def test_preimages_of_lambda_are_the_marked_points() -> None:
    lam = 2 + 1j
    found = quotient_cover(lam).preimages(lam)
    assert sum(is_infinite(z) for z in found) == 1
    finite = sorted((complex(z) for z in found if not is_infinite(z)), key=abs)
    np.testing.assert_allclose(finite, [0, 1, lam], atol=1e-9)


def test_cover_is_invariant_under_the_klein_maps(rng: np.random.Generator) -> None:
    samples = rng.normal(size=30) + 1j * rng.normal(size=30)
    assert invariance_residual(0.3 + 1.7j, samples) < 1e-10


@pytest.mark.parametrize("lam", [0, 1, INF])
def test_degenerate_lambda_is_rejected(lam) -> None:
    with pytest.raises(ArrangementError):
        _ = quotient_cover(lam)
    with pytest.raises(ArrangementError):
        _ = klein_maps(lam)
