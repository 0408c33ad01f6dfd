import itertools

import numpy as np
import pytest

from ssmap import (
    Boundary,
    MarginTooLarge,
    StateSpace,
    ThresholdScheme,
    build_cover,
    points_in_cover,
    region_box,
    region_of,
)
from ssmap.regions import classify_points


@pytest.fixture(scope="module")
def scheme():
    return ThresholdScheme(((0.3, 0.6), (0.4, 0.7)))


@pytest.fixture(scope="module")
def space():
    return StateSpace((2, 2))


def test_region_of_interior_point(scheme):
    assert region_of(np.array([0.5, 0.5]), scheme) == (1, 1)


def test_region_of_threshold_hit(scheme):
    res = region_of(np.array([0.3, 0.5]), scheme)
    assert isinstance(res, Boundary) and res.vars == (0,)


def test_region_of_origin_closed(scheme):
    assert region_of(np.array([0.0, 0.0]), scheme) == (0, 0)
    assert region_of(np.array([1.0, 1.0]), scheme) == (2, 2)


def test_region_boxes_tile_and_contain(scheme):
    # random points classify to a region whose box contains them
    rng = np.random.default_rng(11)
    pts = rng.uniform(0.0, 1.0, size=(100_000, 2))
    levels, boundary = classify_points(scheme, pts)
    assert not boundary.any()  # threshold hits have probability zero
    boxes = {s: region_box(scheme, s) for s in itertools.product(range(3), range(3))}
    for s in boxes:
        rows = np.all(levels == np.asarray(s), axis=1)
        for p in pts[rows][:50]:
            assert boxes[s].contains(p)


def test_region_of_agrees_with_vectorized(scheme):
    rng = np.random.default_rng(12)
    pts = rng.uniform(0.0, 1.0, size=(500, 2))
    levels, boundary = classify_points(scheme, pts)
    for p, lv, b in zip(pts, levels, boundary):
        got = region_of(p, scheme)
        if b:
            assert isinstance(got, Boundary)
        else:
            assert got == tuple(lv)


def test_build_cover_toy_measure(scheme, space):
    cover = build_cover(scheme, space, 0.05)
    assert len(cover.boxes) == 9
    assert cover.excluded_measure == pytest.approx(0.36, abs=1e-15)
    vol = sum(b.volume for b in cover.boxes)
    assert vol + cover.excluded_measure == pytest.approx(1.0, abs=1e-12)


def test_cover_boxes_disjoint(scheme, space):
    cover = build_cover(scheme, space, (0.05, 0.02))
    for a, b in itertools.combinations(cover.boxes, 2):
        overlap = all(
            a.lo[i] <= b.hi[i] and b.lo[i] <= a.hi[i] for i in range(2)
        )
        assert not overlap, f"{a.state} and {b.state} overlap"


def test_cover_volume_identity_random_schemes():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        thresholds = []
        for _ in range(n):
            m = int(rng.integers(1, 4))
            ks = np.sort(rng.uniform(0.15, 0.85, m))
            while np.any(np.diff(ks) < 0.12):
                ks = np.sort(rng.uniform(0.15, 0.85, m))
            thresholds.append(tuple(ks))
        scheme = ThresholdScheme(tuple(thresholds))
        space = scheme.space()
        margin = [min(0.04, 0.3 * min(np.diff((0,) + t + (1,)))) for t in thresholds]
        cover = build_cover(scheme, space, margin)
        vol = sum(b.volume for b in cover.boxes)
        assert vol + cover.excluded_measure == pytest.approx(1.0, abs=1e-12)


def test_margin_too_large(scheme, space):
    with pytest.raises(MarginTooLarge) as err:
        build_cover(scheme, space, (0.2, 0.05))
    assert err.value.var == 0  # the ]0.3,0.6[ interval cannot absorb 2*0.2


def test_zero_margin_strict_and_lenient(scheme, space):
    with pytest.raises(MarginTooLarge):
        build_cover(scheme, space, 0.0)
    cover = build_cover(scheme, space, 0.0, strict=False)
    assert cover.excluded_measure == 0.0
    assert cover.box((0, 0)).hi == (0.3, 0.4)  # region closure


def test_points_in_cover_mask(scheme, space):
    cover = build_cover(scheme, space, 0.05)
    pts = np.array([[0.1, 0.1], [0.3, 0.4], [0.28, 0.1], [0.9, 0.9]])
    assert points_in_cover(cover, pts).tolist() == [True, False, False, True]


def test_monte_carlo_matches_measure(scheme, space):
    cover = build_cover(scheme, space, 0.05)
    rng = np.random.default_rng(123)
    pts = rng.uniform(0.0, 1.0, size=(200_000, 2))
    frac_out = 1.0 - points_in_cover(cover, pts).mean()
    assert frac_out == pytest.approx(cover.excluded_measure, abs=0.005)
