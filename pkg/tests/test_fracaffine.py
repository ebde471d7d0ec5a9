"""Ratio-of-affine maps: construction, evaluation, reparametrization,
composition, serialization, and the chord-inclusion property."""

import json

import numpy as np
import pytest

from cevarep.certify import CertifyConfig, certify
from cevarep.errors import (
    DimensionMismatch,
    EmptyDomain,
    OutOfDomain,
    RegionEscapesDomain,
)
from cevarep.fracaffine import (
    FracAffineMap,
    as_oracle,
    compose,
    lambda_inverse,
    lambda_reparam,
    min_bottom_over_box,
    random_fracaffine,
)
from cevarep.geom import AffineFunctional, AffineMap, convex_combine, segment_coordinate
from cevarep.oracle import SamplingRegion

from conftest import domain_box, sup_param_distance


def scalar_moebius():
    # (2x + 1) / (x + 2), domain x > -2
    return FracAffineMap(
        AffineMap([[2.0]], [1.0]), AffineFunctional([1.0], 2.0), [0.0]
    )


def test_eval_scalar_example():
    f = scalar_moebius()
    assert f.eval([0.0])[0] == pytest.approx(0.5)
    assert f([1.0])[0] == pytest.approx(1.0)


def test_eval_planar_example():
    f = FracAffineMap(
        AffineMap(np.eye(2), np.zeros(2)),
        AffineFunctional([1.0, 0.0], 1.0),
        np.zeros(2),
    )
    out = f.eval([1.0, 1.0])
    assert np.allclose(out, [0.5, 0.5])


def test_affine_slice_reduces_to_affine_map():
    A = np.array([[1.0, 2.0], [0.0, -1.0], [3.0, 0.5]])
    a = np.array([0.1, 0.2, 0.3])
    f = FracAffineMap(AffineMap(A, a), AffineFunctional(np.zeros(2), 1.0), np.zeros(2))
    rng = np.random.default_rng(3)
    for x in rng.normal(size=(20, 2)):
        assert np.allclose(f.eval(x), A @ x + a, rtol=0, atol=1e-15)


def test_normalization_at_anchor():
    f = scalar_moebius()
    assert f.bottom(f.anchor) == pytest.approx(1.0)
    # bottom(0) = 2 before normalization, so every block was halved
    assert f.top.matrix[0, 0] == pytest.approx(1.0)
    assert f.bottom.offset == pytest.approx(1.0)


def test_rescaling_gives_identical_canonical_form():
    A = np.array([[0.3, -0.2], [0.1, 0.4]])
    a = np.array([0.5, -0.1])
    B = np.array([0.2, 0.1])
    f = FracAffineMap(AffineMap(A, a), AffineFunctional(B, 1.0), np.zeros(2))
    g = FracAffineMap(
        AffineMap(2 * A, 2 * a), AffineFunctional(2 * B, 2.0), np.zeros(2)
    )
    assert sup_param_distance(f, g) == 0.0
    for x in np.random.default_rng(0).uniform(-0.5, 0.5, size=(25, 2)):
        fx, gx = f.eval(x), g.eval(x)
        assert np.allclose(fx, gx, rtol=1e-15, atol=0)


def test_anchor_outside_domain_rejected():
    with pytest.raises(EmptyDomain):
        FracAffineMap(
            AffineMap([[1.0]], [0.0]), AffineFunctional([1.0], 2.0), [-2.0]
        )


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        FracAffineMap(
            AffineMap([[1.0, 0.0]], [0.0]), AffineFunctional([1.0], 1.0), [0.0]
        )
    f = scalar_moebius()
    with pytest.raises(DimensionMismatch):
        f.eval([1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        f.eval_many(np.zeros((3, 2)))


def test_eval_out_of_domain():
    f = scalar_moebius()
    with pytest.raises(OutOfDomain):
        f.eval([-2.0])
    with pytest.raises(OutOfDomain):
        f.eval([-5.0])
    with pytest.raises(OutOfDomain):
        f.eval_many([[0.0], [-2.0]])


def test_eval_many_matches_eval():
    f = random_fracaffine(3, 2, rng_seed=9)
    X = np.random.default_rng(1).uniform(-0.4, 0.4, size=(40, 3))
    Y = f.eval_many(X)
    for i, x in enumerate(X):
        assert np.allclose(Y[i], f.eval(x), rtol=1e-14)


def test_renormalized_same_map():
    f = random_fracaffine(2, 2, rng_seed=4)
    g = f.renormalized([0.1, -0.2])
    assert g.bottom(g.anchor) == pytest.approx(1.0)
    for x in np.random.default_rng(2).uniform(-0.3, 0.3, size=(20, 2)):
        assert np.allclose(f.eval(x), g.eval(x), rtol=1e-13)


def test_lambda_identity_when_denominators_match():
    A = np.array([[1.0, 0.0], [0.0, 2.0]])
    f = FracAffineMap(
        AffineMap(A, np.zeros(2)), AffineFunctional(np.zeros(2), 1.0), np.zeros(2)
    )
    x, y = np.array([0.2, 0.1]), np.array([-0.3, 0.4])
    for t in (0.1, 0.5, 0.9):
        assert lambda_reparam(f, x, y, t) == pytest.approx(t, abs=1e-15)
        assert lambda_inverse(f, x, y, t) == pytest.approx(t, abs=1e-15)


def test_lambda_worked_example():
    # bottom(x) = x + 1: beta = 2 at x = 1, beta = 1 at x = 0
    f = FracAffineMap(
        AffineMap([[1.0]], [0.0]), AffineFunctional([1.0], 1.0), [0.0]
    )
    assert lambda_reparam(f, [1.0], [0.0], 0.5) == pytest.approx(2.0 / 3.0)
    assert lambda_inverse(f, [1.0], [0.0], 2.0 / 3.0) == pytest.approx(0.5)


def test_lambda_endpoint_limits():
    f = FracAffineMap(
        AffineMap([[1.0]], [0.0]), AffineFunctional([1.0], 1.0), [0.0]
    )
    assert lambda_reparam(f, [1.0], [0.0], 1e-9) < 1e-8
    assert lambda_reparam(f, [1.0], [0.0], 1.0 - 1e-9) > 1.0 - 1e-8
    for bad in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            lambda_reparam(f, [1.0], [0.0], bad)
        with pytest.raises(ValueError):
            lambda_inverse(f, [1.0], [0.0], bad)


def test_lambda_round_trip_grid():
    f = random_fracaffine(2, 2, rng_seed=6)
    x, y = np.array([0.4, -0.2]), np.array([-0.3, 0.5])
    for t in np.linspace(0.01, 0.99, 99):
        s = lambda_reparam(f, x, y, t)
        assert 0.0 < s < 1.0
        assert lambda_inverse(f, x, y, s) == pytest.approx(t, abs=1e-12)


def test_chord_inclusion_forward():
    """Images of chord points land strictly inside the image chord."""
    rng = np.random.default_rng(12)
    f = random_fracaffine(3, 2, rng_seed=12)
    box = domain_box(f)
    for _ in range(100):
        x, y = box.sample(rng, 2)
        t = rng.uniform(0.05, 0.95)
        fx, fy = f.eval(x), f.eval(y)
        if np.linalg.norm(fx - fy) < 1e-8:
            continue
        mid = f.eval(convex_combine(x, y, t))
        s = segment_coordinate(fx, fy, mid)
        assert 0.0 < s < 1.0


def test_chord_inclusion_reverse():
    """Every interior point of the image chord is hit: the preimage
    parameter produced by the inverse reparametrization lands on it."""
    rng = np.random.default_rng(13)
    f = random_fracaffine(2, 3, rng_seed=13)
    box = domain_box(f)
    for _ in range(100):
        x, y = box.sample(rng, 2)
        s = rng.uniform(0.05, 0.95)
        t = lambda_inverse(f, x, y, s)
        lhs = f.eval(convex_combine(x, y, t))
        rhs = convex_combine(f.eval(x), f.eval(y), s)
        scale = max(1.0, float(np.linalg.norm(rhs)))
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * scale


def test_compose_affine_subcase():
    A1, a1 = np.array([[1.0, 2.0]]), np.array([3.0])
    A2, a2 = np.array([[2.0], [1.0]]), np.array([0.5, -0.5])
    f = FracAffineMap(
        AffineMap(A1, a1), AffineFunctional(np.zeros(2), 1.0), np.zeros(2)
    )
    g = FracAffineMap(
        AffineMap(A2, a2), AffineFunctional(np.zeros(1), 1.0), np.zeros(1)
    )
    h = compose(g, f)
    assert np.allclose(h.top.matrix, A2 @ A1)
    assert np.allclose(h.top.offset, A2 @ a1 + a2)
    assert np.allclose(h.bottom.row, 0.0)


def test_compose_identity_law():
    f = random_fracaffine(2, 2, rng_seed=8)
    ident = FracAffineMap(
        AffineMap(np.eye(2), np.zeros(2)),
        AffineFunctional(np.zeros(2), 1.0),
        np.zeros(2),
    )
    h = compose(ident, f)
    box = domain_box(f)
    for x in box.sample(np.random.default_rng(5), 100):
        assert np.allclose(h.eval(x), f.eval(x), rtol=1e-12, atol=1e-15)


def test_compose_pointwise():
    f = random_fracaffine(2, 2, rng_seed=21, spread=0.2)
    g = random_fracaffine(2, 2, rng_seed=22, spread=0.2)
    h = compose(g, f)
    box = domain_box(f, half=0.3)
    rng = np.random.default_rng(7)
    count = 0
    for x in box.sample(rng, 200):
        fx = f.eval(x)
        if g.bottom(fx) < 0.05:
            continue
        count += 1
        lhs = h.eval(x)
        rhs = g.eval(fx)
        scale = max(1.0, float(np.linalg.norm(rhs)))
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * scale
    assert count >= 100


def test_compose_associative():
    f = random_fracaffine(2, 2, rng_seed=31, spread=0.15)
    g = random_fracaffine(2, 2, rng_seed=32, spread=0.15)
    h = random_fracaffine(2, 2, rng_seed=33, spread=0.15)
    left = compose(h, compose(g, f))
    right = compose(compose(h, g), f)
    for x in np.random.default_rng(9).uniform(-0.2, 0.2, size=(50, 2)):
        lv, rv = left.eval(x), right.eval(x)
        scale = max(1.0, float(np.linalg.norm(lv)))
        assert np.linalg.norm(lv - rv) <= 1e-10 * scale


def test_compose_dimension_and_domain_guards():
    f = random_fracaffine(2, 3, rng_seed=1)
    g = random_fracaffine(2, 2, rng_seed=2)
    with pytest.raises(DimensionMismatch):
        compose(g, f)
    shift = FracAffineMap(
        AffineMap(np.eye(1), [10.0]), AffineFunctional(np.zeros(1), 1.0), [0.0]
    )
    flip = FracAffineMap(
        AffineMap([[1.0]], [0.0]), AffineFunctional([-1.0], 1.0), [0.0]
    )
    with pytest.raises(EmptyDomain):
        compose(flip, shift)  # inner image 10 has denominator -9


def test_random_fracaffine_spread_zero_is_constant():
    f = random_fracaffine(2, 3, rng_seed=5, spread=0.0)
    assert np.all(f.bottom.row == 0.0)
    v = f.eval([0.0, 0.0])
    for x in np.random.default_rng(11).uniform(-1, 1, size=(10, 2)):
        assert np.allclose(f.eval(x), v, rtol=0, atol=0)


def test_random_fracaffine_deterministic():
    f = random_fracaffine(3, 2, rng_seed=77)
    g = random_fracaffine(3, 2, rng_seed=77)
    assert sup_param_distance(f, g) == 0.0
    assert random_fracaffine(1, 1, rng_seed=0).in_dim == 1
    with pytest.raises(DimensionMismatch):
        random_fracaffine(0, 1)
    with pytest.raises(ValueError):
        random_fracaffine(1, 1, spread=-0.5)


def test_random_seed1_certifies_clean():
    f = random_fracaffine(2, 2, rng_seed=1)
    oracle = as_oracle(f, domain_box(f))
    report = certify(oracle, CertifyConfig(trials=10_000, rng_seed=0))
    assert report.verdict == "pass"
    assert report.violations == 0


def test_json_round_trip_exact():
    f = random_fracaffine(3, 2, rng_seed=42)
    doc = f.to_json()
    g = FracAffineMap.from_json(doc)
    assert sup_param_distance(f, g) == 0.0
    assert np.array_equal(f.anchor, g.anchor)
    payload = json.loads(doc)
    assert payload["n"] == 3 and payload["m"] == 2
    assert len(payload["A"]) == 2 and len(payload["A"][0]) == 3


def test_from_json_dict_validation():
    doc = random_fracaffine(2, 2).to_json_dict()
    doc["A"] = [[1.0, 2.0]]
    with pytest.raises(DimensionMismatch):
        FracAffineMap.from_json_dict(doc)
    with pytest.raises(ValueError):
        FracAffineMap.from_json_dict({"n": 2})
    # unknown keys are ignored so richer documents stay loadable
    doc2 = random_fracaffine(2, 2).to_json_dict()
    doc2["tool_version"] = "0.0.0"
    FracAffineMap.from_json_dict(doc2)


def test_min_bottom_over_box_exact():
    f = scalar_moebius()  # normalized bottom: 0.5 x + 1
    region = SamplingRegion([-1.0], [1.0])
    assert min_bottom_over_box(f, region) == pytest.approx(0.5)
    region2 = SamplingRegion([-1.0, -2.0], [1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        min_bottom_over_box(f, region2)


def test_as_oracle_transparency():
    f = random_fracaffine(2, 2, rng_seed=14)
    box = domain_box(f)
    oracle = as_oracle(f, box)
    rng = np.random.default_rng(3)
    for x in box.sample(rng, 20):
        assert np.array_equal(oracle.eval(x), f.eval(x))
        assert oracle.in_domain(x)
    X = box.sample(rng, 8)
    assert np.array_equal(oracle.eval_many(X), f.eval_many(X))


def test_as_oracle_identity_map():
    ident = FracAffineMap(
        AffineMap(np.eye(2), np.zeros(2)),
        AffineFunctional(np.zeros(2), 1.0),
        np.zeros(2),
    )
    oracle = as_oracle(ident, SamplingRegion([-1.0, -1.0], [1.0, 1.0]))
    x = np.array([0.3, -0.8])
    assert np.array_equal(oracle.eval(x), x)


def test_as_oracle_region_escaping_domain():
    f = scalar_moebius()  # domain x > -2
    with pytest.raises(RegionEscapesDomain):
        as_oracle(f, SamplingRegion([-2.0], [0.0]))
    with pytest.raises(RegionEscapesDomain):
        as_oracle(f, SamplingRegion([-5.0], [-3.0]))
