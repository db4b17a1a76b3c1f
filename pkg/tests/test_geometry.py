import math

import numpy as np
import pytest

from tangentlift import geometry as geom
from tangentlift.sampling import sample_base_points
from tangentlift.specfile import parse_spec

R, TH = 0, 1     # flat_polar coordinate indices
T, P = 0, 1      # sphere coordinate indices


def test_flat_metric_is_identity(flat):
    for x in sample_base_points(flat, 5, 0):
        np.testing.assert_array_equal(geom.metric_at(flat, x), np.eye(2))
        np.testing.assert_array_equal(geom.christoffel_at(flat, x), 0.0)


def test_polar_metric_and_inverse(polar):
    p = [2.0, 0.4]
    np.testing.assert_allclose(geom.metric_at(polar, p), np.diag([1.0, 4.0]), rtol=0, atol=1e-15)
    np.testing.assert_allclose(geom.inverse_metric_at(polar, p), np.diag([1.0, 0.25]), rtol=0, atol=1e-15)


def test_sphere_metric(sphere):
    np.testing.assert_allclose(geom.metric_at(sphere, [math.pi / 6, 1.0]), np.diag([1.0, 0.25]), atol=1e-15)


def test_metric_times_inverse(catalog):
    for spec in catalog.values():
        for x in sample_base_points(spec, 20, 4):
            np.testing.assert_allclose(geom.metric_at(spec, x) @ geom.inverse_metric_at(spec, x), np.eye(2),
                                       atol=1e-12)


def test_singular_metric_rejected(sphere):
    with pytest.raises(geom.SingularMetricError):
        geom.inverse_metric_at(sphere, [0.0, 1.0])


def test_polar_christoffel():
    spec = parse_spec("""
[manifold]
name = "polar"
dim = 2
coords = "r, theta"
[metric]
g[0][0] = "1"
g[1][1] = "r^2"
[domain]
r = 1, 3
theta = 0, 6
""")
    G = geom.christoffel_at(spec, [2.0, 0.3])
    expected = np.zeros((2, 2, 2))
    expected[R, TH, TH] = -2.0
    expected[TH, R, TH] = expected[TH, TH, R] = 0.5
    np.testing.assert_allclose(G, expected, atol=1e-15)


def test_sphere_christoffel(sphere):
    G = geom.christoffel_at(sphere, [math.pi / 4, 2.0])
    assert G[T, P, P] == pytest.approx(-0.5, rel=1e-14)
    assert G[P, T, P] == pytest.approx(1.0, rel=1e-14)
    assert G[P, P, T] == pytest.approx(1.0, rel=1e-14)
    np.testing.assert_allclose(G, np.swapaxes(G, 1, 2), atol=0)


def test_polar_is_flat(polar):
    for x in sample_base_points(polar, 10, 1):
        assert np.max(np.abs(geom.riemann_at(polar, x))) <= 1e-12


def test_sphere_lowered_curvature(sphere):
    geo = geom.base_geometry(sphere, [math.pi / 4, 1.0])
    Rl = geo.riemann_lowered
    # R_{hkji} = g_{hm} R^m_{kji} is antisymmetric in (k, j); the unit
    # sphere then has R_{hkji} = g_{hk} g_{ji} - g_{hj} g_{ki}
    assert Rl[T, T, P, P] == pytest.approx(0.5, rel=1e-13)
    assert Rl[T, P, T, P] == pytest.approx(-0.5, rel=1e-13)
    g = geo.g
    expected = np.einsum("hk,ji->hkji", g, g) - np.einsum("hj,ki->hkji", g, g)
    np.testing.assert_allclose(Rl, expected, atol=1e-13)


def test_curvature_symmetries(catalog):
    for spec in catalog.values():
        for x in sample_base_points(spec, 20, 2):
            Rm = geom.riemann_at(spec, x)
            assert np.max(np.abs(Rm + np.swapaxes(Rm, 1, 2))) <= 1e-12
            bianchi = Rm + np.einsum("hjik->hkji", Rm) + np.einsum("hikj->hkji", Rm)
            assert np.max(np.abs(bianchi)) <= 1e-10


def test_metric_compatibility(catalog):
    for spec in catalog.values():
        for x in sample_base_points(spec, 50, 3):
            assert np.max(np.abs(geom.metric_compatibility_residual(spec, x))) <= 1e-10


def test_raise_lower_round_trip(catalog):
    rng = np.random.default_rng(0)
    for spec in catalog.values():
        for x in sample_base_points(spec, 10, 5):
            g, gi = geom.metric_at(spec, x), geom.inverse_metric_at(spec, x)
            t = rng.normal(size=(2, 2))
            np.testing.assert_allclose(g @ (gi @ t), t, atol=1e-12)


def test_translation_and_rotation_derivatives(flat):
    x = [0.7, -1.2]
    nabla, nabla2 = geom.covariant_derivatives_at(flat, "translation", x)
    assert not nabla.any() and not nabla2.any()
    nabla, nabla2 = geom.covariant_derivatives_at(flat, "rotation", x)
    # nabla[i, h] = nabla_i X^h
    np.testing.assert_array_equal(nabla, [[0.0, 1.0], [-1.0, 0.0]])
    assert not nabla2.any()


def test_ricci_identity(sphere):
    for x in sample_base_points(sphere, 20, 6):
        jet = geom.field_jet(sphere, "dphi", x)
        Rm = geom.riemann_at(sphere, x)
        commutator = jet.nabla2 - np.swapaxes(jet.nabla2, 0, 1)       # [i, j, h]
        expected = np.einsum("hijm,m->ijh", Rm, jet.X)
        assert np.max(np.abs(commutator - expected)) <= 1e-9
    assert np.max(np.abs(geom.field_jet(sphere, "dphi", [1.0, 0.0]).nabla2)) > 1e-3


def test_killing_residuals(flat, sphere):
    x = [0.3, -0.8]
    assert not geom.killing_residual_base(flat, "rotation", x).any()
    np.testing.assert_array_equal(geom.killing_residual_base(flat, "dilation", x), 2 * np.eye(2))
    assert np.max(np.abs(geom.killing_residual_base(sphere, "dphi", [1.1, 2.0]))) <= 1e-12


def test_catalog_killing_fields(catalog):
    declared = [(s, "dphi") for s in ("flat_polar", "sphere", "hyperbolic", "revolution")]
    declared += [("flat_cartesian", "translation"), ("flat_cartesian", "rotation")]
    for sname, field in declared:
        spec = catalog[sname]
        for x in sample_base_points(spec, 50, 7):
            assert np.max(np.abs(geom.killing_residual_base(spec, field, x))) <= 1e-10


def test_unknown_field(flat):
    with pytest.raises(geom.UnknownFieldError):
        geom.field_jet(flat, "nope", [0.0, 0.0])
