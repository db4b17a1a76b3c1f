import numpy as np
import pytest

from tangentlift import bundle as bd
from tangentlift import geometry as geom
from tangentlift import killing as kl
from tangentlift.bundle import BundlePoint
from tangentlift.sampling import sample_bundle_points

KINDS = bd.KINDS
ROT_NABLA = np.array([[0.0, -1.0], [1.0, 0.0]])    # [h, i] = nabla_i X^h for the flat rotation


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("form", kl.FORMS)
def test_translation_lifts_are_parallel_and_killing(flat, kind, form):
    for q in sample_bundle_points(flat, 10, 0):
        assert kl.cov_deriv_lift(flat, "translation", kind, q, form).max_abs() <= 1e-12
        assert kl.lie_derivative_lift(flat, "translation", kind, q, form).max_abs() <= 1e-12
        assert kl.rotation_lift(flat, "translation", kind, q, form).max_abs() <= 1e-12


def test_rotation_vertical_cov_blocks(flat):
    t = kl.cov_deriv_lift(flat, "rotation", "vertical", BundlePoint([0.4, 1.2], [-0.7, 1.9]))
    np.testing.assert_array_equal(t.block(False, False), 0.0)
    np.testing.assert_array_equal(t.block(True, False), ROT_NABLA)


def test_specialized_cov_matches_generic_on_flat_charts(catalog):
    for sname in ("flat_cartesian", "flat_polar"):
        spec = catalog[sname]
        for q in sample_bundle_points(spec, 20, 1):
            for name in spec.vector_fields:
                for kind in KINDS:
                    a = kl.cov_deriv_lift(spec, name, kind, q, "closed").data
                    b = kl.cov_deriv_lift(spec, name, kind, q, "assembled").data
                    assert np.max(np.abs(a - b)) <= 1e-10


def test_sphere_horizontal_cov(sphere):
    q = sample_bundle_points(sphere, 1, 2)[0]
    assembled = kl.cov_deriv_lift(sphere, "dphi", "horizontal", q, "assembled")
    assert np.max(np.abs(assembled.block(False, False))) > 1e-3


def test_gradient_complete_rotation_vanishes(flat):
    for form in kl.FORMS:
        for q in sample_bundle_points(flat, 10, 3):
            assert kl.rotation_lift(flat, "gradient", "complete", q, form).max_abs() <= 1e-12


def test_rotation_vertical_upper_right(flat):
    t = kl.rotation_lift(flat, "rotation", "vertical", BundlePoint([0.1, 0.2], [0.3, 0.4]))
    # nabla_i X_j - nabla_j X_i with nabla_1 X_2 = 1, nabla_2 X_1 = -1
    np.testing.assert_array_equal(t.block(False, True), [[0.0, 2.0], [-2.0, 0.0]])


@pytest.mark.parametrize("op", [kl.rotation_lift, kl.lie_derivative_lift])
def test_printed_barred_barred_block_vanishes(catalog, op):
    for spec in catalog.values():
        q = sample_bundle_points(spec, 1, 4)[0]
        for name in spec.vector_fields:
            for kind in KINDS:
                assert not op(spec, name, kind, q).block(True, True).any()


def test_assembled_barred_barred_block(catalog):
    # zero for vertical and horizontal lifts; for complete lifts it carries
    # nabla_i X_j -/+ nabla_j X_i and so vanishes only for closed/Killing X
    for spec in catalog.values():
        for q in sample_bundle_points(spec, 3, 4):
            for name in spec.vector_fields:
                nl = geom.field_jet(spec, name, q.x).nabla_low
                for kind in KINDS:
                    r = kl.rotation_lift(spec, name, kind, q, "assembled").block(True, True)
                    s = kl.lie_derivative_lift(spec, name, kind, q, "assembled").block(True, True)
                    if kind == "complete":
                        r, s = r - (nl - nl.T), s - (nl + nl.T)
                    assert np.max(np.abs(r)) <= 1e-12
                    assert np.max(np.abs(s)) <= 1e-12


def test_assembled_rotation_antisymmetric_and_lie_symmetric(catalog):
    for spec in catalog.values():
        for q in sample_bundle_points(spec, 5, 5):
            for name in spec.vector_fields:
                for kind in KINDS:
                    r = kl.rotation_lift(spec, name, kind, q, "assembled").data
                    s = kl.lie_derivative_lift(spec, name, kind, q, "assembled").data
                    assert np.max(np.abs(r + r.T)) <= 1e-12
                    assert np.max(np.abs(s - s.T)) <= 1e-12


def test_sphere_horizontal_lie_upper_left(sphere):
    # K(2 g_ij y^s X_s - y^s g_sj X_i - y^s g_si X_j) with K = 1
    for q in sample_bundle_points(sphere, 10, 6):
        t = kl.lie_derivative_lift(sphere, "dphi", "horizontal", q)
        g = np.diag([1.0, np.sin(q.x[0]) ** 2])
        X = g @ np.array([0.0, 1.0])
        yX, yg = q.y @ X, g @ q.y
        expected = 2 * g * yX - np.outer(X, yg) - np.outer(yg, X)
        np.testing.assert_allclose(t.block(False, False), expected, atol=1e-12)
    assert np.max(np.abs(t.block(False, False))) > 1e-3


def test_closedness(flat, sphere):
    pts = sample_bundle_points(flat, 20, 7)
    rep = kl.closedness_check(flat, "gradient", pts)
    assert rep.antisym_max == 0.0 and rep.second_derivative_max == 0.0
    assert max(rep.rotation_blocks_max.values()) <= 1e-12
    assert rep.conditions_hold and rep.lift_closed and rep.implication_holds
    rep = kl.closedness_check(flat, "rotation", pts)
    assert rep.antisym_min >= 1.0 and not rep.conditions_hold
    rep = kl.closedness_check(sphere, "dphi", sample_bundle_points(sphere, 20, 7))
    assert rep.second_derivative_max > 1e-3


def test_killing_identity_symmetric_form(catalog):
    for sname in ("sphere", "hyperbolic", "revolution", "flat_polar"):
        spec = catalog[sname]
        for q in sample_bundle_points(spec, 20, 8):
            assert np.max(np.abs(kl.killing_identity_symmetric_residual(spec, "dphi", q))) <= 1e-12


def test_killing_identity_as_written_on_flat_killing_fields(flat):
    for q in sample_bundle_points(flat, 20, 8):
        for name in ("translation", "rotation"):
            assert np.max(np.abs(kl.killing_identity_residual(flat, name, q))) == 0.0


def test_classify_translation(flat):
    c = kl.classify_field(flat, "translation", 10, 0)
    assert c.base.killing and c.base.parallel
    assert all(c.parallel[k]["closed"] and c.parallel[k]["oracle"] for k in KINDS)
    assert all(c.killing[k]["closed"] and c.killing[k]["oracle"] for k in KINDS)
    assert [a.verdict for a in c.audits] == ["consistent"] * 3
    assert all(a.engines_agree for a in c.audits)


def test_classify_rotation(flat):
    c = kl.classify_field(flat, "rotation", 50, 1)
    assert c.base.killing and not c.base.parallel and c.base.second_parallel
    assert c.killing["horizontal"]["closed"]
    assert c.killing["complete"]["closed"] and c.killing["complete"]["oracle"]
    audits = {a.theorem: a for a in c.audits}
    assert audits["T2a"].verdict == "counterexample-candidate"
    assert audits["T2a"].witness is not None
    assert audits["T2b"].verdict == "consistent"


def test_classify_sphere(sphere):
    c = kl.classify_field(sphere, "dphi", 20, 2)
    assert c.base.killing and not c.base.second_parallel
    assert c.lifts["horizontal"].max_abs("lie_closed") > 1e-3
    assert c.lifts["horizontal"].max_abs("lie_oracle") > 1e-3
    assert {a.theorem: a.verdict for a in c.audits}["T2b"] == "consistent"


def test_bad_arguments(flat):
    q = BundlePoint([0.0, 0.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        kl.cov_deriv_lift(flat, "rotation", "vertical", q, form="other")
    with pytest.raises(ValueError):
        kl.classify_field(flat, "rotation", 0, 0)
    with pytest.raises(KeyError):
        kl.classify_field(flat, "missing", 5, 0)


def test_is_zero():
    assert kl.is_zero(1e-10, 1.0)
    assert not kl.is_zero(1e-8, 1.0)
    assert kl.is_zero(1e-7, 1e3)


def test_rotation_plus_lie_is_twice_covector_derivative(catalog):
    for spec in catalog.values():
        q = sample_bundle_points(spec, 1, 9)[0]
        for name in spec.vector_fields:
            for kind in KINDS:
                r = kl.rotation_lift(spec, name, kind, q, "assembled").data
                s = kl.lie_derivative_lift(spec, name, kind, q, "assembled").data
                d = kl.covector_derivative(spec, name, kind, q).data
                assert np.max(np.abs(r + s - 2 * d)) <= 1e-12


def test_vertical_lie_blocks_track_base_killing_residual(catalog):
    for spec in catalog.values():
        for q in sample_bundle_points(spec, 5, 10):
            for name in spec.vector_fields:
                base = np.max(np.abs(geom.killing_residual_base(spec, name, q.x)))
                assert kl.lie_derivative_lift(spec, name, "vertical", q).max_abs() == pytest.approx(base, abs=1e-12)


def test_symmetrized_printed_block_is_symmetric(catalog):
    for spec in catalog.values():
        q = sample_bundle_points(spec, 1, 11)[0]
        for name in spec.vector_fields:
            t = kl.lie_derivative_lift(spec, name, "complete", q, symmetrize=True).block(False, False)
            assert np.max(np.abs(t - t.T)) <= 1e-12
