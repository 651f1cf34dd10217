import numpy as np
import pytest

from liftlab import expr_dsl, lift_fields as lf, manifold, tangent_bundle as tb
from liftlab.errors import ConfigError
from liftlab.tangent_bundle import TMPoint


def test_complete_lift_constant_field_flat(euclid2):
    v = lf.base_field_from_strings(["1", "0"])
    xc = lf.complete_lift(v, euclid2)
    p = TMPoint([0.3, -0.8], [1.1, 0.2])
    assert np.allclose(xc.adapted_components(p), [1, 0, 0, 0])
    assert xc.kind == "complete"


def test_complete_lift_dilation_1d():
    line = manifold.euclidean(1)
    v = lf.base_field_from_strings(["x1"], 1)
    xc = lf.complete_lift(v, line)
    p = TMPoint([1.7], [0.4])
    # horiz = x1, vert = y1 (Gamma = 0, dV = 1)
    assert np.allclose(xc.adapted_components(p), [1.7, 0.4])


def test_complete_lift_rotation_flat(euclid2):
    v = lf.catalog_field("rotation")
    xc = lf.complete_lift(v, euclid2)
    p = TMPoint([0.5, 0.2], [1.0, 2.0])
    # vert = (dV) y with dV the rotation generator
    assert np.allclose(xc.adapted_components(p), [-0.2, 0.5, -2.0, 1.0])


def test_horizontal_and_vertical_lifts(euclid2, torus2, sphere2):
    v = lf.base_field_from_strings(["1", "0"])
    p = TMPoint([0.1, 0.2], [5.0, -3.0])
    xh = lf.horizontal_lift(v, euclid2)
    xv = lf.vertical_lift(v, euclid2)
    assert np.allclose(xh.adapted_components(p), [1, 0, 0, 0])
    assert np.allclose(xv.adapted_components(p), [0, 0, 1, 0])
    # adapted components are chart-independent of the metric
    assert np.allclose(lf.horizontal_lift(v, torus2).adapted_components(p), [1, 0, 0, 0])
    ang = lf.catalog_field("angular")
    p_s = TMPoint([1.1, 0.7], [0.4, 0.2])
    assert np.allclose(
        lf.horizontal_lift(ang, sphere2).adapted_components(p_s), [0, 1, 0, 0]
    )


def test_affine_field_canonical_dilation(euclid2):
    x = lf.canonical_dilation_field(euclid2)
    p = TMPoint([0.3, 0.4], [1.5, -2.5])
    assert np.allclose(x.adapted_components(p), [0, 0, 1.5, -2.5])
    assert x.kind == "fiber_preserving"


def test_affine_field_constant_beta_equals_vertical_lift(euclid2, torus2):
    for spec in (euclid2, torus2):
        aff = lf.affine_fiber_field(
            spec, [["0", "0"], ["0", "0"]], ["1", "0"], ["0", "0"]
        )
        xv = lf.vertical_lift(lf.base_field_from_strings(["1", "0"]), spec)
        for _ in range(5):
            p = TMPoint(np.random.default_rng(3).normal(size=2), [0.7, 0.1])
            assert np.allclose(aff.adapted_components(p), xv.adapted_components(p))


def test_complete_lift_equals_affine_with_alpha(sphere2, rng):
    # alpha^m_a = Gamma^m_{ah} V^h + d_a V^m, beta = 0, horiz = V
    v = lf.catalog_field("angular")
    xc = lf.complete_lift(v, sphere2)
    for x in manifold.sample_points(sphere2, 8, rng):
        y = rng.normal(size=2)
        p = TMPoint(x, y)
        alpha = np.array(lf.complete_lift_alpha(v, sphere2, list(x)))
        direct = xc.adapted_components(p)
        assert np.allclose(direct[2:], alpha @ y, atol=1e-12)
        assert np.allclose(direct[:2], v.values(list(x)))


def test_alpha_transforms_as_one_one_tensor(euclid2, polar2, rng):
    # the dilation field in both charts; alpha' = J alpha J^{-1} under the
    # cartesian -> polar chart map
    v_cart = lf.catalog_field("dilation")
    v_pol = lf.catalog_field("radial_dilation")
    for _ in range(10):
        x = np.array([rng.uniform(0.8, 2.5), rng.uniform(-1.2, 1.2)])
        r = float(np.hypot(*x))
        theta = float(np.arctan2(x[1], x[0]))
        jac = np.array([[x[0] / r, x[1] / r], [-x[1] / r**2, x[0] / r**2]])
        a_cart = np.array(lf.complete_lift_alpha(v_cart, euclid2, list(x)))
        a_pol = np.array(lf.complete_lift_alpha(v_pol, polar2, [r, theta]))
        assert np.abs(jac @ a_cart @ np.linalg.inv(jac) - a_pol).max() < 1e-8


def test_coordinate_components_polar_worked_example(polar2):
    p = TMPoint([2.0, 0.0], [1.0, 3.0])
    v = lf.catalog_field("angular")
    xh = lf.horizontal_lift(v, polar2)
    assert np.allclose(lf.coordinate_components(xh, polar2, p), [0.0, 1.0, 6.0, -0.5])


def test_coordinate_components_euclidean_identity(euclid2):
    x = lf.complete_lift(lf.catalog_field("rotation"), euclid2)
    p = TMPoint([0.5, 0.2], [1.0, 2.0])
    assert np.allclose(
        lf.coordinate_components(x, euclid2, p), x.adapted_components(p)
    )


def test_coordinate_components_round_trip(sphere2, rng):
    x = lf.complete_lift(lf.catalog_field("angular"), sphere2)
    for xp in manifold.sample_points(sphere2, 6, rng):
        p = TMPoint(xp, rng.normal(size=2))
        fr = tb.adapted_frame(sphere2, p)
        coord = lf.coordinate_components(x, sphere2, p)
        assert np.abs(fr.to_adapted_vector(coord) - x.adapted_components(p)).max() < 1e-12


def test_vertical_part_matches_in_both_bases(halfplane2, rng):
    # vertical lifts have identical adapted and coordinate vertical blocks
    v = lf.base_field_from_strings(["x1", "x2"])
    xv = lf.vertical_lift(v, halfplane2)
    for xp in manifold.sample_points(halfplane2, 6, rng):
        p = TMPoint(xp, rng.normal(size=2))
        coord = lf.coordinate_components(xv, halfplane2, p)
        assert np.allclose(coord[2:], xv.adapted_components(p)[2:])


def test_fiber_preserving_horizontals_ignore_y(sphere2, rng):
    from liftlab.dualnum import Dual

    fields = [
        lf.complete_lift(lf.catalog_field("angular"), sphere2),
        lf.canonical_dilation_field(sphere2),
        lf.horizontal_lift(lf.catalog_field("angular"), sphere2),
    ]
    for x_field in fields:
        for xp in manifold.sample_points(sphere2, 5, rng):
            y = rng.normal(size=2)
            for k in range(2):
                xs = [Dual(float(v), 0.0) for v in xp]
                ys = [Dual(float(v), 1.0 if q == k else 0.0) for q, v in enumerate(y)]
                vals = x_field.horiz(xs, ys)
                for v in vals:
                    im = v.im if isinstance(v, Dual) else 0.0
                    assert abs(im) <= 1e-10


def test_general_field_construction_and_flag():
    x = lf.general_field(["x3", "0"], ["0", "x1*x4"], 2)
    assert x.kind == "general"
    assert not x.fiber_preserving
    p = TMPoint([2.0, 0.0], [5.0, 7.0])
    assert np.allclose(x.adapted_components(p), [5.0, 0.0, 0.0, 14.0])


def test_shape_mismatches_rejected(euclid2):
    with pytest.raises(ConfigError):
        lf.affine_fiber_field(euclid2, [["1"]], ["0", "0"], ["0", "0"])
    with pytest.raises(ConfigError):
        lf.base_field_from_strings(["x1"], 2)
    with pytest.raises(ConfigError):
        lf.complete_lift(lf.base_field_from_strings(["x1"], 1), euclid2)


def test_catalog_pairs_dimensions_agree():
    for spec, field in lf.catalog_cases():
        assert field.dim == spec.dim
        vals = field.values([0.5] * spec.dim)
        assert len(vals) == spec.dim
