import numpy as np
import pytest

from liftlab import manifold
from liftlab.errors import ConfigError


def test_euclidean_metric_is_identity(euclid2):
    g, ginv = manifold.metric_at(euclid2, [0.3, -1.7])
    assert np.allclose(g, np.eye(2))
    assert np.allclose(ginv, np.eye(2))


def test_polar_metric_values(polar2):
    g, ginv = manifold.metric_at(polar2, [2.0, 0.0])
    assert np.allclose(g, np.diag([1.0, 4.0]))
    assert np.allclose(ginv, np.diag([1.0, 0.25]))


def test_halfplane_metric_values(halfplane2):
    g, _ = manifold.metric_at(halfplane2, [0.0, 2.0])
    assert np.allclose(g, np.diag([0.25, 0.25]))


def test_metric_inverse_identity_on_catalog(rng):
    for name, make in manifold.CATALOG.items():
        spec = make()
        for p in manifold.sample_points(spec, 10, rng):
            g, ginv = manifold.metric_at(spec, p)
            assert np.abs(g @ ginv - np.eye(spec.dim)).max() < 1e-12, name


def test_christoffel_euclidean_vanishes(euclid2):
    ch = manifold.christoffel(euclid2, [0.5, 0.5])
    assert np.abs(ch.gamma).max() == 0.0


def test_christoffel_polar_hand_values(polar2):
    # diag(1, r^2): Gamma^r_tt = -r, Gamma^t_rt = 1/r
    ch = manifold.christoffel(polar2, [2.0, 0.3])
    assert ch.gamma[0, 1, 1] == pytest.approx(-2.0, abs=1e-12)
    assert ch.gamma[1, 0, 1] == pytest.approx(0.5, abs=1e-12)
    assert ch.gamma[1, 1, 0] == pytest.approx(0.5, abs=1e-12)
    assert ch.gamma[0, 0, 0] == pytest.approx(0.0, abs=1e-12)


def test_christoffel_halfplane_hand_values(halfplane2):
    ch = manifold.christoffel(halfplane2, [0.0, 1.0])
    assert ch.gamma[0, 0, 1] == pytest.approx(-1.0, abs=1e-12)  # Gamma^x_xy
    assert ch.gamma[1, 0, 0] == pytest.approx(1.0, abs=1e-12)   # Gamma^y_xx
    assert ch.gamma[1, 1, 1] == pytest.approx(-1.0, abs=1e-12)  # Gamma^y_yy


def test_christoffel_lower_index_symmetry(sphere2, rng):
    for p in manifold.sample_points(sphere2, 10, rng):
        gamma = manifold.christoffel(sphere2, p).gamma
        assert np.abs(gamma - gamma.transpose(0, 2, 1)).max() < 1e-12


def test_christoffel_against_finite_difference_metric(sphere2, halfplane2, rng):
    # independent oracle: rebuild Gamma from centered differences of g
    h = 1e-5
    for spec in (sphere2, halfplane2):
        for p in manifold.sample_points(spec, 5, rng):
            n = spec.dim
            dg = np.zeros((n, n, n))
            for k in range(n):
                pp, pm = np.array(p), np.array(p)
                pp[k] += h
                pm[k] -= h
                dg[k] = (manifold.metric_at(spec, pp)[0] - manifold.metric_at(spec, pm)[0]) / (2 * h)
            _, ginv = manifold.metric_at(spec, p)
            expect = np.zeros((n, n, n))
            for k in range(n):
                for i in range(n):
                    for j in range(n):
                        expect[k, i, j] = 0.5 * sum(
                            ginv[k, m] * (dg[i][m, j] + dg[j][m, i] - dg[m][i, j])
                            for m in range(n)
                        )
            gamma = manifold.christoffel(spec, p).gamma
            assert np.abs(gamma - expect).max() < 1e-7


def test_metric_compatibility_on_catalog(rng):
    # d_k g_ij - Gamma^a_ki g_aj - Gamma^a_kj g_ia = 0
    for name, make in manifold.CATALOG.items():
        spec = make()
        n = spec.dim
        for p in manifold.sample_points(spec, 100, rng):
            x = list(p)
            g = np.array(manifold.metric_matrix(spec, x))
            dg = np.array(manifold.metric_partials(spec, x))
            gamma = np.array(manifold.christoffel_matrix(spec, x))
            defect = dg - np.einsum("aki,aj->kij", gamma, g) - np.einsum(
                "akj,ia->kij", gamma, g
            )
            assert np.abs(defect).max() < 1e-9, name


def test_curvature_flat_charts_vanish(euclid2, polar2, torus2, rng):
    for spec in (euclid2, polar2, torus2):
        for p in manifold.sample_points(spec, 20, rng):
            cv = manifold.curvature(spec, p)
            assert np.abs(cv.k).max() <= 1e-9, spec.name
            assert abs(cv.sectional) <= 1e-9


def test_polar_chart_curvature_vanishes_despite_nonzero_gamma(polar2):
    p = [1.3, 0.7]
    assert np.abs(manifold.christoffel(polar2, p).gamma).max() > 0.1
    assert np.abs(manifold.curvature(polar2, p).k).max() <= 1e-12


def test_sphere_sectional_curvature_is_plus_one(sphere2, rng):
    cv = manifold.curvature(sphere2, [np.pi / 2, 0.0])
    assert cv.sectional == pytest.approx(1.0, abs=1e-8)
    for p in manifold.sample_points(sphere2, 20, rng):
        assert manifold.curvature(sphere2, p).sectional == pytest.approx(1.0, abs=1e-8)


def test_halfplane_sectional_curvature_is_minus_one(halfplane2, rng):
    for p in manifold.sample_points(halfplane2, 20, rng):
        assert manifold.curvature(halfplane2, p).sectional == pytest.approx(-1.0, abs=1e-8)


@pytest.mark.parametrize("name,kappa", [("sphere2", 1.0), ("halfplane2", -1.0)])
def test_constant_curvature_identity(name, kappa, rng):
    # lowered tensor K_{ijk}^a g_{am} equals kappa (g_im g_jk - g_jm g_ik)
    spec = manifold.catalog_manifold(name)
    for p in manifold.sample_points(spec, 25, rng):
        g, _ = manifold.metric_at(spec, p)
        kt = manifold.curvature(spec, p).k
        lowered = np.einsum("ijka,am->ijkm", kt, g)
        expect = kappa * (
            np.einsum("im,jk->ijkm", g, g) - np.einsum("jm,ik->ijkm", g, g)
        )
        assert np.abs(lowered - expect).max() < 1e-7


def test_curvature_first_pair_antisymmetry(sphere2, halfplane2, rng):
    for spec in (sphere2, halfplane2):
        for p in manifold.sample_points(spec, 10, rng):
            kt = manifold.curvature(spec, p).k
            assert np.abs(kt + kt.transpose(1, 0, 2, 3)).max() < 1e-10


def test_sphere_radius_scales_curvature():
    spec = manifold.sphere2(radius=2.0)
    cv = manifold.curvature(spec, [1.2, 0.5])
    assert cv.sectional == pytest.approx(0.25, abs=1e-8)


def test_spec_validation_rejects_asymmetric_metric():
    with pytest.raises(ConfigError, match="not symmetric"):
        manifold.manifold_from_strings(
            "bad", 2, [["1", "x1"], ["0", "1"]], [(0.5, 1.5), (0.5, 1.5)]
        )


def test_spec_validation_rejects_indefinite_metric():
    with pytest.raises(ConfigError, match="not positive definite"):
        manifold.manifold_from_strings(
            "bad", 2, [["1", "0"], ["0", "-1"]], [(0.5, 1.5), (0.5, 1.5)]
        )


def test_unknown_catalog_name():
    with pytest.raises(ConfigError, match="unknown catalog manifold"):
        manifold.catalog_manifold("klein_bottle")


def test_euclidean3_in_catalog():
    spec = manifold.catalog_manifold("euclidean3")
    assert spec.dim == 3
    g, _ = manifold.metric_at(spec, [0.1, 0.2, 0.3])
    assert np.allclose(g, np.eye(3))
