import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cartan_kit import manifold as M
from cartan_kit.manifold import ManifoldPoint, TangentVector


def stereo_oracle(x, chart):
    # independent formulas: projection from the north pole, then from the south pole with a reflection
    if chart == 0:
        return np.array([x[0] / (1 - x[2]), x[1] / (1 - x[2])])
    return np.array([x[0] / (1 + x[2]), -x[1] / (1 + x[2])])


def fd_jacobian(f, x, h=1e-6):
    cols = []
    for e in np.eye(x.size):
        cols.append((f(x + h * e) - f(x - h * e)) / (2 * h))
    return np.stack(cols, axis=1)


def test_change_chart_same_chart_is_identity(sphere):
    p = ManifoldPoint(0, [0.3, -0.2])
    assert M.change_chart(sphere, p, 0) is p


def test_equator_point_changes_chart(sphere):
    x = np.array([np.cos(0.4), np.sin(0.4), 0.0])
    p = ManifoldPoint(0, stereo_oracle(x, 0))
    q = M.change_chart(sphere, p, 1)
    assert np.allclose(q.coords, stereo_oracle(x, 1), atol=1e-12)
    back = M.change_chart(sphere, q, 0)
    assert np.linalg.norm(back.coords - p.coords) < 1e-9
    assert np.allclose(M.sphere_embed(q), x, atol=1e-12)


def test_chart_error_outside_overlap(sphere):
    with pytest.raises(M.ChartError):
        M.change_chart(sphere, ManifoldPoint(0, [0.0, 0.0]), 1)  # south pole has no north-chart image in range


def test_torus_wrap_same_point(torus):
    p = ManifoldPoint(0, [-2.0, 2.0])
    q = M.change_chart(torus, p, 3)
    assert np.allclose(q.coords, [2 * np.pi - 2.0, 2.0])
    assert np.allclose(M.torus_embed(p), M.torus_embed(q))
    assert np.allclose(M.change_chart(torus, q, 0).coords, p.coords)


def test_push_tangent_matches_fd_jacobian_oracle(sphere):
    pts = [p for p in M.sample_points(sphere, 60, 4) if len(M.charts_containing(sphere, p)) == 2]
    assert pts
    for p in pts:
        other = 1 - p.chart
        v = TangentVector(p, [0.3, -1.1])
        w = M.push_tangent(sphere, v, other)
        J = fd_jacobian(lambda c: sphere.transition_fn(other, p.chart, c), p.coords)
        assert np.linalg.norm(w.comps - J @ v.comps) < 1e-6
        back = M.push_tangent(sphere, w, p.chart)
        assert np.linalg.norm(back.comps - v.comps) < 1e-6


def test_push_zero_and_identity(sphere):
    e = M.euclidean(2)
    p = ManifoldPoint(0, [0.1, 0.2])
    assert np.allclose(M.push_tangent(e, TangentVector(p, [1.0, 2.0]), 0).comps, [1.0, 2.0])
    q = ManifoldPoint(0, [0.8, 0.1])
    assert np.allclose(M.push_tangent(sphere, TangentVector(q, [0, 0]), 1).comps, 0)


def test_transition_orientation_preserving(sphere):
    for p in M.sample_points(sphere, 40, 2):
        if len(M.charts_containing(sphere, p)) == 2:
            assert np.linalg.det(M.transition_jacobian(sphere, 1 - p.chart, p)) > 0


def test_sampling_deterministic_and_covering(sphere, torus):
    a = M.sample_points(sphere, 100, 11)
    b = M.sample_points(sphere, 100, 11)
    assert all(p.chart == q.chart and np.array_equal(p.coords, q.coords) for p, q in zip(a, b))
    counts = np.bincount([p.chart for p in a], minlength=2)
    assert counts.min() >= 30
    t = M.sample_points(torus, 200, 5)
    assert set(p.chart for p in t) == {0, 1, 2, 3}
    one = M.sample_points(sphere, 1, 0)
    assert len(one) == 1 and np.array_equal(one[0].coords, M.sample_points(sphere, 1, 0)[0].coords)


def test_sample_count_must_be_positive(sphere):
    with pytest.raises(ValueError):
        M.sample_points(sphere, 0, 1)


def test_samples_respect_margin(sphere, torus):
    for m in (sphere, torus):
        for p in M.sample_points(m, 100, 3):
            assert m.charts[p.chart].contains(p.coords, 0.1)


def test_partition_of_unity_sums_to_one(sphere, torus):
    for m in (sphere, torus):
        for p in M.sample_points(m, 50, 9):
            w = M.partition_of_unity(m, p)
            assert abs(w.sum() - 1) < 1e-12 and np.all(w >= 0)


def test_cocycle_of_chart_transitions(torus, sphere):
    for m in (torus, sphere):
        for p in M.sample_points(m, 50, 6):
            idx = M.charts_containing(m, p)
            for i in idx:
                for j in idx:
                    q = M.change_chart(m, M.change_chart(m, p, i), j)
                    r = M.change_chart(m, p, j)
                    assert np.linalg.norm(q.coords - r.coords) < 1e-8


def _sqrt_det_round(p):
    return 4.0 / (1.0 + p.coords @ p.coords) ** 2


def test_sphere_area(sphere):
    assert abs(M.integrate_2form(sphere, _sqrt_det_round) - 4 * np.pi) < 1e-3


def test_gauss_bonnet_unit_curvature(sphere):
    # K = 1 on the unit sphere, so K dA has the same density
    assert abs(M.integrate_2form(sphere, lambda p: 1.0 * _sqrt_det_round(p)) - 4 * np.pi) < 1e-3


def test_zero_density_and_torus_area(sphere, torus):
    assert M.integrate_2form(sphere, lambda p: 0.0) == 0.0
    assert abs(M.integrate_2form(torus, lambda p: 1.0) - 4 * np.pi**2) < 1e-3


def test_integration_linear(sphere):
    f = lambda p: _sqrt_det_round(p) * M.sphere_embed(p)[2] ** 2
    g = _sqrt_det_round
    lhs = M.integrate_2form(sphere, lambda p: 2 * f(p) - 3 * g(p))
    rhs = 2 * M.integrate_2form(sphere, f) - 3 * M.integrate_2form(sphere, g)
    assert abs(lhs - rhs) < 1e-4
    assert abs(M.integrate_2form(sphere, f) - 4 * np.pi / 3) < 1e-3


def test_quadrature_refinement_is_stable(sphere):
    tol = 2e-4
    coarse = sum(w * _sqrt_det_round(p) for i in range(2) for p, w in M._weighted_nodes(sphere, i, 64))
    fine = sum(w * _sqrt_det_round(p) for i in range(2) for p, w in M._weighted_nodes(sphere, i, 128))
    assert abs(coarse - fine) < 10 * tol


def test_quadrature_nonconvergence_raises(sphere):
    with pytest.raises(M.QuadratureError):
        M.integrate_2form(sphere, _sqrt_det_round, tol=1e-15, max_levels=1)


def test_integrate_requires_compact_2d():
    with pytest.raises(ValueError):
        M.integrate_2form(M.euclidean(2), lambda p: 1.0)


def test_christoffel_matches_conformal_formula(sphere, round_metric):
    # g = e^{2 phi} delta with phi = log(2 / (1 + r^2)):
    # Gamma^k_ij = delta_ik d_j phi + delta_jk d_i phi - delta_ij d_k phi
    for p in M.sample_points(sphere, 20, 1):
        x = p.coords
        dphi = -2 * x / (1 + x @ x)
        d = np.eye(2)
        oracle = np.einsum("ki,j->kij", d, dphi) + np.einsum("kj,i->kij", d, dphi) - np.einsum("ij,k->kij", d, dphi)
        assert np.linalg.norm(M.christoffel(round_metric, p) - oracle) < 1e-8


def test_random_torus_metric_positive(torus, torus_metric):
    assert M.metric_min_eigenvalue(torus_metric, M.sample_points(torus, 100, 2)) > 0.4


@given(st.floats(0.05, 3.9), st.floats(0, 2 * np.pi))
def test_sphere_roundtrip_property(r, phi):
    sphere = M.sphere2()
    p = ManifoldPoint(0, [r * np.cos(phi), r * np.sin(phi)])
    if r > 0.26:
        q = M.change_chart(sphere, p, 1)
        assert np.linalg.norm(M.change_chart(sphere, q, 0).coords - p.coords) < 1e-9
