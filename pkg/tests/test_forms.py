import numpy as np
import pytest

from cartan_kit import bundle as B
from cartan_kit import connection as C
from cartan_kit import forms as F
from cartan_kit import lie
from cartan_kit import manifold as M


def test_fundamental_form_is_tensorial(torus_frames, torus_samples):
    theta = C.fundamental_form(torus_frames).form
    recs = F.check_tensorial(theta, torus_samples, tol=1e-9, equivariance_tol=1e-7)
    assert F.passed(recs), [(r.name, r.max_residual) for r in recs]


def test_connection_is_pseudotensorial_but_not_horizontal(sphere_lc, sphere_so_samples):
    gamma = sphere_lc.form
    assert F.check_pseudotensorial(gamma, sphere_so_samples, tol=1e-6).passed
    assert not F.check_horizontal(gamma, sphere_so_samples, tol=1e-6).passed


def test_constant_form_is_not_pseudotensorial(torus_frames, torus_samples):
    rep = lie.standard_rep(torus_frames.group)
    const = F.ModuleValuedForm(torus_frames, 1, rep, lambda p, v: np.array([v.base[0], 0.0]), name="const")
    assert not F.check_pseudotensorial(const, torus_samples, tol=1e-6).passed


def test_zero_form_passes_everything(sphere_so, sphere_so_samples):
    z = F.zero_form(sphere_so, 2, lie.standard_rep(sphere_so.group))
    assert F.passed(F.check_tensorial(z, sphere_so_samples, tol=1e-12))
    assert F.check_multilinear(z, sphere_so_samples).passed


def test_two_form_antisymmetry_and_multilinearity(torus_frames, torus_samples):
    theta = C.fundamental_form(torus_frames).form

    # theta(ph) = h^-1 theta(p), so theta ^ theta picks up det(h)^-1 = rho(h^-1) with rho = det
    def wedge(p, v, w):
        a, b = theta(p, v), theta(p, w)
        return np.array([a[0] * b[1] - a[1] * b[0]])

    rep = lie.Representation(torus_frames.group, 1, lambda m: np.array([[np.linalg.det(m)]]), lambda c: np.array([[np.trace(torus_frames.group.hat(c))]]), name="det")
    phi = F.ModuleValuedForm(torus_frames, 2, rep, wedge, name="theta^theta")
    assert F.check_multilinear(phi, torus_samples).passed
    for s in torus_samples[:10]:
        v, w = s.tangents
        assert np.allclose(phi(s.p, v, w), -phi(s.p, w, v))
    assert F.passed(F.check_tensorial(phi, torus_samples, tol=1e-9, equivariance_tol=1e-6))


def test_wrong_arity_raises(torus_frames, torus_samples):
    theta = C.fundamental_form(torus_frames).form
    s = torus_samples[0]
    with pytest.raises(F.FormError):
        theta(s.p, *s.tangents)


def test_unsupported_degree(torus_frames):
    with pytest.raises(F.FormError):
        F.zero_form(torus_frames, 3, lie.standard_rep(torus_frames.group))


def test_roundtrips_and_lift_independence(sphere_so, sphere_so_samples):
    theta = C.fundamental_form(sphere_so).form
    assert F.check_form_roundtrip(theta, sphere_so_samples, tol=1e-9).passed
    assert F.check_lift_independence(theta, sphere_so_samples, tol=1e-9).passed
    beta = F.tensorial_to_bundle(theta)
    assert F.check_identification_roundtrip(beta, sphere_so_samples, tol=1e-9).passed


def test_lift_dependence_detected_for_connection(sphere_lc, sphere_so_samples):
    # a connection sees the vertical part of a lift, so it does not factor through the base
    assert not F.check_lift_independence(sphere_lc.form, sphere_so_samples, tol=1e-6).passed


def test_bundle_form_of_theta_is_the_tangent_vector(sphere_so, sphere_so_samples):
    # the associated element [p, theta_p(v)] is identified with v itself
    theta = C.fundamental_form(sphere_so).form
    beta = F.tensorial_to_bundle(theta)
    for s in sphere_so_samples[:20]:
        v = M.TangentVector(s.p.base, s.tangents[0].base)
        e = beta(s.p.base, v)
        assert np.linalg.norm(B.frame_matrix(sphere_so, e.rep) @ e.value - v.comps) < 1e-12


def test_pullback_basic_trivial_rep(torus_frames, torus_samples):
    rep = lie.trivial_rep(torus_frames.group, 1)
    alpha = lambda x, v: np.array([np.cos(x.coords[0]) * v.comps[1]])
    phi = F.pullback(torus_frames, alpha, rep, 1)
    assert F.passed(F.check_tensorial(phi, torus_samples, tol=1e-9, equivariance_tol=1e-6))
    back = F.pullback_basic(phi)
    for s in torus_samples[:10]:
        v = M.TangentVector(s.p.base, s.tangents[0].base)
        assert np.allclose(back(s.p.base, v), alpha(s.p.base, v))


def test_pullback_basic_requires_trivial_rep(torus_frames):
    theta = C.fundamental_form(torus_frames).form
    with pytest.raises(F.FormError):
        F.pullback_basic(theta)


def test_horizontal_lift_chart_mismatch(sphere_so):
    p = B.point(sphere_so, M.ManifoldPoint(0, [0.5, 0.5]))
    with pytest.raises(F.FormError):
        F.horizontal_lift(p, M.TangentVector(M.ManifoldPoint(1, [0.5, 0.5]), [1.0, 0.0]))


def test_form_is_chart_independent(sphere_so, sphere_so_samples):
    theta = C.fundamental_form(sphere_so).form
    for s in sphere_so_samples[:30]:
        t = s.tangents[0]
        for j in M.charts_containing(sphere_so.base, s.p.base):
            tj = B.tangent_to_chart(sphere_so, t, j)
            assert np.linalg.norm(theta(tj.at, tj) - theta(s.p, t)) < 1e-7
