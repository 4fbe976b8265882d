import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cartan_kit import lie
from cartan_kit.lie import AlgebraVector, GroupElement


def series_exp(a, terms=20):
    out = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


SPECS = {"so2": lie.so2, "so3": lie.so3, "gl2": lambda: lie.gl(2), "o3": lambda: lie.on(3)}


def coords(dim, bound=1.0):
    return st.lists(st.floats(-bound, bound, allow_nan=False), min_size=dim, max_size=dim).map(np.array)


@pytest.mark.parametrize("name", sorted(SPECS))
def test_exp_zero_is_identity(name):
    spec = SPECS[name]()
    g = lie.exp(AlgebraVector(spec, np.zeros(spec.dim)))
    assert np.array_equal(g.mat, np.eye(spec.n))


def test_so2_quarter_turn_matches_series():
    spec = lie.so2()
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    g = lie.exp(AlgebraVector(spec, [np.pi / 2]))
    assert np.allclose(g.mat, series_exp(np.pi / 2 * J, 20), atol=1e-10)
    assert np.allclose(g.mat, J, atol=1e-12)


def test_so3_exp_matches_series(rng):
    spec = lie.so3()
    for _ in range(20):
        x = spec.random_coords(rng)
        assert np.linalg.norm(spec.exp_mat(x) - series_exp(spec.hat(x), 40)) < 1e-10


def test_gl_exp_matches_scipy(rng):
    from scipy.linalg import expm

    spec = lie.gl(3)
    for _ in range(10):
        x = spec.random_coords(rng)
        assert np.linalg.norm(spec.exp_mat(x) - expm(spec.hat(x))) < 1e-10


def test_membership_rejects_non_orthogonal():
    with pytest.raises(lie.MembershipError):
        GroupElement(lie.so3(), np.diag([1.0, 2.0, 1.0]))
    with pytest.raises(lie.MembershipError):
        GroupElement(lie.gl(2), np.zeros((2, 2)))


def test_vee_rejects_matrix_outside_algebra():
    with pytest.raises(lie.LieAlgebraError):
        lie.so3().vee(np.eye(3))


def test_adjoint_identity_and_abelian(rng):
    so3 = lie.so3()
    x = AlgebraVector(so3, so3.random_coords(rng))
    assert np.allclose(lie.adjoint(so3.identity(), x).coords, x.coords)
    so2 = lie.so2()
    y = AlgebraVector(so2, [0.7])
    assert np.allclose(lie.adjoint(so2.random_element(rng), y).coords, y.coords)


def test_so3_adjoint_matches_least_squares_oracle(rng):
    spec = lie.so3()
    A = spec.basis.reshape(3, -1).T
    for _ in range(20):
        R = spec.random_element(rng)
        x = AlgebraVector(spec, spec.random_coords(rng))
        conj = R.mat @ x.mat @ R.mat.T
        oracle, *_ = np.linalg.lstsq(A, conj.reshape(-1), rcond=None)
        assert np.linalg.norm(lie.adjoint(R, x).coords - oracle) < 1e-12


def test_so3_bracket_e1_e2_is_e3():
    spec = lie.so3()
    e1 = np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]], float)
    e2 = np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0]], float)
    comm = e1 @ e2 - e2 @ e1
    assert np.allclose(spec.vee(comm), [0, 0, 1])
    got = lie.bracket(AlgebraVector(spec, [1, 0, 0]), AlgebraVector(spec, [0, 1, 0]))
    assert np.allclose(got.coords, [0, 0, 1])


def test_bracket_antisymmetry_and_abelian(rng):
    so3 = lie.so3()
    x = AlgebraVector(so3, so3.random_coords(rng))
    assert np.allclose(lie.bracket(x, x).coords, 0)
    so2 = lie.so2()
    assert np.allclose(lie.bracket(AlgebraVector(so2, [1.0]), AlgebraVector(so2, [2.0])).coords, 0)


def test_bracket_spec_mismatch():
    with pytest.raises(lie.SpecMismatch):
        lie.bracket(AlgebraVector(lie.so3(), [1, 0, 0]), AlgebraVector(lie.gl(2), [1, 0, 0, 0]))


def test_product_with_translations():
    prod = lie.product_spec(lie.so2(), lie.translations(2))
    assert prod.dim == 3
    assert np.allclose(prod.bracket_coords([0, 1, 0], [0, 0, 1]), 0)
    so2 = lie.so2()
    assert lie.product_spec(so2, lie.trivial_group()) is so2


def test_semidirect_bracket():
    gl2 = lie.gl(2)
    g = lie.semidirect_spec(gl2, lie.standard_rep(gl2))
    assert g.dim == 6
    # [p, p] = 0 and [X, u] = X u
    assert np.allclose(g.bracket_coords([0, 0, 0, 0, 1, 0], [0, 0, 0, 0, 0, 1]), 0)
    X = np.array([1.0, 2.0, 3.0, 4.0])
    u = np.array([0.5, -1.0])
    br = g.bracket_coords(np.r_[X, 0, 0], np.r_[0, 0, 0, 0, u])
    assert np.allclose(br, np.r_[0, 0, 0, 0, X.reshape(2, 2) @ u])


@pytest.mark.parametrize("name", ["so2", "so3", "gl2"])
def test_representations(name, rng):
    spec = SPECS[name]()
    for rep in (lie.standard_rep(spec), lie.adjoint_rep(spec), lie.direct_sum(lie.standard_rep(spec), lie.trivial_rep(spec, 2))):
        assert lie.check_homomorphism(rep, rng, 20) < 1e-9
        assert lie.check_derivative(rep, rng, 10) < 1e-8


@given(coords(3, 0.9))
def test_so3_exp_log_roundtrip(x):
    spec = lie.so3()
    if np.linalg.norm(x) >= 1:
        x = 0.9 * x / np.linalg.norm(x)
    assert np.linalg.norm(spec.log_coords(spec.exp_mat(x)) - x) < 1e-9


@given(coords(4, 0.45))
def test_gl_exp_log_roundtrip(x):
    spec = lie.gl(2)
    assert np.linalg.norm(spec.log_coords(spec.exp_mat(x)) - x) < 1e-9


@given(st.floats(-3.0, 3.0))
def test_so2_exp_log_roundtrip(t):
    spec = lie.so2()
    assert abs(spec.log_coords(spec.exp_mat([t]))[0] - t) < 1e-9


@given(coords(3), coords(3), coords(3))
def test_adjoint_is_a_homomorphism(a, b, x):
    spec = lie.so3()
    g, h = lie.exp(AlgebraVector(spec, a)), lie.exp(AlgebraVector(spec, b))
    X = AlgebraVector(spec, x)
    lhs = lie.adjoint(g @ h, X).coords
    rhs = lie.adjoint(g, lie.adjoint(h, X)).coords
    assert np.linalg.norm(lhs - rhs) < 1e-9


@given(coords(4), coords(4))
def test_adjoint_derivative_is_bracket(y, x):
    spec = lie.gl(2)
    t = 1e-5
    X = AlgebraVector(spec, x)
    plus = lie.adjoint(GroupElement(spec, spec.exp_mat(t * y)), X).coords
    minus = lie.adjoint(GroupElement(spec, spec.exp_mat(-t * y)), X).coords
    fd = (plus - minus) / (2 * t)
    assert np.linalg.norm(fd - spec.bracket_coords(y, x)) < 1e-6


@given(coords(3), coords(3), coords(3))
def test_jacobi_identity(x, y, z):
    spec = lie.so3()
    b = spec.bracket_coords
    total = b(x, b(y, z)) + b(y, b(z, x)) + b(z, b(x, y))
    assert np.linalg.norm(total) < 1e-12
