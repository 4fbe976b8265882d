"""Matrix Lie groups, their Lie algebras, and representations.

A Lie algebra is carried as an explicit list of basis matrices in ambient
(n x n) coordinates; algebra elements are coordinate vectors with respect to
that basis, and ambient matrices are re-expanded by least squares with a
residual check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.linalg

from .config import DEFAULT


class LieAlgebraError(ValueError):
    """Raised when a matrix does not re-expand in an algebra basis, or a basis is degenerate."""


class MembershipError(ValueError):
    """Raised when a matrix is not a member of the claimed group."""


class SpecMismatch(ValueError):
    pass


class GroupKind(str, Enum):
    SO2 = "SO2"
    SO3 = "SO3"
    GLN = "GLn"
    ON = "On"
    TRANSLATION = "translation"
    TRIVIAL = "trivial"
    PRODUCT = "product"
    SEMIDIRECT = "semidirect"
    CUSTOM = "custom"


def _skew_basis(n: int) -> np.ndarray:
    if n == 3:
        # L_x, L_y, L_z with [L_x, L_y] = L_z
        lx = np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=float)
        ly = np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0]], dtype=float)
        lz = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]], dtype=float)
        return np.stack([lx, ly, lz])
    mats = []
    for i in range(n):
        for j in range(i + 1, n):
            m = np.zeros((n, n))
            m[j, i] = 1.0
            m[i, j] = -1.0
            mats.append(m)
    return np.stack(mats) if mats else np.zeros((0, n, n))


def _expm_series(a: np.ndarray, max_terms: int = 40) -> np.ndarray:
    """Scaling-and-squaring Taylor exponential."""
    if not np.all(np.isfinite(a)):
        raise LieAlgebraError("exp of a non-finite matrix")
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    s = int(np.ceil(np.log2(norm / 0.5))) if norm > 0.5 else 0
    b = a / (2.0**s)
    term = np.eye(n)
    out = np.eye(n)
    for k in range(1, max_terms + 1):
        term = term @ b / k
        out = out + term
        if np.linalg.norm(term, 1) <= 1e-18 * max(1.0, np.linalg.norm(out, 1)):
            break
    else:
        raise LieAlgebraError("matrix exponential series did not converge")
    for _ in range(s):
        out = out @ out
    return out


@dataclass(frozen=True, eq=False)
class LieGroupSpec:
    """A matrix Lie group together with a basis of its Lie algebra."""

    kind: GroupKind
    n: int
    basis: np.ndarray
    name: str
    member_residual_fn: Callable[[np.ndarray], float] = field(repr=False)
    exp_fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    log_fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    factors: tuple = field(default=(), repr=False)

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    @cached_property
    def _flat(self) -> np.ndarray:
        return self.basis.reshape(self.dim, -1)

    @cached_property
    def _pinv(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((self.n * self.n, 0))
        return np.linalg.pinv(self._flat)

    def hat(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if self.dim == 0:
            return np.zeros((self.n, self.n))
        return np.tensordot(coords, self.basis, axes=1)

    def vee(self, mat: np.ndarray, tol: float | None = None) -> np.ndarray:
        """Re-expand an ambient matrix in the basis; raise if it is not in the span."""
        tol = DEFAULT.reexpansion if tol is None else tol
        coords, resid = self.vee_residual(mat)
        scale = max(1.0, float(np.linalg.norm(mat)))
        if resid > tol * scale:
            raise LieAlgebraError(f"{self.name}: re-expansion residual {resid:.3e} exceeds {tol:.1e}")
        return coords

    def vee_residual(self, mat: np.ndarray) -> tuple[np.ndarray, float]:
        flat = np.asarray(mat, dtype=float).reshape(-1)
        coords = flat @ self._pinv
        resid = float(np.linalg.norm(flat - coords @ self._flat)) if self.dim else float(np.linalg.norm(flat))
        return coords, resid

    def identity(self) -> "GroupElement":
        return GroupElement(self, np.eye(self.n))

    def membership_residual(self, mat: np.ndarray) -> float:
        mat = np.asarray(mat, dtype=float)
        if mat.shape != (self.n, self.n) or not np.all(np.isfinite(mat)):
            return float("inf")
        return float(self.member_residual_fn(mat))

    def exp_mat(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.dim,):
            raise SpecMismatch(f"{self.name}: expected {self.dim} coordinates, got shape {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise LieAlgebraError("exp of non-finite coordinates")
        if self.exp_fn is not None:
            return self.exp_fn(coords)
        return _expm_series(self.hat(coords))

    def log_coords(self, mat: np.ndarray) -> np.ndarray:
        if self.log_fn is not None:
            return self.log_fn(np.asarray(mat, dtype=float))
        lg = scipy.linalg.logm(np.asarray(mat, dtype=float))
        return self.vee(np.real(lg), tol=1e-7)

    def adjoint_matrix(self, mat: np.ndarray) -> np.ndarray:
        """Matrix of Ad(mat) on algebra coordinates."""
        if self.dim == 0:
            return np.zeros((0, 0))
        mat = np.asarray(mat, dtype=float)
        inv = np.linalg.inv(mat)
        conj = mat[None, :, :] @ self.basis @ inv[None, :, :]
        cols = conj.reshape(self.dim, -1) @ self._pinv
        resid = np.linalg.norm(conj.reshape(self.dim, -1) - cols @ self._flat)
        if resid > DEFAULT.reexpansion * max(1.0, float(np.linalg.norm(conj))):
            raise LieAlgebraError(f"{self.name}: adjoint action leaves the algebra (residual {resid:.3e})")
        return cols.T

    @cached_property
    def structure_constants(self) -> np.ndarray:
        """c[i, j, k] with [e_i, e_j] = sum_k c[i, j, k] e_k."""
        d = self.dim
        c = np.zeros((d, d, d))
        for i in range(d):
            for j in range(d):
                comm = self.basis[i] @ self.basis[j] - self.basis[j] @ self.basis[i]
                c[i, j] = self.vee(comm)
        return c

    def bracket_coords(self, x, y) -> np.ndarray:
        return np.einsum("i,j,ijk->k", np.asarray(x, float), np.asarray(y, float), self.structure_constants)

    def ad_matrix(self, coords) -> np.ndarray:
        return np.einsum("i,ijk->kj", np.asarray(coords, float), self.structure_constants)

    def random_coords(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        return scale * rng.standard_normal(self.dim)

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> "GroupElement":
        return GroupElement(self, self.exp_mat(self.random_coords(rng, scale)))

    def validate(self, tol: float = 1e-9) -> None:
        """Check linear independence and bracket closure of the basis."""
        if self.dim == 0:
            return
        gram = self._flat @ self._flat.T
        if np.linalg.matrix_rank(gram, tol=tol) != self.dim:
            raise LieAlgebraError(f"{self.name}: basis is linearly dependent")
        _ = self.structure_constants  # raises if not closed

    def same_as(self, other: "LieGroupSpec") -> bool:
        return self is other or (
            self.name == other.name
            and self.n == other.n
            and self.dim == other.dim
            and np.allclose(self.basis, other.basis)
        )


def _require_same(a: LieGroupSpec, b: LieGroupSpec) -> None:
    if not a.same_as(b):
        raise SpecMismatch(f"spec mismatch: {a.name} vs {b.name}")


@dataclass(frozen=True, eq=False)
class GroupElement:
    spec: LieGroupSpec
    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=float)
        object.__setattr__(self, "mat", mat)
        r = self.spec.membership_residual(mat)
        if not r < DEFAULT.membership * max(1.0, float(np.linalg.norm(mat)) if np.all(np.isfinite(mat)) else 1.0):
            raise MembershipError(f"matrix is not in {self.spec.name} (residual {r:.3e})")

    @classmethod
    def trusted(cls, spec: LieGroupSpec, mat: np.ndarray) -> "GroupElement":
        """Skip the membership check for matrices that are members by construction."""
        out = object.__new__(cls)
        object.__setattr__(out, "spec", spec)
        object.__setattr__(out, "mat", np.asarray(mat, dtype=float))
        return out

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        _require_same(self.spec, other.spec)
        return GroupElement(self.spec, self.mat @ other.mat)

    def inv(self) -> "GroupElement":
        return GroupElement(self.spec, np.linalg.inv(self.mat))


@dataclass(frozen=True, eq=False)
class AlgebraVector:
    spec: LieGroupSpec
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float).reshape(-1)
        if coords.shape != (self.spec.dim,):
            raise SpecMismatch(f"{self.spec.name}: expected {self.spec.dim} coordinates")
        if not np.all(np.isfinite(coords)):
            raise LieAlgebraError("algebra coordinates must be finite")
        object.__setattr__(self, "coords", coords)

    @property
    def mat(self) -> np.ndarray:
        return self.spec.hat(self.coords)

    def __add__(self, other: "AlgebraVector") -> "AlgebraVector":
        _require_same(self.spec, other.spec)
        return AlgebraVector(self.spec, self.coords + other.coords)

    def __sub__(self, other: "AlgebraVector") -> "AlgebraVector":
        _require_same(self.spec, other.spec)
        return AlgebraVector(self.spec, self.coords - other.coords)

    def __mul__(self, t: float) -> "AlgebraVector":
        return AlgebraVector(self.spec, float(t) * self.coords)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))


# --- operations -------------------------------------------------------------


def exp(x: AlgebraVector) -> GroupElement:
    return GroupElement(x.spec, x.spec.exp_mat(x.coords))


def log(g: GroupElement) -> AlgebraVector:
    return AlgebraVector(g.spec, g.spec.log_coords(g.mat))


def adjoint(h: GroupElement, x: AlgebraVector) -> AlgebraVector:
    """Ad(h)X = h X h^-1, re-expanded in the basis."""
    _require_same(h.spec, x.spec)
    conj = h.mat @ x.mat @ np.linalg.inv(h.mat)
    return AlgebraVector(x.spec, x.spec.vee(conj))


def bracket(x: AlgebraVector, y: AlgebraVector) -> AlgebraVector:
    _require_same(x.spec, y.spec)
    return AlgebraVector(x.spec, x.spec.bracket_coords(x.coords, y.coords))


# --- concrete groups ---------------------------------------------------------


def _orth_residual(m: np.ndarray) -> float:
    return float(np.linalg.norm(m.T @ m - np.eye(m.shape[0])))


def _so2_exp(c: np.ndarray) -> np.ndarray:
    t = c[0]
    return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])


def _so2_log(m: np.ndarray) -> np.ndarray:
    return np.array([np.arctan2(m[1, 0], m[0, 0])])


def so2() -> LieGroupSpec:
    spec = LieGroupSpec(
        GroupKind.SO2,
        2,
        _skew_basis(2),
        "SO(2)",
        member_residual_fn=lambda m: _orth_residual(m) + abs(np.linalg.det(m) - 1.0),
        exp_fn=_so2_exp,
        log_fn=_so2_log,
    )
    spec.validate()
    return spec


def _skew3(w: np.ndarray) -> np.ndarray:
    return np.array([[0, -w[2], w[1]], [w[2], 0, -w[0]], [-w[1], w[0], 0]], dtype=float)


def _so3_exp(w: np.ndarray) -> np.ndarray:
    th = float(np.linalg.norm(w))
    k = _skew3(w)
    if th < 1e-6:
        a = 1 - th**2 / 6 + th**4 / 120
        b = 0.5 - th**2 / 24 + th**4 / 720
    else:
        a = np.sin(th) / th
        b = (1 - np.cos(th)) / th**2
    return np.eye(3) + a * k + b * (k @ k)


def _so3_log(r: np.ndarray) -> np.ndarray:
    cos_th = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    th = float(np.arccos(cos_th))
    skew = 0.5 * (r - r.T)
    v = np.array([skew[2, 1], skew[0, 2], skew[1, 0]])
    if th < 1e-6:
        return v * (1 + th**2 / 6)
    if np.pi - th > 1e-4:
        return v * th / np.sin(th)
    # near pi: axis from the symmetric part
    sym = 0.5 * (r + np.eye(3))
    i = int(np.argmax(np.diag(sym)))
    axis = sym[:, i] / np.sqrt(sym[i, i])
    if np.dot(axis, v) < 0:
        axis = -axis
    return axis * th


def so3() -> LieGroupSpec:
    spec = LieGroupSpec(
        GroupKind.SO3,
        3,
        _skew_basis(3),
        "SO(3)",
        member_residual_fn=lambda m: _orth_residual(m) + abs(np.linalg.det(m) - 1.0),
        exp_fn=_so3_exp,
        log_fn=_so3_log,
    )
    spec.validate()
    return spec


def on(n: int) -> LieGroupSpec:
    """O(n); its algebra is so(n), so exp lands in the identity component."""
    spec = LieGroupSpec(GroupKind.ON, n, _skew_basis(n), f"O({n})", member_residual_fn=_orth_residual)
    spec.validate()
    return spec


def gl(n: int) -> LieGroupSpec:
    basis = np.zeros((n * n, n, n))
    for k in range(n * n):
        basis[k].flat[k] = 1.0

    def resid(m: np.ndarray) -> float:
        # zero residual for invertible matrices; grows as det -> 0
        d = abs(np.linalg.det(m))
        return 0.0 if d > DEFAULT.membership else 1.0

    spec = LieGroupSpec(GroupKind.GLN, n, basis, f"GL({n})", member_residual_fn=resid)
    spec.validate()
    return spec


def translations(n: int) -> LieGroupSpec:
    """The abelian group R^n realized as (n+1)x(n+1) unipotent translation matrices."""
    basis = np.zeros((n, n + 1, n + 1))
    for i in range(n):
        basis[i, i, n] = 1.0
    eye = np.eye(n + 1)

    def resid(m: np.ndarray) -> float:
        return float(np.linalg.norm(m[:, :n] - eye[:, :n]) + abs(m[n, n] - 1.0))

    spec = LieGroupSpec(
        GroupKind.TRANSLATION,
        n + 1,
        basis,
        f"R^{n}",
        member_residual_fn=resid,
        exp_fn=lambda c: eye + np.tensordot(c, basis, axes=1),
        log_fn=lambda m: m[:n, n].copy(),
    )
    spec.validate()
    return spec


def trivial_group() -> LieGroupSpec:
    return LieGroupSpec(
        GroupKind.TRIVIAL,
        1,
        np.zeros((0, 1, 1)),
        "{e}",
        member_residual_fn=lambda m: abs(m[0, 0] - 1.0),
        exp_fn=lambda c: np.eye(1),
        log_fn=lambda m: np.zeros(0),
    )


def _block_diag(*mats: np.ndarray) -> np.ndarray:
    return scipy.linalg.block_diag(*mats)


def product_spec(a: LieGroupSpec, b: LieGroupSpec) -> LieGroupSpec:
    """Direct product A x B with block-diagonal ambient matrices."""
    if b.dim == 0 and b.kind == GroupKind.TRIVIAL:
        return a
    if a.dim == 0 and a.kind == GroupKind.TRIVIAL:
        return b
    n = a.n + b.n
    basis = [_block_diag(m, np.zeros((b.n, b.n))) for m in a.basis]
    basis += [_block_diag(np.zeros((a.n, a.n)), m) for m in b.basis]

    def resid(m: np.ndarray) -> float:
        off = np.linalg.norm(m[: a.n, a.n :]) + np.linalg.norm(m[a.n :, : a.n])
        return float(off + a.membership_residual(m[: a.n, : a.n]) + b.membership_residual(m[a.n :, a.n :]))

    def exp_fn(c: np.ndarray) -> np.ndarray:
        return _block_diag(a.exp_mat(c[: a.dim]), b.exp_mat(c[a.dim :]))

    def log_fn(m: np.ndarray) -> np.ndarray:
        return np.concatenate([a.log_coords(m[: a.n, : a.n]), b.log_coords(m[a.n :, a.n :])])

    spec = LieGroupSpec(
        GroupKind.PRODUCT,
        n,
        np.stack(basis),
        f"{a.name} x {b.name}",
        member_residual_fn=resid,
        exp_fn=exp_fn,
        log_fn=log_fn,
        factors=(a, b),
    )
    spec.validate()
    return spec


# --- representations ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Representation:
    """rho : H -> GL(V) with its derivative d rho : h -> gl(V).

    ``apply`` takes the ambient group matrix; ``derivative`` takes algebra coordinates.
    """

    domain: LieGroupSpec
    target_dim: int
    apply: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    derivative: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    name: str = ""
    trivial: bool = False

    def __call__(self, h) -> np.ndarray:
        return self.apply(h.mat if isinstance(h, GroupElement) else np.asarray(h, float))

    def d(self, x) -> np.ndarray:
        return self.derivative(x.coords if isinstance(x, AlgebraVector) else np.asarray(x, float))


def standard_rep(spec: LieGroupSpec) -> Representation:
    return Representation(spec, spec.n, lambda m: m, spec.hat, name=f"std({spec.name})")


def trivial_rep(spec: LieGroupSpec, dim: int) -> Representation:
    eye = np.eye(dim)
    zero = np.zeros((dim, dim))
    return Representation(spec, dim, lambda m: eye, lambda c: zero, name=f"triv^{dim}({spec.name})", trivial=True)


def adjoint_rep(spec: LieGroupSpec) -> Representation:
    return Representation(spec, spec.dim, spec.adjoint_matrix, spec.ad_matrix, name=f"Ad({spec.name})")


def direct_sum(r1: Representation, r2: Representation) -> Representation:
    _require_same(r1.domain, r2.domain)
    return Representation(
        r1.domain,
        r1.target_dim + r2.target_dim,
        lambda m: _block_diag(r1.apply(m), r2.apply(m)),
        lambda c: _block_diag(r1.derivative(c), r2.derivative(c)),
        name=f"{r1.name} + {r2.name}",
        trivial=r1.trivial and r2.trivial,
    )


def check_homomorphism(rep: Representation, rng: np.random.Generator, count: int = 50) -> float:
    worst = 0.0
    for _ in range(count):
        g = rep.domain.random_element(rng)
        h = rep.domain.random_element(rng)
        worst = max(worst, float(np.linalg.norm(rep.apply(g.mat @ h.mat) - rep.apply(g.mat) @ rep.apply(h.mat))))
    return worst


def check_derivative(rep: Representation, rng: np.random.Generator, count: int = 20, t: float = 1e-3) -> float:
    """max || rho(exp(tX)) - expm(t d rho(X)) || / t^2 over samples (second-order agreement)."""
    worst = 0.0
    for _ in range(count):
        x = rep.domain.random_coords(rng)
        lhs = rep.apply(rep.domain.exp_mat(t * x))
        rhs = scipy.linalg.expm(t * rep.derivative(x))
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


# --- semidirect products h x_rho R^m ------------------------------------------


def semidirect_spec(h: LieGroupSpec, rep: Representation) -> LieGroupSpec:
    """Lie algebra h x R^m with bracket [(X, u), (Y, v)] = ([X, Y], drho(X)v - drho(Y)u).

    Realized as block matrices diag(X, [[drho(X), u], [0, 0]]); the translation
    part is abelian, so [p, p] = 0 for p = R^m. With trivial rho this is the
    direct product h x R^m.
    """
    _require_same(h, rep.domain)
    m = rep.target_dim
    na = h.n
    n = na + m + 1
    basis = []
    for k in range(h.dim):
        e = np.zeros(h.dim)
        e[k] = 1.0
        aff = np.zeros((m + 1, m + 1))
        aff[:m, :m] = rep.derivative(e)
        basis.append(_block_diag(h.basis[k], aff))
    for i in range(m):
        aff = np.zeros((m + 1, m + 1))
        aff[i, m] = 1.0
        basis.append(_block_diag(np.zeros((na, na)), aff))

    def resid(mat: np.ndarray) -> float:
        hb = mat[:na, :na]
        aff = mat[na:, na:]
        r = np.linalg.norm(mat[:na, na:]) + np.linalg.norm(mat[na:, :na])
        r += h.membership_residual(hb)
        r += np.linalg.norm(aff[m, :m]) + abs(aff[m, m] - 1.0)
        r += np.linalg.norm(aff[:m, :m] - rep.apply(hb))
        return float(r)

    spec = LieGroupSpec(
        GroupKind.SEMIDIRECT,
        n,
        np.stack(basis),
        f"{h.name} x_rho R^{m}",
        member_residual_fn=resid,
        factors=(h, rep),
    )
    spec.validate()
    return spec


def semidirect_embed(h: LieGroupSpec, rep: Representation) -> Callable[[np.ndarray], np.ndarray]:
    """The inclusion H -> H x_rho R^m on ambient matrices."""
    m = rep.target_dim

    def embed(mat: np.ndarray) -> np.ndarray:
        aff = np.eye(m + 1)
        aff[:m, :m] = rep.apply(mat)
        return _block_diag(mat, aff)

    return embed


def spec_from_basis(name: str, basis: np.ndarray, member_residual_fn, exp_fn=None, log_fn=None) -> LieGroupSpec:
    basis = np.asarray(basis, dtype=float)
    spec = LieGroupSpec(GroupKind.CUSTOM, basis.shape[1], basis, name, member_residual_fn, exp_fn, log_fn)
    spec.validate()
    return spec


def by_name(name: str, n: int | None = None) -> LieGroupSpec:
    table = {"SO2": so2, "SO3": so3}
    if name in table:
        return table[name]()
    if name == "GLn":
        return gl(n or 2)
    if name == "On":
        return on(n or 2)
    raise KeyError(name)
