"""Principal bundles in local trivializations, associated bundles, reductions.

A point of P is stored as (x, a): a base point in some chart i together with
its fiber coordinate a in H under the chart-i trivialization. Transition
functions act on the left, a_i = g_ij(x) a_j, while the structure group acts on
the right, (x, a).h = (x, a h), so pi and R_h are exact in every chart.

Tangent vectors to P carry base components (chart frame) and a
left-trivialized fiber component X, meaning the curve t -> (x + t v, a exp(tX)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import lie, numerics, refs
from .config import DEFAULT, Tolerances
from .lie import AlgebraVector, GroupElement, LieGroupSpec, Representation
from .manifold import (
    ManifoldPoint,
    ManifoldSpec,
    MetricField,
    TangentVector,
    change_chart,
    charts_containing,
    preferred_chart,
    sample_points,
    transition_jacobian,
)
from .report import CheckRecord, below


class BundleError(ValueError):
    pass


class MetricError(ValueError):
    """A metric failed positive-definiteness."""


@dataclass(frozen=True, eq=False)
class PrincipalBundleSpec:
    """H -> P -> M through local trivializations over the charts of M.

    ``transition(i, j, x)`` returns g_ij(x) for x given in chart j.
    ``frame(x)`` (H-structures only) is the reference frame E_i(x): the frame
    of the point (x, a) has chart-coordinate matrix E_i(x) rho(a).
    ``ambient(p)`` optionally realizes p as a global matrix (homogeneous bundles).
    """

    base: ManifoldSpec
    group: LieGroupSpec
    transition: Callable[[int, int, ManifoldPoint], np.ndarray] = field(repr=False)
    frame: Callable[[ManifoldPoint], np.ndarray] | None = field(default=None, repr=False)
    frame_rep: Representation | None = field(default=None, repr=False)
    ambient: Callable[["BundlePoint"], np.ndarray] | None = field(default=None, repr=False)
    name: str = ""

    @property
    def dim(self) -> int:
        return self.base.dim + self.group.dim

    @property
    def is_h_structure(self) -> bool:
        return self.frame is not None and self.frame_rep is not None


@dataclass(frozen=True, eq=False)
class BundlePoint:
    base: ManifoldPoint
    fiber: GroupElement


@dataclass(frozen=True, eq=False)
class TangentAtP:
    at: BundlePoint
    base: np.ndarray
    fiber: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, float).reshape(-1))
        object.__setattr__(self, "fiber", np.asarray(self.fiber, float).reshape(-1))

    @property
    def vec(self) -> np.ndarray:
        return np.concatenate([self.base, self.fiber])

    def __add__(self, other: "TangentAtP") -> "TangentAtP":
        return TangentAtP(self.at, self.base + other.base, self.fiber + other.fiber)

    def __mul__(self, t: float) -> "TangentAtP":
        return TangentAtP(self.at, t * self.base, t * self.fiber)

    __rmul__ = __mul__


def tangent_from_vec(p: BundlePoint, vec: np.ndarray, base_dim: int) -> TangentAtP:
    vec = np.asarray(vec, float)
    return TangentAtP(p, vec[:base_dim], vec[base_dim:])


def tangent_basis(P: PrincipalBundleSpec, p: BundlePoint) -> list[TangentAtP]:
    return [tangent_from_vec(p, e, P.base.dim) for e in np.eye(P.dim)]


def point(P: PrincipalBundleSpec, x: ManifoldPoint, a=None) -> BundlePoint:
    mat = np.eye(P.group.n) if a is None else (a.mat if isinstance(a, GroupElement) else a)
    return BundlePoint(x, GroupElement(P.group, mat))


def projection(p: BundlePoint) -> ManifoldPoint:
    return p.base


def project_tangent(t: TangentAtP) -> TangentVector:
    return TangentVector(t.at.base, t.base)


# --- chart changes -------------------------------------------------------------


def to_chart(P: PrincipalBundleSpec, p: BundlePoint, target: int) -> BundlePoint:
    if p.base.chart == target:
        return p
    x = change_chart(P.base, p.base, target)
    g = P.transition(target, p.base.chart, p.base)
    return BundlePoint(x, GroupElement(P.group, g @ p.fiber.mat))


def transition_derivative(P: PrincipalBundleSpec, target: int, x: ManifoldPoint, v: np.ndarray, h: float | None = None) -> np.ndarray:
    """d/dt g_{target, x.chart}(x + t v) at t = 0."""
    h = DEFAULT.fd_richardson_step if h is None else h
    return numerics.directional(
        lambda c: P.transition(target, x.chart, ManifoldPoint(x.chart, c)), x.coords, v, h, richardson=True
    )


def tangent_to_chart(P: PrincipalBundleSpec, t: TangentAtP, target: int) -> TangentAtP:
    p = t.at
    if p.base.chart == target:
        return t
    q = to_chart(P, p, target)
    jac = transition_jacobian(P.base, target, p.base)
    g = P.transition(target, p.base.chart, p.base)
    dg = transition_derivative(P, target, p.base, t.base) if np.any(t.base) else np.zeros_like(g)
    a = p.fiber.mat
    # a_i(t) = g(x(t)) a_j(t)  =>  X_i = Ad(a_j^-1)(g^-1 dg) + X_j
    shift = P.group.vee(np.linalg.inv(a) @ np.linalg.solve(g, dg) @ a, tol=1e-6)
    return TangentAtP(q, jac @ t.base, shift + t.fiber)


def same_base(P: PrincipalBundleSpec, x: ManifoldPoint, y: ManifoldPoint) -> float:
    """Coordinate distance between two base points, compared in y's chart."""
    return float(np.linalg.norm(change_chart(P.base, x, y.chart).coords - y.coords))


# --- the right action ------------------------------------------------------------


def right_act(p: BundlePoint, h: GroupElement) -> BundlePoint:
    if not p.fiber.spec.same_as(h.spec):
        raise lie.SpecMismatch("group element does not belong to the structure group")
    return BundlePoint(p.base, GroupElement(h.spec, p.fiber.mat @ h.mat))


def fundamental_field(p: BundlePoint, x: AlgebraVector | np.ndarray) -> TangentAtP:
    coords = x.coords if isinstance(x, AlgebraVector) else np.asarray(x, float)
    return TangentAtP(p, np.zeros(p.base.coords.size), coords)


def flow(p: BundlePoint, t: TangentAtP, s: float) -> BundlePoint:
    """The curve s -> (x + s v, a exp(s X)) generating t."""
    spec = p.fiber.spec
    x = ManifoldPoint(p.base.chart, p.base.coords + s * t.base)
    return BundlePoint(x, GroupElement.trusted(spec, p.fiber.mat @ spec.exp_mat(s * t.fiber)))


def pushforward_right(t: TangentAtP, h: GroupElement, step: float | None = None) -> TangentAtP:
    """(R_h)_* t by central differences of s -> flow(p, t, s).h."""
    step = DEFAULT.fd_step if step is None else step
    spec = h.spec
    p = t.at
    ph = right_act(p, h)
    inv = np.linalg.inv(ph.fiber.mat)
    plus = right_act(flow(p, t, step), h).fiber.mat
    minus = right_act(flow(p, t, -step), h).fiber.mat
    fiber = spec.vee(inv @ (plus - minus) / (2 * step), tol=1e-6)
    return TangentAtP(ph, t.base.copy(), fiber)


# --- associated bundles --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VectorFiber:
    """F = V with H acting through a representation."""

    rep: Representation

    def act(self, hmat: np.ndarray, value: np.ndarray) -> np.ndarray:
        return self.rep.apply(hmat) @ np.asarray(value, float)

    def distance(self, a, b) -> float:
        return float(np.linalg.norm(np.asarray(a, float) - np.asarray(b, float)))

    def identity_value(self):
        raise BundleError("a vector fiber has no distinguished point")


def _spd_sqrt(s: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (s + s.T))
    return (v * np.sqrt(w)) @ v.T


@dataclass(frozen=True, eq=False)
class CosetFiber:
    """F = GL(n)/O(n); the coset hK is represented by its positive-definite factor sqrt(h h^T)."""

    group: LieGroupSpec

    @staticmethod
    def canonical(h: np.ndarray) -> np.ndarray:
        return _spd_sqrt(h @ h.T)

    def act(self, hmat: np.ndarray, value: np.ndarray) -> np.ndarray:
        return self.canonical(hmat @ value)

    def distance(self, a, b) -> float:
        return float(np.linalg.norm(a - b))

    def identity_value(self) -> np.ndarray:
        return np.eye(self.group.n)


@dataclass(frozen=True, eq=False)
class AssociatedElement:
    rep: BundlePoint
    value: np.ndarray
    canonical: bool = False


def associate(p: BundlePoint, xi) -> AssociatedElement:
    """The orbit p.xi = [(p, xi)] in P x_H F."""
    return AssociatedElement(p, np.asarray(xi, float))


fiber_map = associate


def canonicalize(P: PrincipalBundleSpec, F, e: AssociatedElement) -> AssociatedElement:
    """Move to the preferred chart and gauge the fiber coordinate to the identity."""
    if e.canonical:
        return e
    i = preferred_chart(P.base, e.rep.base)
    q = to_chart(P, e.rep, i)
    value = F.act(q.fiber.mat, e.value)
    return AssociatedElement(point(P, q.base), value, canonical=True)


def element_distance(P: PrincipalBundleSpec, F, e1: AssociatedElement, e2: AssociatedElement) -> float:
    c1, c2 = canonicalize(P, F, e1), canonicalize(P, F, e2)
    if c1.rep.base.chart != c2.rep.base.chart:
        return float("inf")
    return float(np.linalg.norm(c1.rep.base.coords - c2.rep.base.coords)) + F.distance(c1.value, c2.value)


def value_at(P: PrincipalBundleSpec, F, e: AssociatedElement, p: BundlePoint, tol: float = 1e-9) -> np.ndarray:
    """The unique xi with e = [(p, xi)]."""
    c = canonicalize(P, F, e)
    q = to_chart(P, p, c.rep.base.chart)
    gap = float(np.linalg.norm(q.base.coords - c.rep.base.coords))
    if gap > tol * max(1.0, float(np.linalg.norm(q.base.coords))):
        raise BundleError(f"bundle point is not over the element's base point (gap {gap:.3e})")
    return F.act(np.linalg.inv(q.fiber.mat), c.value)


# --- sections <-> equivariant maps ------------------------------------------------


def section_to_equivariant(P: PrincipalBundleSpec, F, s: Callable[[ManifoldPoint], AssociatedElement]):
    def f(p: BundlePoint):
        return value_at(P, F, s(p.base), p)

    return f


def equivariant_to_section(P: PrincipalBundleSpec, F, f: Callable[[BundlePoint], np.ndarray]):
    def s(x: ManifoldPoint) -> AssociatedElement:
        p0 = point(P, x)
        return associate(p0, f(p0))

    return s


def check_section(P: PrincipalBundleSpec, s, points: Sequence[ManifoldPoint], tol: float | None = None, stage: str = "") -> CheckRecord:
    tol = DEFAULT.roundtrip if tol is None else tol
    res = [same_base(P, s(x).rep.base, x) for x in points]
    return below("section projects to base", refs.LEMMA_1_1, res, tol, stage)


def check_equivariant(P: PrincipalBundleSpec, F, f, samples: Sequence[tuple[BundlePoint, GroupElement]], tol: float | None = None, stage: str = "") -> CheckRecord:
    tol = DEFAULT.roundtrip if tol is None else tol
    res = []
    for p, h in samples:
        lhs = f(right_act(p, h))
        rhs = F.act(np.linalg.inv(h.mat), f(p))
        res.append(F.distance(lhs, rhs))
    return below("equivariance f(ph) = h^-1 f(p)", refs.LEMMA_1_1, res, tol, stage)


def section_cycle(P: PrincipalBundleSpec, rep: Representation, count: int, seed: int, tol: float | None = None, stage: str = "sections") -> list[CheckRecord]:
    """section -> equivariant map -> section, and back, on sampled points of P x_H V."""
    tol = DEFAULT.roundtrip if tol is None else tol
    rng = np.random.default_rng(seed + 31)
    F = VectorFiber(rep)
    n = rep.target_dim
    mix = rng.standard_normal((n, 4))
    H = P.group
    scale = 0.5 if H.kind == lie.GroupKind.GLN else 1.0
    gauge = H.random_coords(rng, scale)

    def s(x: ManifoldPoint) -> AssociatedElement:
        y = np.resize(np.asarray(P.base.embed(x), float), 4)
        a = H.exp_mat(gauge * np.cos(y.sum()))
        return associate(point(P, x, a), np.sin(mix @ y) + 0.5)

    f = section_to_equivariant(P, F, s)
    s2 = equivariant_to_section(P, F, f)
    f2 = section_to_equivariant(P, F, s2)
    points = sample_points(P.base, count, seed)
    sec = [element_distance(P, F, s(x), s2(x)) for x in points]
    pts = []
    for x in points:
        charts = charts_containing(P.base, x)
        xi = change_chart(P.base, x, charts[int(rng.integers(len(charts)))])
        pts.append(point(P, xi, H.random_element(rng, scale)))
    eqv = [F.distance(f(p), f2(p)) for p in pts]
    hs = [(p, H.random_element(rng, scale)) for p in pts]
    return [
        check_section(P, s2, points, tol, stage),
        below("section -> equivariant -> section", refs.LEMMA_1_1, sec, tol, stage),
        below("equivariant -> section -> equivariant", refs.LEMMA_1_1, eqv, tol, stage),
        check_equivariant(P, F, f, hs, tol, stage),
    ]


# --- reductions -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReductionSpec:
    """Q subset of P with structure group K.

    ``residual(p)`` is zero exactly on Q; ``pick(x)`` returns a point of Q over x.
    """

    bundle: PrincipalBundleSpec
    subgroup: LieGroupSpec
    residual: Callable[[BundlePoint], float] = field(repr=False)
    pick: Callable[[ManifoldPoint], BundlePoint] = field(repr=False)
    tol: float = 1e-9

    def member(self, p: BundlePoint) -> bool:
        return self.residual(p) < self.tol


def _frame_matrix(P: PrincipalBundleSpec, p: BundlePoint) -> np.ndarray:
    if not P.is_h_structure:
        raise BundleError(f"{P.name} is not an H-structure")
    return P.frame(p.base) @ P.frame_rep.apply(p.fiber.mat)


def frame_matrix(P: PrincipalBundleSpec, p: BundlePoint) -> np.ndarray:
    """Chart-coordinate matrix whose columns are the frame vectors of p."""
    return _frame_matrix(P, p)


def _metric_at(g: MetricField, x: ManifoldPoint, tol: float) -> np.ndarray:
    G = g(x)
    if not np.allclose(G, G.T, atol=tol):
        raise MetricError(f"metric not symmetric at {x.coords}")
    lo = float(np.linalg.eigvalsh(0.5 * (G + G.T))[0])
    if not lo > 0:
        raise MetricError(f"metric not positive definite at {x.coords} (min eigenvalue {lo:.3e})")
    return 0.5 * (G + G.T)


def check_metric(g: MetricField, points: Sequence[ManifoldPoint], tol: float = 1e-12, stage: str = "") -> CheckRecord:
    worst = []
    for x in points:
        G = g(x)
        lo = float(np.linalg.eigvalsh(0.5 * (G + G.T))[0])
        # residual is how far the smallest eigenvalue is from being positive
        worst.append(max(0.0, -lo) + (1.0 if lo <= 0 else 0.0) + float(np.linalg.norm(G - G.T)))
    return below("metric positive definite", refs.METRIC_PD, worst, tol, stage)


def metric_to_reduction(g: MetricField, P: PrincipalBundleSpec, points: Sequence[ManifoldPoint] | None = None, tol: float | None = None) -> ReductionSpec:
    """Q = frames orthonormal for g, an O(n)-reduction of the frame bundle."""
    tol = DEFAULT.roundtrip if tol is None else tol
    if points is None:
        points = sample_points(P.base, 50, 0)
    for x in points:
        _metric_at(g, x, 1e-12)
    n = P.base.dim

    def residual(p: BundlePoint) -> float:
        G = _metric_at(g, p.base, 1e-12)
        Fm = _frame_matrix(P, p)
        return float(np.linalg.norm(Fm.T @ G @ Fm - np.eye(n)))

    def pick(x: ManifoldPoint) -> BundlePoint:
        G = _metric_at(g, x, 1e-12)
        w, v = np.linalg.eigh(G)
        frame = (v / np.sqrt(w)) @ v.T  # G^{-1/2}
        a = np.linalg.solve(P.frame(x), frame)
        return point(P, x, a)

    return ReductionSpec(P, lie.on(n), residual, pick, tol)


def reduction_to_metric(Q: ReductionSpec) -> MetricField:
    P = Q.bundle

    def comps(x: ManifoldPoint) -> np.ndarray:
        Fm = _frame_matrix(P, Q.pick(x))
        return np.linalg.inv(Fm @ Fm.T)

    return MetricField(P.base, comps, "from-reduction")


def reduction_to_symmetry_breaking(Q: ReductionSpec) -> Callable[[BundlePoint], np.ndarray]:
    """f(p) = h^-1 K where p = q h with q in Q; cosets carried by CosetFiber."""
    P = Q.bundle

    def f(p: BundlePoint) -> np.ndarray:
        q = to_chart(P, Q.pick(p.base), p.base.chart)
        h_inv = np.linalg.solve(p.fiber.mat, q.fiber.mat)
        return CosetFiber.canonical(h_inv)

    return f


def section_to_reduction(P: PrincipalBundleSpec, s: Callable[[ManifoldPoint], AssociatedElement], K: LieGroupSpec, tol: float = 1e-9) -> ReductionSpec:
    """Q = {p : f(p) = eK} for the equivariant map f of a section of P x_H H/K."""
    F = CosetFiber(P.group)
    f = section_to_equivariant(P, F, s)

    def residual(p: BundlePoint) -> float:
        return float(np.linalg.norm(f(p) - F.identity_value()))

    def pick(x: ManifoldPoint) -> BundlePoint:
        p0 = point(P, x)
        S = f(p0)
        return right_act(p0, GroupElement(P.group, S))

    return ReductionSpec(P, K, residual, pick, tol)


def check_k_stable(Q: ReductionSpec, points: Sequence[ManifoldPoint], rng: np.random.Generator, tol: float | None = None, stage: str = "") -> CheckRecord:
    tol = DEFAULT.roundtrip if tol is None else tol
    res = []
    for x in points:
        q = Q.pick(x)
        k = Q.subgroup.random_element(rng, scale=np.pi)
        res.append(Q.residual(right_act(q, GroupElement(Q.bundle.group, k.mat))))
        res.append(Q.residual(q))
    return below("reduction closed under K", refs.REDUCTION, res, tol, stage)


def reduction_cycle(P: PrincipalBundleSpec, g: MetricField, count: int, seed: int, tol: float | None = None, stage: str = "reductions") -> list[CheckRecord]:
    """Run reduction -> symmetry breaking -> section -> reduction and compare endpoints."""
    tol = DEFAULT.roundtrip if tol is None else tol
    rng = np.random.default_rng(seed)
    points = sample_points(P.base, count, seed)
    Q = metric_to_reduction(g, P, points)
    F = CosetFiber(P.group)
    f = reduction_to_symmetry_breaking(Q)
    s = equivariant_to_section(P, F, f)
    Q2 = section_to_reduction(P, s, Q.subgroup, Q.tol)

    bundle_pts = []
    for k, x in enumerate(points):
        if k % 2 == 0:
            q = Q.pick(x)
            kk = Q.subgroup.random_element(rng, scale=np.pi)
            bundle_pts.append(right_act(q, GroupElement(P.group, kk.mat)))
        else:
            bundle_pts.append(point(P, x, P.group.random_element(rng, 0.5)))

    agree = [float(Q.member(p) != Q2.member(p)) for p in bundle_pts]
    cross = [Q.residual(Q2.pick(x)) for x in points] + [Q2.residual(Q.pick(x)) for x in points]
    g2 = reduction_to_metric(Q2)
    metric_gap = [float(np.linalg.norm(g2(x) - g(x))) for x in points]
    samples = [(p, P.group.random_element(rng, 0.5)) for p in bundle_pts[: max(1, count // 4)]]
    return [
        check_k_stable(Q, points[: max(1, count // 4)], rng, tol, stage),
        check_equivariant(P, F, f, samples, tol, stage),
        below("cycle membership agreement", refs.THEOREM_1_4, agree, 0.5, stage),
        below("cycle reduction round-trip", refs.THEOREM_1_4, cross, tol, stage),
        below("cycle metric round-trip", refs.THEOREM_1_4, metric_gap, tol, stage),
    ]


# --- cocycle -------------------------------------------------------------------------


def check_cocycle(P: PrincipalBundleSpec, points: Sequence[ManifoldPoint], tol: float | None = None, stage: str = "") -> CheckRecord:
    """g_ij g_jk = g_ik on every chart triple containing each sampled point."""
    tol = DEFAULT.cocycle if tol is None else tol
    res = []
    for x in points:
        idx = charts_containing(P.base, x)
        xs = {i: change_chart(P.base, x, i) for i in idx}
        for i in idx:
            for j in idx:
                gij = P.transition(i, j, xs[j])
                for k in idx:
                    lhs = gij @ P.transition(j, k, xs[k])
                    rhs = P.transition(i, k, xs[k]) if i != k else np.eye(P.group.n)
                    res.append(float(np.linalg.norm(lhs - rhs)))
    return below("transition cocycle", refs.COCYCLE, res, tol, stage)


# --- sampling ------------------------------------------------------------------------


def sample_bundle_points(P: PrincipalBundleSpec, count: int, seed: int, scale: float | None = None) -> list[BundlePoint]:
    rng = np.random.default_rng(seed + 7919)
    if scale is None:
        scale = 0.5 if P.group.kind == lie.GroupKind.GLN else 1.0
    return [point(P, x, P.group.random_element(rng, scale)) for x in sample_points(P.base, count, seed)]


def random_tangent(P: PrincipalBundleSpec, p: BundlePoint, rng: np.random.Generator) -> TangentAtP:
    return TangentAtP(p, rng.standard_normal(P.base.dim), rng.standard_normal(P.group.dim))


# --- concrete bundles ---------------------------------------------------------------


def _same_chart_identity(i: int, j: int, n: int):
    return np.eye(n) if i == j else None


def trivial_bundle(base: ManifoldSpec, group: LieGroupSpec) -> PrincipalBundleSpec:
    eye = np.eye(group.n)
    return PrincipalBundleSpec(base, group, lambda i, j, x: eye, name=f"{base.name} x {group.name}")


def frame_bundle(m: ManifoldSpec) -> PrincipalBundleSpec:
    """L(M): GL(n)-bundle of frames, trivialized by coordinate frames."""
    G = lie.gl(m.dim)

    def transition(i: int, j: int, x: ManifoldPoint) -> np.ndarray:
        return transition_jacobian(m, i, x)

    eye = np.eye(m.dim)
    return PrincipalBundleSpec(m, G, transition, frame=lambda x: eye, frame_rep=lie.standard_rep(G), name=f"L({m.name})")


def gram_schmidt_frame(g: MetricField) -> Callable[[ManifoldPoint], np.ndarray]:
    """Oriented g-orthonormal frame obtained from the coordinate frame."""

    def frame(x: ManifoldPoint) -> np.ndarray:
        G = g(x)
        n = G.shape[0]
        E = np.zeros((n, n))
        for k in range(n):
            v = np.eye(n)[:, k]
            for l in range(k):
                v = v - (E[:, l] @ G @ v) * E[:, l]
            E[:, k] = v / np.sqrt(v @ G @ v)
        return E

    return frame


def orthonormal_frame_bundle(m: ManifoldSpec, g: MetricField, frame: Callable[[ManifoldPoint], np.ndarray] | None = None) -> PrincipalBundleSpec:
    """SO(n)-structure of oriented g-orthonormal frames (requires an oriented atlas)."""
    H = lie.so2() if m.dim == 2 else lie.so3()
    frame = gram_schmidt_frame(g) if frame is None else frame

    def transition(i: int, j: int, x: ManifoldPoint) -> np.ndarray:
        if i == j:
            return np.eye(m.dim)
        xi = change_chart(m, x, i)
        return np.linalg.solve(frame(xi), transition_jacobian(m, i, x) @ frame(x))

    return PrincipalBundleSpec(m, H, transition, frame=frame, frame_rep=lie.standard_rep(H), name=f"SO({m.name},{g.name})")


# SO(3) -> S^2 = SO(3)/SO(2), p -> p e3, with H = rotations about e3.

_E3 = np.array([0.0, 0.0, 1.0])
_FLIP = np.diag([1.0, -1.0, -1.0])


def _align(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimal rotation taking unit a to unit b (b != -a): c I + [v]x + v v^T / (1 + c)."""
    v0, v1, v2 = a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]
    c = float(a @ b)
    v = np.array([v0, v1, v2])
    out = np.outer(v, v) / (1.0 + c)
    out += np.array([[c, -v2, v1], [v2, c, -v0], [-v1, v0, c]])
    return out


def sphere_section(x: ManifoldPoint, m: ManifoldSpec) -> np.ndarray:
    """Local section of SO(3) -> S^2 over the chart of x (s(x) e3 = x)."""
    y = m.embed(x)
    if x.chart == 0:  # north chart excludes the north pole
        return _align(-_E3, y) @ _FLIP
    return _align(_E3, y)


def embed_so2(a: np.ndarray) -> np.ndarray:
    out = np.eye(3)
    out[:2, :2] = a
    return out


def homogeneous_sphere_bundle(m: ManifoldSpec) -> PrincipalBundleSpec:
    """SO(2) -> SO(3) -> S^2 with p = s_i(x) iota(a) in chart i."""
    H = lie.so2()

    def transition(i: int, j: int, x: ManifoldPoint) -> np.ndarray:
        if i == j:
            return np.eye(2)
        xi = change_chart(m, x, i)
        return (sphere_section(xi, m).T @ sphere_section(x, m))[:2, :2]

    def ambient(p: BundlePoint) -> np.ndarray:
        return sphere_section(p.base, m) @ embed_so2(p.fiber.mat)

    return PrincipalBundleSpec(m, H, transition, ambient=ambient, name="SO(3) -> S^2")


def with_broken_cocycle(P: PrincipalBundleSpec, angle: float = 0.3) -> PrincipalBundleSpec:
    """Fault injection: twist one transition so g_ij g_ji != 1."""
    twist = P.group.exp_mat(np.full(P.group.dim, angle))

    def transition(i: int, j: int, x: ManifoldPoint) -> np.ndarray:
        g = P.transition(i, j, x)
        return g @ twist if (i, j) == (0, 1) else g

    return PrincipalBundleSpec(P.base, P.group, transition, P.frame, P.frame_rep, P.ambient, P.name + " (broken cocycle)")
