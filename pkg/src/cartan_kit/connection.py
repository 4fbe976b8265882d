"""Ehresmann connections, soldering forms and geometrization witnesses.

Connections are assembled from per-chart local forms A_i (the pullback of the
connection along the identity section of chart i) glued with the partition of
unity of the base atlas:

    gamma(p; v~) = sum_i lambda_i(x) [Ad(a_i^-1) A_i(x; v_i) + X_i]

where (a_i, v_i, X_i) are the chart-i coordinates of p and v~. Each bracket is a
connection on pi^-1(U_i), so the convex combination is one on P.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import lie, numerics, refs
from .bundle import (
    AssociatedElement,
    BundlePoint,
    PrincipalBundleSpec,
    TangentAtP,
    associate,
    frame_matrix,
    fundamental_field,
    point,
    tangent_to_chart,
    to_chart,
)
from .config import DEFAULT
from .forms import FormSample, ModuleValuedForm, check_horizontal, check_pseudotensorial
from .lie import Representation
from .manifold import (
    ManifoldPoint,
    MetricField,
    TangentVector,
    change_chart,
    charts_containing,
    christoffel,
    partition_of_unity,
)
from .report import CheckRecord, above, below


class ConnectionError_(ValueError):
    """Invalid connection input (partition of unity or local data)."""


class SolderingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LocalConnectionData:
    """Per-chart h-valued 1-forms A_i(x; v) on the base plus the gluing partition of unity."""

    bundle: PrincipalBundleSpec
    local_forms: tuple = field(repr=False)
    partition: Callable[[ManifoldPoint], np.ndarray] | None = field(default=None, repr=False)

    def weights(self, x: ManifoldPoint) -> np.ndarray:
        if self.partition is None:
            return partition_of_unity(self.bundle.base, x)
        return np.asarray(self.partition(x), float)


@dataclass(frozen=True, eq=False)
class EhresmannConnection:
    form: ModuleValuedForm

    def __call__(self, p: BundlePoint, v: TangentAtP) -> np.ndarray:
        return self.form(p, v)

    @property
    def bundle(self) -> PrincipalBundleSpec:
        return self.form.bundle


@dataclass(frozen=True, eq=False)
class SolderingForm:
    form: ModuleValuedForm

    @property
    def rep(self) -> Representation:
        return self.form.rep

    @property
    def bundle(self) -> PrincipalBundleSpec:
        return self.form.bundle

    def __call__(self, p: BundlePoint, v: TangentAtP) -> np.ndarray:
        return self.form(p, v)


@dataclass(frozen=True, eq=False)
class GeometrizationWitness:
    """A representation rho with a fiberwise-linear iso P x_H R^n -> TM.

    ``iso(p, xi)`` evaluates the iso on the representative (p, xi); it must
    land in T_{pi(p)}M and be constant on orbits (p h, rho(h^-1) xi).
    """

    bundle: PrincipalBundleSpec
    rep: Representation
    iso: Callable[[BundlePoint, np.ndarray], TangentVector] = field(repr=False)
    name: str = ""
    matrix: Callable[[BundlePoint], np.ndarray] | None = field(default=None, repr=False)

    def apply(self, e: AssociatedElement) -> TangentVector:
        return self.iso(e.rep, e.value)

    def fiber_matrix(self, p: BundlePoint) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix(p)
        return np.stack([self.iso(p, e).comps for e in np.eye(self.rep.target_dim)], axis=1)

    def inverse(self, v: TangentVector) -> AssociatedElement:
        p0 = point(self.bundle, v.at)
        return associate(p0, np.linalg.solve(self.fiber_matrix(p0), v.comps))


# --- partition of unity ----------------------------------------------------------------


def check_partition(local: LocalConnectionData, points: Sequence[ManifoldPoint], tol: float | None = None, stage: str = "") -> CheckRecord:
    tol = DEFAULT.partition if tol is None else tol
    m = local.bundle.base
    res = []
    for x in points:
        w = local.weights(x)
        inside = set(charts_containing(m, x))
        outside = [abs(w[i]) for i in range(len(w)) if i not in inside]
        res.append(abs(w.sum() - 1.0) + sum(outside) + float(np.sum(np.clip(-w, 0, None))))
    return below("partition of unity", refs.THM_3_2_IV_III, res, tol, stage, note="weights sum to 1, supported in charts")


# --- building connections ----------------------------------------------------------------


def build_connection(local: LocalConnectionData, check_points: Sequence[ManifoldPoint] | None = None, tol: float | None = None) -> EhresmannConnection:
    P = local.bundle
    H = P.group
    if len(local.local_forms) != len(P.base.charts):
        raise ConnectionError_("need one local form per chart")
    if check_points is not None:
        rec = check_partition(local, check_points, tol)
        if not rec.passed:
            raise ConnectionError_(f"partition of unity invalid (residual {rec.max_residual:.3e})")

    def gamma(p: BundlePoint, v: TangentAtP) -> np.ndarray:
        lam = local.weights(p.base)
        total = np.zeros(H.dim)
        for i, w in enumerate(lam):
            if w == 0.0:
                continue
            vi = tangent_to_chart(P, v, i)
            pi = vi.at
            a = pi.fiber.mat
            local_val = np.asarray(local.local_forms[i](pi.base, vi.base), float)
            total += w * (np.linalg.solve(H.adjoint_matrix(a), local_val) + vi.fiber)
        return total

    return EhresmannConnection(ModuleValuedForm(P, 1, lie.adjoint_rep(H), gamma, name="gamma"))


def flat_local_data(P: PrincipalBundleSpec) -> LocalConnectionData:
    zero = np.zeros(P.group.dim)
    return LocalConnectionData(P, tuple((lambda x, v: zero) for _ in P.base.charts))


def levi_civita_local_data(P: PrincipalBundleSpec, g: MetricField, h: float | None = None, richardson: bool = True) -> LocalConnectionData:
    """A_i(x; v) = E^-1 (dE(v) + Gamma(v) E) with Christoffel symbols by finite differences.

    P must be an H-structure whose reference frames E are g-orthonormal (or the
    full frame bundle, E = I).
    """
    if not P.is_h_structure:
        raise ConnectionError_("Levi-Civita data needs an H-structure")
    h = DEFAULT.fd_richardson_step if h is None else h
    H = P.group

    def local(x: ManifoldPoint, v: np.ndarray) -> np.ndarray:
        E = P.frame(x)
        gam = np.einsum("kij,i->kj", christoffel(g, x, h, richardson), v)
        dE = numerics.directional(lambda c: P.frame(ManifoldPoint(x.chart, c)), x.coords, v, h, richardson)
        return H.vee(np.linalg.solve(E, dE + gam @ E), tol=1e-6)

    return LocalConnectionData(P, tuple(local for _ in P.base.charts))


def local_data_from_form(form: ModuleValuedForm, project: Callable[[np.ndarray], np.ndarray] | None = None) -> LocalConnectionData:
    """Pull a (possibly projected) h-valued form back along the identity sections."""
    P = form.bundle
    project = (lambda w: w) if project is None else project

    def local(x: ManifoldPoint, v: np.ndarray) -> np.ndarray:
        p0 = point(P, x)
        return project(form(p0, TangentAtP(p0, v, np.zeros(P.group.dim))))

    return LocalConnectionData(P, tuple(local for _ in P.base.charts))


def combine_connections(g1: EhresmannConnection, g2: EhresmannConnection, t: float) -> EhresmannConnection:
    """(1 - t) g1 + t g2; connections form an affine space."""
    return EhresmannConnection(g1.form.combine(g2.form, 1.0 - t, t))


def check_reproduction(form: ModuleValuedForm, samples: Sequence[FormSample], tol: float | None = None, stage: str = "", ref: str = refs.EHRESMANN_REPRO, embed: Callable[[np.ndarray], np.ndarray] | None = None) -> CheckRecord:
    """form(X^dagger) = X (embedded into the target when it is larger than h)."""
    tol = DEFAULT.reproduction if tol is None else tol
    embed = (lambda c: c) if embed is None else embed
    res = []
    for s in samples:
        val = form(s.p, fundamental_field(s.p, s.x_coords))
        res.append(float(np.linalg.norm(val - embed(s.x_coords))) / max(1.0, float(np.linalg.norm(s.x_coords))))
    return below("reproduces fundamental fields", ref, res, tol, stage)


def check_ehresmann(gamma: EhresmannConnection, samples: Sequence[FormSample], eq_tol: float | None = None, repro_tol: float | None = None, stage: str = "") -> list[CheckRecord]:
    return [
        check_pseudotensorial(gamma.form, samples, eq_tol, stage, name="connection equivariance", ref=refs.EHRESMANN_EQUIV),
        check_reproduction(gamma.form, samples, repro_tol, stage),
    ]


# --- soldering forms ------------------------------------------------------------------------


def min_singular(form: ModuleValuedForm, p: BundlePoint) -> float:
    return float(np.linalg.svd(form.matrix(p), compute_uv=False)[-1])


def check_soldering(theta: SolderingForm, samples: Sequence[FormSample], tol: float | None = None, sigma_min: float | None = None, stage: str = "") -> list[CheckRecord]:
    tol = DEFAULT.tensorial if tol is None else tol
    sigma_min = DEFAULT.surjectivity if sigma_min is None else sigma_min
    recs = [
        check_pseudotensorial(theta.form, samples, tol, stage, name="soldering pseudotensorial"),
        check_horizontal(theta.form, samples, tol, stage),
        above("soldering pointwise surjective", refs.SOLDERING, [min_singular(theta.form, s.p) for s in samples], sigma_min, stage),
    ]
    return recs


def fundamental_form(P: PrincipalBundleSpec) -> SolderingForm:
    """theta_u(v~) = u^-1 pi_*(v~): coordinates of pi_* v~ in the frame u."""
    if not P.is_h_structure:
        raise SolderingError(f"{P.name} is not an H-structure")

    def theta(p: BundlePoint, v: TangentAtP) -> np.ndarray:
        return np.linalg.solve(frame_matrix(P, p), v.base)

    return SolderingForm(ModuleValuedForm(P, 1, P.frame_rep, theta, name="theta"))


def tautological_witness(P: PrincipalBundleSpec) -> GeometrizationWitness:
    """iso([u, xi]) = u xi: the frame applied to coordinates."""
    if not P.is_h_structure:
        raise SolderingError(f"{P.name} is not an H-structure")
    return GeometrizationWitness(P, P.frame_rep, lambda p, xi: TangentVector(p.base, frame_matrix(P, p) @ xi), "tautological")


def global_frame_witness(P: PrincipalBundleSpec, rep: Representation) -> GeometrizationWitness:
    """For a parallelizable base with identity chart Jacobians: iso([p, xi]) = xi in coordinate frames."""
    return GeometrizationWitness(P, rep, lambda p, xi: TangentVector(p.base, np.asarray(xi, float)), "global-frame")


def non_equivariant_witness(w: GeometrizationWitness) -> GeometrizationWitness:
    """Fault injection: evaluates w at the identity point over x, ignoring the fiber coordinate."""
    P = w.bundle
    return GeometrizationWitness(P, w.rep, lambda p, xi: w.iso(point(P, p.base), xi), f"non-equivariant[{w.name}]")


def check_witness(w: GeometrizationWitness, samples: Sequence[FormSample], tol: float | None = None, stage: str = "") -> list[CheckRecord]:
    tol = DEFAULT.witness if tol is None else tol
    rng = np.random.default_rng(23)
    n = w.rep.target_dim
    lin, cover, rt, cond = [], [], [], []
    for s in samples:
        xi, eta = rng.standard_normal(n), rng.standard_normal(n)
        v = w.iso(s.p, 2.0 * xi - 3.0 * eta)
        lin.append(float(np.linalg.norm(v.comps - (2.0 * w.iso(s.p, xi).comps - 3.0 * w.iso(s.p, eta).comps))))
        cover.append(0.0 if (v.at.chart == s.p.base.chart and np.array_equal(v.at.coords, s.p.base.coords)) else 1.0)
        M = w.fiber_matrix(s.p)
        cond.append(1.0 / np.linalg.cond(M))
        tv = TangentVector(s.p.base, rng.standard_normal(s.p.base.coords.size))
        rt.append(float(np.linalg.norm(w.apply(w.inverse(tv)).comps - tv.comps)))
    return [
        below("witness fiberwise linear", refs.GEOMETRIZABLE, lin, tol, stage),
        below("witness covers identity", refs.GEOMETRIZABLE, cover, 0.5, stage),
        above("witness invertible (1/cond)", refs.GEOMETRIZABLE, cond, 1e-12, stage),
        below("witness inverse round-trip", refs.GEOMETRIZABLE, rt, tol, stage),
    ]


def witness_to_soldering(w: GeometrizationWitness) -> SolderingForm:
    """theta_p(v~) = xi with iso([p, xi]) = pi_* v~ (image of the identity section)."""

    def theta(p: BundlePoint, v: TangentAtP) -> np.ndarray:
        return np.linalg.solve(w.fiber_matrix(p), v.base)

    return SolderingForm(ModuleValuedForm(w.bundle, 1, w.rep, theta, name=f"theta[{w.name}]"))


def soldering_to_witness(theta: SolderingForm, sigma_min: float | None = None) -> GeometrizationWitness:
    """iso([p, xi]) = the v with theta_p(horizontal lift of v) = xi."""
    sigma_min = DEFAULT.surjectivity if sigma_min is None else sigma_min
    P = theta.bundle
    n = P.base.dim
    if theta.rep.target_dim != n:
        raise SolderingError("soldering form must take values in R^dim M")

    def horizontal_matrix(p: BundlePoint) -> np.ndarray:
        z = np.zeros(P.group.dim)
        return np.stack([theta(p, TangentAtP(p, e, z)) for e in np.eye(n)], axis=1)

    def checked(p: BundlePoint) -> np.ndarray:
        T = horizontal_matrix(p)
        if np.linalg.svd(T, compute_uv=False)[-1] <= sigma_min:
            raise SolderingError(f"soldering form singular at {p.base.coords}")
        return T

    def iso(p: BundlePoint, xi: np.ndarray) -> TangentVector:
        return TangentVector(p.base, np.linalg.solve(checked(p), xi))

    def matrix(p: BundlePoint) -> np.ndarray:
        return np.linalg.inv(checked(p))

    return GeometrizationWitness(P, theta.rep, iso, name=f"witness[{theta.form.name}]", matrix=matrix)
