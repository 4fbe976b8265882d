"""Module-valued forms on P, tensoriality checks, and the bundle-valued identification.

Forms are callables evaluated pointwise; every defining identity is checked on
sampled (p, h, tangent) tuples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import refs
from .bundle import (
    AssociatedElement,
    BundlePoint,
    PrincipalBundleSpec,
    TangentAtP,
    VectorFiber,
    associate,
    element_distance,
    fundamental_field,
    point,
    pushforward_right,
    random_tangent,
    right_act,
    sample_bundle_points,
    tangent_from_vec,
    tangent_to_chart,
    value_at,
)
from .config import DEFAULT
from .lie import GroupElement, Representation
from .manifold import ManifoldPoint, TangentVector
from .report import CheckRecord, below

SUPPORTED_DEGREES = (0, 1, 2)


class FormError(ValueError):
    pass


def _residual(lhs: np.ndarray, rhs: np.ndarray) -> float:
    """Absolute error, scaled down only when the values themselves are large."""
    return float(np.linalg.norm(lhs - rhs)) / max(1.0, float(np.linalg.norm(rhs)))


@dataclass(frozen=True, eq=False)
class ModuleValuedForm:
    """A V-valued r-form on P; V is an H-module through ``rep``."""

    bundle: PrincipalBundleSpec
    degree: int
    rep: Representation
    eval: Callable[..., np.ndarray] = field(repr=False)
    exact_derivative: Callable | None = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self):
        if self.degree not in SUPPORTED_DEGREES:
            raise FormError(f"degree {self.degree} not supported (only {SUPPORTED_DEGREES})")

    @property
    def target_dim(self) -> int:
        return self.rep.target_dim

    def __call__(self, p: BundlePoint, *vs: TangentAtP) -> np.ndarray:
        if len(vs) != self.degree:
            raise FormError(f"{self.name or 'form'} takes {self.degree} vectors, got {len(vs)}")
        vs = tuple(v if v.at.base.chart == p.base.chart else tangent_to_chart(self.bundle, v, p.base.chart) for v in vs)
        return np.asarray(self.eval(p, *vs), float).reshape(self.target_dim)

    def matrix(self, p: BundlePoint) -> np.ndarray:
        """Matrix of a 1-form at p on the coordinate basis (base comps, then fiber coords)."""
        if self.degree != 1:
            raise FormError("matrix() is defined for 1-forms")
        P = self.bundle
        return np.stack([self(p, tangent_from_vec(p, e, P.base.dim)) for e in np.eye(P.dim)], axis=1)

    def combine(self, other: "ModuleValuedForm", a: float = 1.0, b: float = 1.0) -> "ModuleValuedForm":
        if other.degree != self.degree or other.target_dim != self.target_dim:
            raise FormError("forms of different type")
        return ModuleValuedForm(
            self.bundle,
            self.degree,
            self.rep,
            lambda p, *vs: a * self(p, *vs) + b * other(p, *vs),
            name=f"{a}*{self.name} + {b}*{other.name}",
        )


@dataclass(frozen=True, eq=False)
class BundleValuedForm:
    """An r-form on M with values in the associated vector bundle P x_H V."""

    bundle: PrincipalBundleSpec
    degree: int
    fiber: VectorFiber
    eval: Callable[..., AssociatedElement] = field(repr=False)
    name: str = ""

    def __call__(self, x: ManifoldPoint, *vs: TangentVector) -> AssociatedElement:
        if len(vs) != self.degree:
            raise FormError(f"bundle-valued form takes {self.degree} vectors, got {len(vs)}")
        return self.eval(x, *vs)


# --- samples -------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FormSample:
    p: BundlePoint
    h: GroupElement
    tangents: tuple
    x_coords: np.ndarray  # an algebra vector for fundamental fields


def form_samples(P: PrincipalBundleSpec, count: int, seed: int, ntangent: int = 2) -> list[FormSample]:
    rng = np.random.default_rng(seed + 104729)
    scale = 0.5 if P.group.kind.value == "GLn" else 1.0
    out = []
    for p in sample_bundle_points(P, count, seed):
        h = P.group.random_element(rng, scale)
        ts = tuple(random_tangent(P, p, rng) for _ in range(ntangent))
        out.append(FormSample(p, h, ts, rng.standard_normal(P.group.dim)))
    return out


# --- checks --------------------------------------------------------------------------


def check_pseudotensorial(phi: ModuleValuedForm, samples: Sequence[FormSample], tol: float | None = None, stage: str = "", name: str | None = None, ref: str = refs.PSEUDOTENSORIAL) -> CheckRecord:
    """Residual of R_h^* phi - rho(h^-1) phi, with (R_h)_* by finite differences."""
    tol = DEFAULT.equivariance if tol is None else tol
    res = []
    for s in samples:
        vs = s.tangents[: phi.degree]
        ph = right_act(s.p, s.h)
        lhs = phi(ph, *[pushforward_right(v, s.h) for v in vs])
        rhs = phi.rep.apply(np.linalg.inv(s.h.mat)) @ phi(s.p, *vs)
        res.append(_residual(lhs, rhs))
    return below(name or f"pseudotensorial ({phi.name})", ref, res, tol, stage)


def check_horizontal(phi: ModuleValuedForm, samples: Sequence[FormSample], tol: float | None = None, stage: str = "") -> CheckRecord:
    tol = DEFAULT.horizontality if tol is None else tol
    res = []
    if phi.degree > 0:
        for s in samples:
            vert = fundamental_field(s.p, s.x_coords)
            for slot in range(phi.degree):
                vs = list(s.tangents[: phi.degree])
                vs[slot] = vert
                res.append(float(np.linalg.norm(phi(s.p, *vs))))
    return below(f"horizontal ({phi.name})", refs.HORIZONTAL, res, tol, stage)


def check_tensorial(phi: ModuleValuedForm, samples: Sequence[FormSample], tol: float | None = None, equivariance_tol: float | None = None, stage: str = "") -> list[CheckRecord]:
    """Pseudotensorial plus vanishing whenever a slot holds a vertical vector."""
    tol = DEFAULT.tensorial if tol is None else tol
    eq_tol = tol if equivariance_tol is None else equivariance_tol
    return [check_pseudotensorial(phi, samples, eq_tol, stage), check_horizontal(phi, samples, tol, stage)]


def check_multilinear(phi: ModuleValuedForm, samples: Sequence[FormSample], tol: float = 1e-8, stage: str = "") -> CheckRecord:
    res = []
    for s in samples:
        if phi.degree == 0:
            continue
        u, w = s.tangents[0], s.tangents[1]
        rest = list(s.tangents[1 : phi.degree])
        lhs = phi(s.p, 2.0 * u + (-0.5) * w, *rest)
        rhs = 2.0 * phi(s.p, u, *rest) - 0.5 * phi(s.p, w, *rest)
        res.append(_residual(lhs, rhs))
        if phi.degree == 2:
            res.append(_residual(phi(s.p, u, w), -phi(s.p, w, u)))
            res.append(float(np.linalg.norm(phi(s.p, u, u))))
    return below(f"multilinear alternating ({phi.name})", refs.PSEUDOTENSORIAL, res, tol, stage)


def passed(records: Sequence[CheckRecord]) -> bool:
    return all(r.passed for r in records)


# --- identification of tensorial and bundle-valued forms ----------------------------------


def horizontal_lift(p: BundlePoint, v: TangentVector) -> TangentAtP:
    """Lift with zero fiber component in p's trivialization (v in p's chart)."""
    if v.at.chart != p.base.chart:
        raise FormError("tangent vector and bundle point use different charts")
    return TangentAtP(p, v.comps, np.zeros(p.fiber.spec.dim))


def tensorial_to_bundle(phi: ModuleValuedForm) -> BundleValuedForm:
    """beta(x; v..) = [p, phi(p; lifts of v..)] for the identity point p over x."""
    P = phi.bundle

    def beta(x: ManifoldPoint, *vs: TangentVector) -> AssociatedElement:
        p0 = point(P, x)
        return associate(p0, phi(p0, *[horizontal_lift(p0, v) for v in vs]))

    return BundleValuedForm(P, phi.degree, VectorFiber(phi.rep), beta, name=f"bundle({phi.name})")


def bundle_to_tensorial(beta: BundleValuedForm) -> ModuleValuedForm:
    """phi(p; v~..) = the xi with beta(pi(p); pi_* v~..) = [p, xi]."""
    P = beta.bundle

    def phi(p: BundlePoint, *vs: TangentAtP) -> np.ndarray:
        e = beta(p.base, *[TangentVector(p.base, v.base) for v in vs])
        return value_at(P, beta.fiber, e, p)

    return ModuleValuedForm(P, beta.degree, beta.fiber.rep, phi, name=f"tensorial({beta.name})")


def check_lift_independence(phi: ModuleValuedForm, samples: Sequence[FormSample], tol: float | None = None, stage: str = "") -> CheckRecord:
    """[p, phi(p; lifts)] must not depend on the point p over x or on the lifts."""
    tol = DEFAULT.lift_independence if tol is None else tol
    P = phi.bundle
    F = VectorFiber(phi.rep)
    beta = tensorial_to_bundle(phi)
    rng = np.random.default_rng(17)
    res = []
    for s in samples:
        vs = [TangentVector(s.p.base, t.base) for t in s.tangents[: phi.degree]]
        e0 = beta(s.p.base, *vs)
        lifts = [TangentAtP(s.p, v.comps, rng.standard_normal(P.group.dim)) for v in vs]
        e1 = associate(s.p, phi(s.p, *lifts))
        res.append(element_distance(P, F, e0, e1) / max(1.0, float(np.linalg.norm(e0.value))))
    return below(f"lift independence ({phi.name})", refs.FACTORIZATION, res, tol, stage)


def check_identification_roundtrip(beta: BundleValuedForm, samples: Sequence[FormSample], tol: float | None = None, stage: str = "") -> CheckRecord:
    """beta -> phi -> beta is the identity on sampled base points and vectors."""
    tol = DEFAULT.roundtrip if tol is None else tol
    P = beta.bundle
    back = tensorial_to_bundle(bundle_to_tensorial(beta))
    res = []
    for s in samples:
        vs = [TangentVector(s.p.base, t.base) for t in s.tangents[: beta.degree]]
        e0, e1 = beta(s.p.base, *vs), back(s.p.base, *vs)
        res.append(element_distance(P, beta.fiber, e0, e1) / max(1.0, float(np.linalg.norm(e0.value))))
    return below("bundle -> tensorial -> bundle", refs.LEMMA_1_8, res, tol, stage)


def check_form_roundtrip(phi: ModuleValuedForm, samples: Sequence[FormSample], tol: float | None = None, stage: str = "") -> CheckRecord:
    """phi -> beta -> phi is the identity on sampled points and vectors."""
    tol = DEFAULT.roundtrip if tol is None else tol
    back = bundle_to_tensorial(tensorial_to_bundle(phi))
    res = []
    for s in samples:
        vs = s.tangents[: phi.degree]
        res.append(_residual(back(s.p, *vs), phi(s.p, *vs)))
    return below("tensorial -> bundle -> tensorial", refs.LEMMA_1_8, res, tol, stage)


# --- basic forms (trivial action) -------------------------------------------------------


def pullback_basic(phi: ModuleValuedForm) -> Callable[..., np.ndarray]:
    """For trivial rho, the V-valued base form alpha with pi^* alpha = phi."""
    if not phi.rep.trivial:
        raise FormError("pullback_basic requires a trivial representation")
    P = phi.bundle

    def alpha(x: ManifoldPoint, *vs: TangentVector) -> np.ndarray:
        p0 = point(P, x)
        return phi(p0, *[horizontal_lift(p0, v) for v in vs])

    return alpha


def pullback(P: PrincipalBundleSpec, alpha: Callable[..., np.ndarray], rep: Representation, degree: int, name: str = "") -> ModuleValuedForm:
    def phi(p: BundlePoint, *vs: TangentAtP) -> np.ndarray:
        return alpha(p.base, *[TangentVector(p.base, v.base) for v in vs])

    return ModuleValuedForm(P, degree, rep, phi, name=name or "pullback")


# --- stock forms ------------------------------------------------------------------------


def zero_form(P: PrincipalBundleSpec, degree: int, rep: Representation) -> ModuleValuedForm:
    zero = np.zeros(rep.target_dim)
    return ModuleValuedForm(P, degree, rep, lambda p, *vs: zero, name="zero")


def fiber_maurer_cartan(P: PrincipalBundleSpec, rep: Representation) -> ModuleValuedForm:
    """The left-trivialized fiber component; an Ad-pseudotensorial form on a trivial bundle."""
    return ModuleValuedForm(P, 1, rep, lambda p, v: v.fiber, name="fiber-MC")
