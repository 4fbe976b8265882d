"""Cartan connections, their assembly from a connection and a soldering form,
the projection to g/h, curvature, and the equivalence-chain verifier.

The model algebra g is an H-module containing h as its first ``h.dim``
coordinates. Only the module structure is needed for the Cartan axioms; the
bracket of g is used by ``curvature`` alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import lie, numerics, refs
from .bundle import BundlePoint, PrincipalBundleSpec, TangentAtP, flow, fundamental_field, point
from .config import DEFAULT, Tolerances
from .connection import (
    EhresmannConnection,
    GeometrizationWitness,
    LocalConnectionData,
    SolderingForm,
    build_connection,
    check_ehresmann,
    check_partition,
    check_reproduction,
    check_soldering,
    check_witness,
    witness_to_soldering,
)
from .forms import FormSample, ModuleValuedForm, check_pseudotensorial, check_tensorial, tensorial_to_bundle
from .lie import LieGroupSpec, Representation
from .manifold import TangentVector, sample_points
from .report import CheckRecord, VerificationReport, above, below, flag


class CartanError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CartanAlgebra:
    """g as an H-module with h in its first coordinates and a chosen complement p."""

    g: LieGroupSpec
    h: LieGroupSpec
    action: Representation = field(repr=False)
    complement: np.ndarray | None = None  # columns: basis of p in g-coordinates

    @property
    def dim(self) -> int:
        return self.g.dim

    @property
    def h_dim(self) -> int:
        return self.h.dim

    @property
    def p_basis(self) -> np.ndarray:
        if self.complement is not None:
            return np.asarray(self.complement, float)
        return np.eye(self.dim)[:, self.h_dim :]

    @property
    def change_of_basis(self) -> np.ndarray:
        """Columns: h basis followed by p basis, in g-coordinates."""
        return np.concatenate([np.eye(self.dim)[:, : self.h_dim], self.p_basis], axis=1)

    def embed_h(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim)
        out[: self.h_dim] = x
        return out


def algebra_from_embedding(g: LieGroupSpec, h: LieGroupSpec, embed: Callable[[np.ndarray], np.ndarray], complement: np.ndarray | None = None) -> CartanAlgebra:
    """H acts on g by Ad of the embedded element; d(embed) must send h's basis to g's first coordinates."""
    for k in range(h.dim):
        e = np.zeros(h.dim)
        e[k] = 1.0
        d = numerics.central_diff(lambda t: embed(h.exp_mat(t * e)), 1e-3, richardson=True)
        coords = g.vee(d, tol=1e-6)
        target = np.zeros(g.dim)
        target[k] = 1.0
        if np.linalg.norm(coords - target) > 1e-6:
            raise CartanError("embedding differential does not match the basis ordering of g")

    def derivative(x: np.ndarray) -> np.ndarray:
        pad = np.zeros(g.dim)
        pad[: h.dim] = x
        return g.ad_matrix(pad)

    action = Representation(h, g.dim, lambda m: g.adjoint_matrix(embed(m)), derivative, name=f"Ad({g.name})|{h.name}")
    return CartanAlgebra(g, h, action, complement)


def semidirect_algebra(h: LieGroupSpec, rep: Representation) -> CartanAlgebra:
    """g = h x R^n with H acting by (Ad, rho); [p, p] = 0 for p = R^n."""
    return algebra_from_embedding(lie.semidirect_spec(h, rep), h, lie.semidirect_embed(h, rep))


@dataclass(frozen=True, eq=False)
class ReductiveSplit:
    proj_h: np.ndarray
    proj_p: np.ndarray


def reductive_split(alg: CartanAlgebra) -> ReductiveSplit:
    B = alg.change_of_basis
    Binv = np.linalg.inv(B)
    mask_h = np.zeros(alg.dim)
    mask_h[: alg.h_dim] = 1.0
    proj_h = B @ np.diag(mask_h) @ Binv
    return ReductiveSplit(proj_h, np.eye(alg.dim) - proj_h)


def check_reductive(alg: CartanAlgebra, rng: np.random.Generator, count: int = 50, tol: float = 1e-9, stage: str = "") -> list[CheckRecord]:
    split = reductive_split(alg)
    idem = [
        float(np.linalg.norm(split.proj_h @ split.proj_h - split.proj_h)),
        float(np.linalg.norm(split.proj_p @ split.proj_p - split.proj_p)),
        float(np.linalg.norm(split.proj_h + split.proj_p - np.eye(alg.dim))),
    ]
    inv = []
    for _ in range(count):
        h = alg.h.random_element(rng, 0.5 if alg.h.kind == lie.GroupKind.GLN else 1.0)
        A = alg.action.apply(h.mat)
        inv.append(float(np.linalg.norm(split.proj_h @ A @ split.proj_p)) / max(1.0, float(np.linalg.norm(A))))
    return [
        below("split projectors", refs.REDUCTIVE, idem, tol, stage),
        below("complement p is H-invariant", refs.REDUCTIVE, inv, tol, stage),
    ]


def pp_bracket_residual(alg: CartanAlgebra) -> float:
    P = alg.p_basis
    worst = 0.0
    for i in range(P.shape[1]):
        for j in range(P.shape[1]):
            worst = max(worst, float(np.linalg.norm(alg.g.bracket_coords(P[:, i], P[:, j]))))
    return worst


@dataclass(frozen=True, eq=False)
class CartanConnection:
    form: ModuleValuedForm
    algebra: CartanAlgebra

    def __post_init__(self):
        if self.algebra.dim != self.form.bundle.dim:
            raise CartanError(f"dim g = {self.algebra.dim} but dim P = {self.form.bundle.dim}")
        if self.form.target_dim != self.algebra.dim:
            raise CartanError("form target does not match g")

    @property
    def bundle(self) -> PrincipalBundleSpec:
        return self.form.bundle

    def __call__(self, p: BundlePoint, v: TangentAtP) -> np.ndarray:
        return self.form(p, v)


def normalized_det(mat: np.ndarray) -> float:
    """|det| after scaling each column to unit length (scale-invariant, in [0, 1])."""
    norms = np.linalg.norm(mat, axis=0)
    if np.any(norms == 0):
        return 0.0
    return float(abs(np.linalg.det(mat / norms)))


def check_cartan(omega: CartanConnection, samples: Sequence[FormSample], tol: Tolerances = DEFAULT, stage: str = "") -> list[CheckRecord]:
    dets = [normalized_det(omega.form.matrix(s.p)) for s in samples]
    return [
        flag("dim g = dim P", refs.CARTAN_DIM, omega.algebra.dim == omega.bundle.dim, stage, note=f"dim g = {omega.algebra.dim}"),
        above("omega_p isomorphism (|det|)", refs.CARTAN_ISO, dets, tol.isomorphism_det, stage),
        check_pseudotensorial(omega.form, samples, tol.equivariance, stage, name="Cartan equivariance", ref=refs.CARTAN_EQUIV),
        check_reproduction(omega.form, samples, tol.reproduction, stage, ref=refs.CARTAN_REPRO, embed=omega.algebra.embed_h),
    ]


def assemble_cartan(gamma: EhresmannConnection, theta: SolderingForm) -> CartanConnection:
    """omega = gamma + theta with values in g = h x R^n."""
    P = gamma.bundle
    H = P.group
    n = theta.rep.target_dim
    if H.dim + n != P.dim:
        raise CartanError(f"dim h + n = {H.dim + n} but dim P = {P.dim}")
    alg = semidirect_algebra(H, theta.rep)

    def omega(p: BundlePoint, v: TangentAtP) -> np.ndarray:
        return np.concatenate([gamma(p, v), theta(p, v)])

    return CartanConnection(ModuleValuedForm(P, 1, alg.action, omega, name="omega"), alg)


def project_soldering(omega: CartanConnection, check_count: int = 50, tol: float = 1e-9) -> SolderingForm:
    """omega_{g/h}: the p-component of omega, with H acting on p through the split."""
    alg = omega.algebra
    recs = check_reductive(alg, np.random.default_rng(5), check_count, tol)
    if not all(r.passed for r in recs):
        raise CartanError("chosen complement is not H-invariant")
    Binv = np.linalg.inv(alg.change_of_basis)
    k = alg.h_dim
    action = alg.action

    def apply(m: np.ndarray) -> np.ndarray:
        return (Binv @ action.apply(m) @ alg.change_of_basis)[k:, k:]

    def derivative(x: np.ndarray) -> np.ndarray:
        return (Binv @ action.derivative(x) @ alg.change_of_basis)[k:, k:]

    rep = Representation(alg.h, alg.dim - k, apply, derivative, name=f"{action.name} on g/h")

    def theta(p: BundlePoint, v: TangentAtP) -> np.ndarray:
        return (Binv @ omega(p, v))[k:]

    return SolderingForm(ModuleValuedForm(omega.bundle, 1, rep, theta, name="omega_g/h"))


def check_identity_section(theta: SolderingForm, witness: GeometrizationWitness, samples: Sequence[FormSample], tol: float | None = None, stage: str = "") -> CheckRecord:
    """The bundle-valued image of theta, composed with the witness iso, is id on TM."""
    tol = DEFAULT.witness if tol is None else tol
    beta = tensorial_to_bundle(theta.form)
    res = []
    for s in samples:
        v = TangentVector(s.p.base, s.tangents[0].base)
        out = witness.apply(beta(s.p.base, v))
        res.append(float(np.linalg.norm(out.comps - v.comps)) / max(1.0, float(np.linalg.norm(v.comps))))
    return below("identity section of End TM", refs.THM_3_2_I_IV, res, tol, stage)


# --- curvature ----------------------------------------------------------------------


def _derivative_along(form: Callable, p: BundlePoint, v: TangentAtP, w: TangentAtP, h: float) -> np.ndarray:
    """V(form(W)) at p for the constant-coefficient extensions V, W of v, w."""

    def f(s: float) -> np.ndarray:
        q = flow(p, v, s)
        return form(q, TangentAtP(q, w.base, w.fiber))

    return numerics.central_diff(f, h, richardson=True)


def exterior_derivative(form: ModuleValuedForm, p: BundlePoint, v: TangentAtP, w: TangentAtP, h: float | None = None) -> np.ndarray:
    """d form(V, W) = V form(W) - W form(V) - form([V, W]).

    The fiber parts of V, W are left-invariant, so [V, W] = (0, [X_v, X_w]).
    """
    if form.exact_derivative is not None:
        return form.exact_derivative(p, v, w)
    h = DEFAULT.curvature_fd_step if h is None else h
    H = form.bundle.group
    br = TangentAtP(p, np.zeros_like(v.base), H.bracket_coords(v.fiber, w.fiber))
    return _derivative_along(form, p, v, w, h) - _derivative_along(form, p, w, v, h) - form(p, br)


def curvature(omega: CartanConnection, p: BundlePoint, v: TangentAtP, w: TangentAtP, h: float | None = None) -> np.ndarray:
    """Omega(v, w) = d omega(v, w) + [omega(v), omega(w)]."""
    g = omega.algebra.g
    return exterior_derivative(omega.form, p, v, w, h) + g.bracket_coords(omega(p, v), omega(p, w))


def curvature_form(omega: CartanConnection, h: float | None = None) -> ModuleValuedForm:
    return ModuleValuedForm(
        omega.bundle, 2, omega.algebra.action, lambda p, v, w: curvature(omega, p, v, w, h), name="curvature"
    )


def check_curvature_tensorial(omega: CartanConnection, samples: Sequence[FormSample], tol: float | None = None, stage: str = "") -> list[CheckRecord]:
    tol = DEFAULT.curvature_tensorial if tol is None else tol
    return check_tensorial(curvature_form(omega), samples, tol, stage=stage)


def check_flat(omega: CartanConnection, samples: Sequence[FormSample], tol: float | None = None, stage: str = "") -> CheckRecord:
    tol = DEFAULT.curvature if tol is None else tol
    res = [float(np.linalg.norm(curvature(omega, s.p, s.tangents[0], s.tangents[1]))) for s in samples]
    return below("curvature vanishes (structure equation)", refs.CURVATURE, res, tol, stage)


def check_torsion_free(omega: CartanConnection, samples: Sequence[FormSample], tol: float | None = None, stage: str = "") -> CheckRecord:
    tol = DEFAULT.torsion if tol is None else tol
    k = omega.algebra.h_dim
    Binv = np.linalg.inv(omega.algebra.change_of_basis)
    res = [float(np.linalg.norm((Binv @ curvature(omega, s.p, s.tangents[0], s.tangents[1]))[k:])) for s in samples]
    return below("p-component of curvature (torsion) vanishes", refs.CURVATURE, res, tol, stage)


# --- homogeneous model ---------------------------------------------------------------


def maurer_cartan_connection(P: PrincipalBundleSpec, alg: CartanAlgebra, h: float | None = None, richardson: bool = False) -> CartanConnection:
    """omega = g^-1 dg on a bundle realized by global matrices ``P.ambient``.

    dg uses a plain central difference at ``fd_step`` by default: the ambient
    map is smooth and cheap, truncation and roundoff both stay near 1e-11.
    """
    if P.ambient is None:
        raise CartanError("Maurer-Cartan connection needs an ambient realization of P")
    if h is None:
        h = DEFAULT.fd_richardson_step if richardson else DEFAULT.fd_step

    def omega(p: BundlePoint, v: TangentAtP) -> np.ndarray:
        g0 = P.ambient(p)
        dg = numerics.central_diff(lambda s: P.ambient(flow(p, v, s)), h, richardson=richardson)
        return alg.g.vee(np.linalg.solve(g0, dg), tol=1e-6)

    return CartanConnection(ModuleValuedForm(P, 1, alg.action, omega, name="maurer-cartan"), alg)


def so3_over_so2_algebra() -> CartanAlgebra:
    """so(3) with basis ordered (L_z, L_x, L_y); h = so(2) = span(L_z) via the block embedding."""
    base = lie.so3()
    basis = base.basis[[2, 0, 1]]
    g = lie.spec_from_basis(
        "so(3)[z,x,y]",
        basis,
        member_residual_fn=lambda m: float(np.linalg.norm(m.T @ m - np.eye(3)) + abs(np.linalg.det(m) - 1.0)),
    )
    from .bundle import embed_so2

    return algebra_from_embedding(g, lie.so2(), embed_so2)


# --- the equivalence chain -----------------------------------------------------------

STAGE_V_IV = "(v)=>(iv)"
STAGE_IV_III = "(iv)=>(iii)"
STAGE_III_II = "(iii)=>(ii)"
STAGE_II_I = "(ii)=>(i)"
STAGE_I_IV = "(i)=>(iv)"


@dataclass
class ChainResult:
    report: VerificationReport
    theta: SolderingForm | None = None
    gamma: EhresmannConnection | None = None
    omega: CartanConnection | None = None


def verify_theorem_3_2(
    witness: GeometrizationWitness,
    local: LocalConnectionData,
    samples: Sequence[FormSample],
    tol: Tolerances = DEFAULT,
    name: str = "chain",
) -> ChainResult:
    """Run (v)=>(iv)=>(iii)=>(ii)=>(i)=>(iv), stopping at the first failing stage."""
    report = VerificationReport(name)
    result = ChainResult(report)
    P = witness.bundle
    rng = np.random.default_rng(11)

    def stage_ok(stage: str) -> bool:
        return all(r.passed for r in report.records if r.stage == stage)

    def halt(stage: str, exc: Exception, ref: str) -> ChainResult:
        report.add(flag(f"{stage} construction", ref, False, stage, note=f"{type(exc).__name__}: {exc}"))
        return result

    # (v) => (iv)
    try:
        report.add(*check_witness(witness, samples, tol.witness, STAGE_V_IV))
        theta = witness_to_soldering(witness)
        result.theta = theta
        report.add(*check_soldering(theta, samples, tol.tensorial, tol.surjectivity, STAGE_V_IV))
    except Exception as exc:  # noqa: BLE001 - attributed to the stage
        return halt(STAGE_V_IV, exc, refs.THM_3_2_V_IV)
    if not stage_ok(STAGE_V_IV):
        return result

    # (iv) => (iii)
    try:
        points = [s.p.base for s in samples]
        report.add(check_partition(local, points, tol.partition, STAGE_IV_III))
        gamma = build_connection(local)
        result.gamma = gamma
        report.add(*check_ehresmann(gamma, samples, tol.equivariance, tol.reproduction, STAGE_IV_III))
        omega = assemble_cartan(gamma, theta)
        result.omega = omega
        report.add(*check_cartan(omega, samples, tol, STAGE_IV_III))
    except Exception as exc:  # noqa: BLE001
        return halt(STAGE_IV_III, exc, refs.THM_3_2_IV_III)
    if not stage_ok(STAGE_IV_III):
        return result

    # (iii) => (ii): reductive with abelian complement
    report.add(*check_reductive(omega.algebra, rng, 50, tol.reproduction, STAGE_III_II))
    report.add(below("[p, p] = 0", refs.THM_3_2_III_II, [pp_bracket_residual(omega.algebra)], tol.reproduction, STAGE_III_II))
    if not stage_ok(STAGE_III_II):
        return result

    # (ii) => (i): a reductive Cartan connection is a Cartan connection
    cartan_ok = all(r.passed for r in report.records if r.ref in (refs.CARTAN_ISO, refs.CARTAN_EQUIV, refs.CARTAN_REPRO, refs.CARTAN_DIM))
    report.add(flag("Cartan axioms hold for the reductive connection", refs.THM_3_2_II_I, cartan_ok, STAGE_II_I))

    # (i) => (iv): project to g/h and recover theta
    try:
        theta2 = project_soldering(omega)
        diffs = [
            float(np.linalg.norm(theta2(s.p, t) - theta(s.p, t))) / max(1.0, float(np.linalg.norm(theta(s.p, t))))
            for s in samples
            for t in s.tangents[:1]
        ]
        report.add(below("omega_g/h recovers theta", refs.THM_3_2_I_IV, diffs, tol.reproduction, STAGE_I_IV))
        report.add(*check_soldering(theta2, samples, tol.tensorial, tol.surjectivity, STAGE_I_IV))
        report.add(check_identity_section(theta2, witness, samples, tol.witness, STAGE_I_IV))
    except Exception as exc:  # noqa: BLE001
        return halt(STAGE_I_IV, exc, refs.THM_3_2_I_IV)
    return result
