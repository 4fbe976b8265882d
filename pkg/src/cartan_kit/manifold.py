"""Chart-atlas manifolds, tangent vectors, sampling and surface quadrature.

Shipped atlases:

* ``sphere2()`` -- two stereographic charts (from the north and the south
  pole, the latter composed with a reflection so the atlas is oriented).
  Each chart is the disk of radius 4; the transition is z -> 1/z.
* ``torus2()`` -- four translated coordinate squares of half-width 3pi/4.
* ``euclidean(n)`` -- a single identity chart.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from . import numerics
from .config import DEFAULT


class ChartError(ValueError):
    """Point outside a chart or chart overlap."""


class QuadratureError(RuntimeError):
    pass


class ManifoldKind(str, Enum):
    SPHERE2 = "Sphere2"
    TORUS2 = "Torus2"
    EUCLIDEAN = "EuclideanN"


def _bump(s: np.ndarray | float) -> np.ndarray | float:
    """exp(-1/(1-s^2)) on |s| < 1, zero outside."""
    s = np.asarray(s, float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ChartSpec:
    name: str
    shape: str  # "disk" | "box"
    center: tuple
    radius: float
    bump_radius: float | None = None  # support of the partition bump (defaults to radius)

    def offset(self, coords) -> np.ndarray:
        return np.asarray(coords, float) - np.asarray(self.center, float)

    def extent(self, coords) -> float:
        """Normalized distance from the chart center (1 on the boundary)."""
        c = self.offset(coords)
        if self.shape == "disk":
            return float(np.linalg.norm(c)) / self.radius
        return float(np.max(np.abs(c))) / self.radius

    def contains(self, coords, margin: float = 0.0) -> bool:
        return bool(np.all(np.isfinite(coords))) and self.extent(coords) < 1.0 - margin

    @property
    def support(self) -> float:
        return self.radius if self.bump_radius is None else self.bump_radius

    def bump(self, coords) -> float:
        return float(self.bump_many(np.asarray(coords, float)[None, :])[0])

    def extent_many(self, coords: np.ndarray) -> np.ndarray:
        c = coords - np.asarray(self.center, float)
        if self.shape == "disk":
            return np.linalg.norm(c, axis=-1) / self.radius
        return np.max(np.abs(c), axis=-1) / self.radius

    def bump_many(self, coords: np.ndarray) -> np.ndarray:
        c = (coords - np.asarray(self.center, float)) / self.support
        if self.shape == "disk":
            return _bump(np.linalg.norm(c, axis=-1))
        return np.prod(_bump(c), axis=-1)


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    chart: int
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float).reshape(-1))


@dataclass(frozen=True, eq=False)
class TangentVector:
    at: ManifoldPoint
    comps: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "comps", np.asarray(self.comps, dtype=float).reshape(-1))


@dataclass(frozen=True, eq=False)
class ManifoldSpec:
    kind: ManifoldKind
    dim: int
    charts: tuple
    overlaps: frozenset
    transition_fn: Callable[[int, int, np.ndarray], np.ndarray] = field(repr=False)
    jacobian_fn: Callable[[int, int, np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    embed_fn: Callable[[ManifoldPoint], np.ndarray] | None = field(default=None, repr=False)
    sampler: Callable[[int, int, float], list] | None = field(default=None, repr=False)
    name: str = ""

    def point(self, chart: int, coords) -> ManifoldPoint:
        p = ManifoldPoint(chart, coords)
        if p.coords.shape != (self.dim,):
            raise ChartError(f"expected {self.dim} coordinates")
        if not self.charts[chart].contains(p.coords):
            raise ChartError(f"coordinates {p.coords} outside chart {self.charts[chart].name}")
        return p

    def overlap(self, i: int, j: int) -> bool:
        return i == j or (i, j) in self.overlaps or (j, i) in self.overlaps

    def embed(self, p: ManifoldPoint) -> np.ndarray:
        if self.embed_fn is None:
            raise NotImplementedError(f"{self.name} has no embedding")
        return self.embed_fn(p)


# --- operations -------------------------------------------------------------


def change_chart(m: ManifoldSpec, p: ManifoldPoint, target: int) -> ManifoldPoint:
    if p.chart == target:
        return p
    if not m.overlap(p.chart, target):
        raise ChartError(f"charts {p.chart} and {target} do not overlap")
    coords = m.transition_fn(target, p.chart, p.coords)
    if coords is None or not m.charts[target].contains(coords):
        raise ChartError(f"point {p.coords} of chart {p.chart} is not in chart {target}")
    return ManifoldPoint(target, coords)


def charts_containing(m: ManifoldSpec, p: ManifoldPoint, margin: float = 0.0) -> list[int]:
    out = []
    for i, chart in enumerate(m.charts):
        if i == p.chart:
            if chart.contains(p.coords, margin):
                out.append(i)
            continue
        if not m.overlap(p.chart, i):
            continue
        c = m.transition_fn(i, p.chart, p.coords)
        if c is not None and chart.contains(c, margin):
            out.append(i)
    return out


def preferred_chart(m: ManifoldSpec, p: ManifoldPoint) -> int:
    """Highest-priority (lowest-index) chart containing p."""
    found = charts_containing(m, p)
    if not found:
        raise ChartError("point lies in no chart")
    return found[0]


def transition_jacobian(m: ManifoldSpec, target: int, p: ManifoldPoint, fd_step: float | None = None) -> np.ndarray:
    """d(target coords)/d(p.chart coords) at p."""
    if target == p.chart:
        return np.eye(m.dim)
    if m.jacobian_fn is not None and fd_step is None:
        return m.jacobian_fn(target, p.chart, p.coords)
    h = DEFAULT.fd_richardson_step if fd_step is None else fd_step
    return numerics.jacobian(lambda c: m.transition_fn(target, p.chart, c), p.coords, h, richardson=True)


def push_tangent(m: ManifoldSpec, v: TangentVector, target: int) -> TangentVector:
    q = change_chart(m, v.at, target)
    jac = transition_jacobian(m, target, v.at)
    return TangentVector(q, jac @ v.comps)


def partition_of_unity(m: ManifoldSpec, p: ManifoldPoint) -> np.ndarray:
    """Normalized bump weights lambda_i(p), one per chart."""
    w = np.zeros(len(m.charts))
    for i in charts_containing(m, p):
        q = change_chart(m, p, i)
        w[i] = m.charts[i].bump(q.coords)
    total = w.sum()
    if total <= 0:
        raise ChartError("partition of unity vanishes at point")
    return w / total


def sample_points(m: ManifoldSpec, count: int, seed: int, margin: float | None = None) -> list[ManifoldPoint]:
    if count < 1:
        raise ValueError("count must be >= 1")
    margin = DEFAULT.sample_margin if margin is None else margin
    return m.sampler(count, seed, margin)


def _halton(d: int, count: int, seed: int) -> np.ndarray:
    return qmc.Halton(d=d, scramble=True, seed=seed).random(count)


def _gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _chart_quadrature(chart: ChartSpec, n: int):
    """Nodes (k, 2) and weights (k,) covering the chart domain."""
    c = np.asarray(chart.center, float)
    rad = chart.support
    if chart.shape == "disk":
        r, wr = _gauss_legendre(n, 0.0, rad)
        nt = 2 * n
        t = 2 * np.pi * np.arange(nt) / nt
        rr, tt = np.meshgrid(r, t, indexing="ij")
        nodes = np.stack([rr.ravel() * np.cos(tt.ravel()), rr.ravel() * np.sin(tt.ravel())], axis=1) + c
        weights = (wr[:, None] * rr * (2 * np.pi / nt)).ravel()
        return nodes, weights
    xs, wx = _gauss_legendre(n, c[0] - rad, c[0] + rad)
    ys, wy = _gauss_legendre(n, c[1] - rad, c[1] + rad)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    return np.stack([xx.ravel(), yy.ravel()], axis=1), (wx[:, None] * wy[None, :]).ravel()


_WEIGHT_CACHE: dict = {}


def _weighted_nodes(m: ManifoldSpec, i: int, n: int) -> list[tuple[ManifoldPoint, float]]:
    key = (m.kind, m.charts, i, n)
    if key not in _WEIGHT_CACHE:
        chart = m.charts[i]
        nodes, weights = _chart_quadrature(chart, n)
        keep = chart.extent_many(nodes) < 1.0
        nodes, weights = nodes[keep], weights[keep]
        # transition functions of the shipped atlases act row-wise on (k, dim) arrays
        bumps = np.zeros((len(m.charts), len(nodes)))
        for j, other in enumerate(m.charts):
            if j == i:
                bumps[j] = chart.bump_many(nodes)
            elif m.overlap(i, j):
                c = m.transition_fn(j, i, nodes)
                bumps[j] = np.where(other.extent_many(c) < 1.0, other.bump_many(c), 0.0)
        lam = bumps[i] / bumps.sum(axis=0)
        _WEIGHT_CACHE[key] = [(ManifoldPoint(i, x), w * l) for x, w, l in zip(nodes, weights, lam) if l > 0]
    return _WEIGHT_CACHE[key]


def integrate_2form(
    m: ManifoldSpec,
    density: Callable[[ManifoldPoint], float],
    tol: float | None = None,
    start: int = 32,
    max_levels: int = 3,
) -> float:
    """Integrate a 2-form given by its chart-coordinate density f(p) (the form is f du^1 ^ du^2).

    Partition-of-unity weighted Gauss quadrature over every chart, refined by
    doubling the node count until successive results agree to ``tol``.
    """
    if m.dim != 2:
        raise ValueError("integrate_2form needs a 2-dimensional manifold")
    if m.kind == ManifoldKind.EUCLIDEAN:
        raise ValueError("integrate_2form needs a compact atlas")
    tol = DEFAULT.quadrature if tol is None else tol

    def level(n: int) -> float:
        return sum(w * density(p) for i in range(len(m.charts)) for p, w in _weighted_nodes(m, i, n))

    n = start
    prev = level(n)
    for _ in range(max_levels):
        n *= 2
        cur = level(n)
        if abs(cur - prev) < tol:
            return cur
        change, prev = abs(cur - prev), cur
    raise QuadratureError(f"quadrature did not stabilize to {tol:.1e} (last change {change:.3e})")


# --- concrete atlases --------------------------------------------------------

SPHERE_CHART_RADIUS = 4.0
SPHERE_BUMP_RADIUS = 2.0


def _inversion(c: np.ndarray) -> np.ndarray:
    # (a, b) -> (a, -b) / (a^2 + b^2), i.e. z -> 1/z; row-wise on (k, 2) arrays
    c = np.asarray(c, float)
    r2 = c[..., 0] ** 2 + c[..., 1] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.stack([c[..., 0], -c[..., 1]], axis=-1) / r2[..., None]
    if out.ndim == 1 and r2 == 0:
        return None
    return out


def _inversion_jacobian(c: np.ndarray) -> np.ndarray:
    a, b = c
    r4 = (a * a + b * b) ** 2
    return np.array([[b * b - a * a, -2 * a * b], [2 * a * b, b * b - a * a]]) / r4


def sphere_embed(p: ManifoldPoint) -> np.ndarray:
    u = p.coords
    s = u @ u
    if p.chart == 0:
        return np.array([2 * u[0], 2 * u[1], s - 1.0]) / (1.0 + s)
    return np.array([2 * u[0], -2 * u[1], 1.0 - s]) / (1.0 + s)


def sphere_chart_coords(x: np.ndarray, chart: int) -> np.ndarray:
    if chart == 0:
        return np.array([x[0], x[1]]) / (1.0 - x[2])
    return np.array([x[0], -x[1]]) / (1.0 + x[2])


def _sphere_sampler(count: int, seed: int, margin: float) -> list[ManifoldPoint]:
    uv = _halton(2, count, seed)
    z = 2 * uv[:, 0] - 1
    phi = 2 * np.pi * uv[:, 1]
    rho = np.sqrt(np.clip(1 - z * z, 0, None))
    pts = []
    for x in np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1):
        chart = 0 if x[2] <= 0 else 1
        pts.append(ManifoldPoint(chart, sphere_chart_coords(x, chart)))
    return pts


def sphere2() -> ManifoldSpec:
    charts = (
        ChartSpec("north-stereo", "disk", (0.0, 0.0), SPHERE_CHART_RADIUS, SPHERE_BUMP_RADIUS),
        ChartSpec("south-stereo", "disk", (0.0, 0.0), SPHERE_CHART_RADIUS, SPHERE_BUMP_RADIUS),
    )
    return ManifoldSpec(
        ManifoldKind.SPHERE2,
        2,
        charts,
        frozenset({(0, 1)}),
        transition_fn=lambda i, j, c: c.copy() if i == j else _inversion(c),
        jacobian_fn=lambda i, j, c: np.eye(2) if i == j else _inversion_jacobian(c),
        embed_fn=sphere_embed,
        sampler=_sphere_sampler,
        name="S^2",
    )


TORUS_HALF_WIDTH = 0.75 * np.pi
_TORUS_CENTERS = ((0.0, 0.0), (np.pi, 0.0), (0.0, np.pi), (np.pi, np.pi))


def _wrap(x: np.ndarray) -> np.ndarray:
    """Representative in [-pi, pi)."""
    return (x + np.pi) % (2 * np.pi) - np.pi


def _torus_transition(i: int, j: int, c: np.ndarray) -> np.ndarray:
    ci = np.asarray(_TORUS_CENTERS[i])
    return ci + _wrap(np.asarray(c, float) - ci)


def _torus_sampler(count: int, seed: int, margin: float) -> list[ManifoldPoint]:
    uv = 2 * np.pi * _halton(2, count, seed)
    pts = []
    for x in uv:
        near_pi = np.abs(_wrap(x - np.pi)) < np.abs(_wrap(x))
        chart = int(near_pi[0]) + 2 * int(near_pi[1])
        pts.append(ManifoldPoint(chart, _torus_transition(chart, -1, x)))
    return pts


def torus_embed(p: ManifoldPoint) -> np.ndarray:
    """Flat torus in R^4; chart-independent because charts differ by 2 pi shifts."""
    x, y = p.coords
    return np.array([np.cos(x), np.sin(x), np.cos(y), np.sin(y)])


def torus2() -> ManifoldSpec:
    charts = tuple(ChartSpec(f"square-{k}", "box", c, TORUS_HALF_WIDTH) for k, c in enumerate(_TORUS_CENTERS))
    pairs = frozenset((i, j) for i in range(4) for j in range(i + 1, 4))
    return ManifoldSpec(
        ManifoldKind.TORUS2,
        2,
        charts,
        pairs,
        transition_fn=_torus_transition,
        jacobian_fn=lambda i, j, c: np.eye(2),
        embed_fn=torus_embed,
        sampler=_torus_sampler,
        name="T^2",
    )


def euclidean(n: int = 2, half_width: float = 10.0) -> ManifoldSpec:
    def sampler(count: int, seed: int, margin: float) -> list[ManifoldPoint]:
        return [ManifoldPoint(0, 2 * x - 1) for x in _halton(n, count, seed)]

    return ManifoldSpec(
        ManifoldKind.EUCLIDEAN,
        n,
        (ChartSpec("identity", "box", tuple([0.0] * n), half_width),),
        frozenset(),
        transition_fn=lambda i, j, c: np.asarray(c, float).copy(),
        jacobian_fn=lambda i, j, c: np.eye(n),
        sampler=sampler,
        name=f"R^{n}",
    )


# --- metrics -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MetricField:
    """Chart components g_ij(p) of a Riemannian metric."""

    manifold: ManifoldSpec
    components: Callable[[ManifoldPoint], np.ndarray] = field(repr=False)
    name: str = ""

    def __call__(self, p: ManifoldPoint) -> np.ndarray:
        return np.asarray(self.components(p), float)


def round_sphere_metric(m: ManifoldSpec) -> MetricField:
    def comps(p: ManifoldPoint) -> np.ndarray:
        s = p.coords @ p.coords
        return 4.0 / (1.0 + s) ** 2 * np.eye(2)

    return MetricField(m, comps, "round")


def flat_metric(m: ManifoldSpec) -> MetricField:
    return MetricField(m, lambda p: np.eye(m.dim), "flat")


def random_torus_metric(m: ManifoldSpec, seed: int, modes: int = 2) -> MetricField:
    """A smooth positive-definite metric g = A A^T + I/2 with trigonometric A."""
    rng = np.random.default_rng(seed)
    coef = 0.4 * rng.standard_normal((2, 2, modes, modes, 2))

    def comps(p: ManifoldPoint) -> np.ndarray:
        th, ph = p.coords
        a = np.zeros((2, 2))
        for k in range(modes):
            for l in range(modes):
                a += coef[:, :, k, l, 0] * np.cos(k * th + l * ph) + coef[:, :, k, l, 1] * np.sin(k * th + l * ph)
        return a @ a.T + 0.5 * np.eye(2)

    return MetricField(m, comps, f"random-torus-{seed}")


def metric_min_eigenvalue(g: MetricField, points: Sequence[ManifoldPoint]) -> float:
    return min(float(np.linalg.eigvalsh(0.5 * (g(p) + g(p).T))[0]) for p in points)


def christoffel(g: MetricField, p: ManifoldPoint, h: float | None = None, richardson: bool = True) -> np.ndarray:
    """Gamma[k, i, j] = Gamma^k_ij of the Levi-Civita connection in chart coordinates, by finite differences."""
    h = DEFAULT.fd_richardson_step if h is None else h
    n = g.manifold.dim
    dg = np.stack(
        [numerics.directional(lambda c: g(ManifoldPoint(p.chart, c)), p.coords, e, h, richardson) for e in np.eye(n)]
    )  # dg[l, i, j] = d_l g_ij
    ginv = np.linalg.inv(g(p))
    # Gamma^k_ij = 1/2 g^kl (d_i g_lj + d_j g_li - d_l g_ij)
    lower = 0.5 * (np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg)
    return np.einsum("kl,lij->kij", ginv, lower)
