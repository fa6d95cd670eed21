"""
Classical stroboscopic map of the kicked harmonic oscillator.

    P1 = P + K sin(Q + phi)
    (Q', P') = (cos a Q - sin a P1, sin a Q + cos a P1)

The rotation matrix is the Heisenberg flow of the quantum rotation, so
quantum means follow this map for weak kicks and narrow packets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import GaussianSpec, KhoParams
from .errors import PointBudgetExceeded

DEFAULT_SPACING = 0.05
DEFAULT_POINT_CAP = 1_000_000


class PhasePoint(NamedTuple):
    """A point (or arrays of points) in the (Q, P) plane."""

    q: float | np.ndarray
    p: float | np.ndarray


def classical_step(z: PhasePoint, params: KhoParams) -> PhasePoint:
    q, p = z
    c, s = math.cos(params.alpha), math.sin(params.alpha)
    p1 = p + params.K * np.sin(q + params.phi)
    return PhasePoint(c * q - s * p1, s * q + c * p1)


def classical_step_inverse(z: PhasePoint, params: KhoParams) -> PhasePoint:
    q, p = z
    c, s = math.cos(params.alpha), math.sin(params.alpha)
    q0 = c * q + s * p
    p1 = -s * q + c * p
    return PhasePoint(q0, p1 - params.K * np.sin(q0 + params.phi))


def jacobian(z: PhasePoint, params: KhoParams) -> np.ndarray:
    """Analytic Jacobian of :func:`classical_step` at a scalar point."""
    c, s = math.cos(params.alpha), math.sin(params.alpha)
    shear = np.array([[1.0, 0.0], [params.K * math.cos(z[0] + params.phi), 1.0]])
    return np.array([[c, -s], [s, c]]) @ shear


def iterate(z: PhasePoint, params: KhoParams, n: int) -> PhasePoint:
    for _ in range(n):
        z = classical_step(z, params)
    return z


@dataclass(frozen=True, eq=False)
class WebCloud:
    """Orbits of several seeds; ``points[i, k]`` is seed i after k steps."""

    points: np.ndarray  # shape (n_seeds, n_iter + 1, 2)
    params: KhoParams

    @property
    def max_radius(self) -> float:
        return float(np.hypot(self.points[..., 0], self.points[..., 1]).max())

    def flat(self) -> np.ndarray:
        return self.points.reshape(-1, 2)


def default_seeds(radius: float = math.pi, count: int = 12) -> list[PhasePoint]:
    """Ring of ``count`` seeds at ``radius`` plus the origin."""
    angles = 2 * math.pi * np.arange(count) / count
    ring = [PhasePoint(radius * math.cos(t), radius * math.sin(t)) for t in angles]
    return ring + [PhasePoint(0.0, 0.0)]


def stroboscopic_web(params: KhoParams, seeds: list[PhasePoint] | None, n_iter: int) -> WebCloud:
    if n_iter < 1:
        raise ValueError(f"n_iter must be >= 1, got {n_iter}")
    if seeds is None:
        seeds = default_seeds()
    q = np.array([s[0] for s in seeds], dtype=float)
    p = np.array([s[1] for s in seeds], dtype=float)
    out = np.empty((len(seeds), n_iter + 1, 2))
    out[:, 0, 0], out[:, 0, 1] = q, p
    z = PhasePoint(q, p)
    for k in range(1, n_iter + 1):
        z = classical_step(z, params)
        out[:, k, 0], out[:, k, 1] = z
    return WebCloud(out, params)


def rotation_distance(points: np.ndarray, angle: float, bins: int = 16,
                      quantile: float = 0.99) -> float:
    """Histogram distance between a point cloud and its rotation by ``angle``.

    Both clouds are binned on the square ``[-R, R]^2`` with R the given
    quantile of the radius; the result is ``sum|H - H_rot| / sum(H + H_rot)``,
    0 for a symmetric cloud and at most 1.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    radius = float(np.quantile(np.hypot(pts[:, 0], pts[:, 1]), quantile))
    c, s = math.cos(angle), math.sin(angle)
    turned = pts @ np.array([[c, s], [-s, c]])
    edges = np.linspace(-radius, radius, bins + 1)
    h, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=[edges, edges])
    h_rot, _, _ = np.histogram2d(turned[:, 0], turned[:, 1], bins=[edges, edges])
    return float(np.abs(h - h_rot).sum() / (h.sum() + h_rot.sum()))


@dataclass(frozen=True, eq=False)
class Polyline:
    """Curve sampled at ``points`` (shape (N, 2)).

    ``params`` holds each point's position along the initial segment, which
    lets refinement place new points exactly on the evolved curve.
    """

    points: np.ndarray
    spacing: float = DEFAULT_SPACING
    params: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("a polyline needs at least two (Q, P) points")
        object.__setattr__(self, "points", pts)
        if self.params is None:
            seg = np.hypot(*np.diff(pts, axis=0).T)
            t = np.concatenate([[0.0], np.cumsum(seg)])
            object.__setattr__(self, "params", t / t[-1])

    def length(self) -> float:
        return float(np.hypot(*np.diff(self.points, axis=0).T).sum())

    def max_gap(self) -> float:
        return float(np.hypot(*np.diff(self.points, axis=0).T).max())


def segment(start: tuple[float, float], end: tuple[float, float], spacing: float = DEFAULT_SPACING) -> Polyline:
    n = max(2, int(math.ceil(math.dist(start, end) / spacing)) + 1)
    t = np.linspace(0.0, 1.0, n)
    pts = np.outer(1 - t, start) + np.outer(t, end)
    return Polyline(pts, spacing, t)


def initial_manifold(spec: GaussianSpec, hbar: float, half_width: float = 3.0,
                     spacing: float = DEFAULT_SPACING) -> Polyline:
    """Major axis of the Gaussian, ``half_width`` standard deviations each way."""
    axis, sigma = spec.major_axis(hbar)
    center = np.array([spec.q0, spec.p0])
    reach = half_width * sigma * axis
    return segment(tuple(center - reach), tuple(center + reach), spacing)


def evolve_manifold(line: Polyline, params: KhoParams, n: int,
                    max_points: int = DEFAULT_POINT_CAP) -> list[Polyline]:
    """Images of ``line`` after 0..n steps, refined to ``line.spacing``.

    Gaps wider than the spacing are bisected in the initial parameter and the
    new point is mapped through all k steps, so every point lies on the
    exact image of the initial segment.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    t0, pts0 = line.params, line.points
    start, end = pts0[0], pts0[-1]
    straight = np.allclose(pts0, np.outer(1 - t0, start) + np.outer(t0, end))
    if not straight:
        # generic polylines: interpolate the initial curve piecewise linearly
        def origin(t):
            return np.column_stack([np.interp(t, t0, pts0[:, 0]), np.interp(t, t0, pts0[:, 1])])
    else:
        def origin(t):
            return np.outer(1 - t, start) + np.outer(t, end)

    history = [line]
    t = t0.copy()
    for k in range(1, n + 1):
        z = PhasePoint(*origin(t).T)
        z = iterate(z, params, k)
        pts = np.column_stack(z)
        while True:
            gaps = np.hypot(*np.diff(pts, axis=0).T)
            wide = np.nonzero(gaps > line.spacing)[0]
            if wide.size == 0:
                break
            if len(t) + wide.size > max_points:
                raise PointBudgetExceeded(
                    f"manifold needs more than {max_points} points at step {k}"
                )
            t_new = 0.5 * (t[wide] + t[wide + 1])
            z_new = iterate(PhasePoint(*origin(t_new).T), params, k)
            t = np.insert(t, wide + 1, t_new)
            pts = np.insert(pts, wide + 1, np.column_stack(z_new), axis=0)
        history.append(Polyline(pts, line.spacing, t.copy()))
    return history


def distance_to_polyline(q: np.ndarray, p: np.ndarray, line: Polyline) -> np.ndarray:
    """Euclidean distance from each (q, p) to the nearest polyline segment."""
    a = line.points[:-1]
    b = line.points[1:]
    pts = np.column_stack([np.ravel(q), np.ravel(p)])
    best = np.full(len(pts), np.inf)
    ab = b - a
    ab2 = np.einsum("ij,ij->i", ab, ab)
    ab2[ab2 == 0] = 1.0
    # chunk over points to bound memory
    for lo in range(0, len(pts), 2048):
        x = pts[lo:lo + 2048, None, :]
        u = np.clip(np.einsum("kij,ij->ki", x - a[None], ab) / ab2, 0.0, 1.0)
        proj = a[None] + u[..., None] * ab[None]
        best[lo:lo + 2048] = np.sqrt(((x - proj) ** 2).sum(-1)).min(axis=1)
    return best.reshape(np.shape(q))


@dataclass(frozen=True, eq=False)
class Histogram2D:
    density: np.ndarray  # shape (len(q_edges) - 1, len(p_edges) - 1)
    q_edges: np.ndarray
    p_edges: np.ndarray

    @property
    def cell_area(self) -> float:
        return float((self.q_edges[1] - self.q_edges[0]) * (self.p_edges[1] - self.p_edges[0]))

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        qc = 0.5 * (self.q_edges[1:] + self.q_edges[:-1])
        pc = 0.5 * (self.p_edges[1:] + self.p_edges[:-1])
        return np.meshgrid(qc, pc, indexing="ij")


def sample_gaussian(spec: GaussianSpec, hbar: float, count: int, seed: int = 0) -> PhasePoint:
    """Draws from the Gaussian's Wigner function (a classical density)."""
    rng = np.random.default_rng(seed)
    z = rng.multivariate_normal([spec.q0, spec.p0], spec.covariance(hbar), size=count)
    return PhasePoint(z[:, 0], z[:, 1])


def liouville_histogram(spec: GaussianSpec, hbar: float, params: KhoParams, n: int,
                        bins: int = 200, samples: int = 100_000, seed: int = 0,
                        extent: float | None = None) -> Histogram2D:
    """Monte Carlo push-forward of the Gaussian density through ``n`` steps.

    The density integrates to 1 over the binned square ``[-extent, extent]^2``
    (default: the sample range); samples outside are dropped before normalizing.
    """
    if samples < 10_000:
        raise ValueError(f"need at least 10^4 samples, got {samples}")
    z = iterate(sample_gaussian(spec, hbar, samples, seed), params, n)
    if extent is None:
        extent = float(max(np.abs(z.q).max(), np.abs(z.p).max())) * 1.001
    edges = np.linspace(-extent, extent, bins + 1)
    counts, qe, pe = np.histogram2d(z.q, z.p, bins=[edges, edges])
    area = (qe[1] - qe[0]) * (pe[1] - pe[0])
    return Histogram2D(counts / (counts.sum() * area), qe, pe)
