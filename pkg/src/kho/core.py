"""
Grids, grid-sampled wavefunctions and Gaussian state preparation.

Position Q and momentum P are dimensionless with [Q, P] = i*hbar, where
hbar is the effective Planck constant of the kicked oscillator. Amplitudes
are point samples on a uniform, origin-symmetric position grid; the
quadrature weight of every node is dq.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import GridMismatchError, GridOverflowError

#: fraction of nodes at each edge inspected by the aliasing guard
EDGE_FRACTION = 0.02
#: largest probability tolerated in the edge nodes
EDGE_MASS_LIMIT = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid ``q_j = q_min + j*dq`` with ``q_min = -q_max``."""

    n_points: int
    q_max: float
    hbar: float

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points}")
        if not self.q_max > 0:
            raise ValueError(f"q_max must be positive, got {self.q_max}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @property
    def q_min(self) -> float:
        return -self.q_max

    @property
    def dq(self) -> float:
        return 2.0 * self.q_max / self.n_points

    @property
    def dp(self) -> float:
        return 2.0 * math.pi * self.hbar / (self.n_points * self.dq)

    @property
    def p_max(self) -> float:
        """Nyquist momentum ``pi*hbar/dq``."""
        return math.pi * self.hbar / self.dq

    @property
    def q(self) -> np.ndarray:
        return self.q_min + self.dq * np.arange(self.n_points)

    @property
    def p(self) -> np.ndarray:
        """Momenta in numpy FFT order (zero first)."""
        return 2.0 * math.pi * self.hbar * np.fft.fftfreq(self.n_points, d=self.dq)


def make_grid(n_points: int, q_max: float, hbar: float) -> GridSpec:
    if int(n_points) != n_points:
        raise ValueError(f"n_points must be an integer, got {n_points}")
    return GridSpec(int(n_points), float(q_max), float(hbar))


@dataclass(frozen=True)
class KhoParams:
    """One Floquet step: kick ``K cos(Q + phi)`` followed by rotation ``alpha``."""

    K: float
    alpha: float
    phi: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not self.K >= 0:
            raise ValueError(f"kick strength must be >= 0, got {self.K}")


@dataclass(frozen=True)
class GaussianSpec:
    """Pure Gaussian state.

    ``squeeze`` is the ratio of the position width to that of the symmetric
    minimum-uncertainty state; ``tilt`` rotates the squeeze axes
    counterclockwise in the (Q, P) plane.
    """

    q0: float = 0.0
    p0: float = 0.0
    squeeze: float = 1.0
    tilt: float = 0.0

    def __post_init__(self):
        if not self.squeeze > 0:
            raise ValueError(f"squeeze must be positive, got {self.squeeze}")

    def covariance(self, hbar: float) -> np.ndarray:
        """Phase-space covariance matrix of the (Q, P) quadratures."""
        c, s = math.cos(self.tilt), math.sin(self.tilt)
        rot = np.array([[c, -s], [s, c]])
        base = 0.5 * hbar * np.diag([self.squeeze**2, self.squeeze**-2])
        return rot @ base @ rot.T

    def major_axis(self, hbar: float) -> tuple[np.ndarray, float]:
        """Unit vector and standard deviation along the widest direction."""
        vals, vecs = np.linalg.eigh(self.covariance(hbar))
        axis = vecs[:, -1]
        # canonical sign: pointing towards +Q (or +P when vertical)
        if axis[0] < -1e-15 or (abs(axis[0]) <= 1e-15 and axis[1] < 0):
            axis = -axis
        return axis, float(math.sqrt(vals[-1]))


@dataclass(frozen=True, eq=False)
class QuantumState:
    amplitudes: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} amplitudes, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def hbar(self) -> float:
        return self.grid.hbar

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dq)

    def momentum_amplitudes(self) -> np.ndarray:
        """Momentum-space amplitudes in FFT order, normalized with weight dp.

        The phase of the result refers to the grid origin at ``q_min``; only
        densities and relative phases are meaningful.
        """
        g = self.grid
        return np.fft.fft(self.amplitudes) * g.dq / math.sqrt(2 * math.pi * g.hbar)

    def with_amplitudes(self, amplitudes: np.ndarray) -> "QuantumState":
        return QuantumState(amplitudes, self.grid)


def edge_mass(state: QuantumState) -> tuple[float, float]:
    """Probability in the outer nodes of the position and momentum grids."""
    g = state.grid
    k = max(1, int(math.ceil(EDGE_FRACTION * g.n_points)))
    rho_q = np.abs(state.amplitudes) ** 2 * g.dq
    q_edge = float(rho_q[:k].sum() + rho_q[-k:].sum())
    rho_p = np.fft.fftshift(np.abs(state.momentum_amplitudes()) ** 2) * g.dp
    p_edge = float(rho_p[:k].sum() + rho_p[-k:].sum())
    return q_edge, p_edge


def check_boundary(state: QuantumState, where: str = "", step: int | None = None) -> None:
    """Raise :class:`GridOverflowError` if the state leaks into the grid edges."""
    q_edge, p_edge = edge_mass(state)
    if q_edge >= EDGE_MASS_LIMIT or p_edge >= EDGE_MASS_LIMIT:
        axis = "position" if q_edge >= p_edge else "momentum"
        raise GridOverflowError(
            f"{axis} edge mass {max(q_edge, p_edge):.3e} exceeds {EDGE_MASS_LIMIT:g}",
            where=where,
            step=step,
            axis=axis,
        )


def gaussian_amplitudes(spec: GaussianSpec, q: np.ndarray, hbar: float) -> np.ndarray:
    """Unnormalized Gaussian wavefunction with the covariance of ``spec``."""
    cov = spec.covariance(hbar)
    s_qq, s_qp = cov[0, 0], cov[0, 1]
    gamma = (s_qp + 0.5j * hbar) / s_qq
    x = q - spec.q0
    return np.exp(1j / hbar * (0.5 * gamma * x**2 + spec.p0 * x))


def prepare_gaussian(spec: GaussianSpec, grid: GridSpec, hbar: float | None = None) -> QuantumState:
    """Sample a normalized Gaussian on ``grid``.

    Raises
    ------
    GridOverflowError
        If the Gaussian does not fit inside the grid.
    """
    if hbar is not None and not math.isclose(hbar, grid.hbar, rel_tol=1e-12):
        raise GridMismatchError(f"hbar {hbar} differs from the grid's {grid.hbar}")
    psi = gaussian_amplitudes(spec, grid.q, grid.hbar)
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dq)
    state = QuantumState(psi, grid)
    check_boundary(state, where="prepare_gaussian")
    return state


def _check_same_grid(a: QuantumState, b: QuantumState) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    """``<a|b>`` with quadrature weight dq."""
    _check_same_grid(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.grid.dq)


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """Overlap modulus ``|<a|b>|``."""
    return abs(inner_product(a, b))


class Moments(NamedTuple):
    mean_q: float
    mean_p: float
    var_q: float
    var_p: float
    energy: float


def expectations(state: QuantumState) -> Moments:
    """First and second moments; momentum moments use the Fourier pair.

    ``energy`` is ``(<Q^2> + <P^2>)/2``.
    """
    g = state.grid
    norm = state.norm()
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"state is not normalized (norm {norm:.12g})")
    rho_q = np.abs(state.amplitudes) ** 2 * g.dq / norm
    q = g.q
    mq = float(np.dot(rho_q, q))
    q2 = float(np.dot(rho_q, q * q))
    rho_p = np.abs(state.momentum_amplitudes()) ** 2 * g.dp / norm
    p = g.p
    mp = float(np.dot(rho_p, p))
    p2 = float(np.dot(rho_p, p * p))
    return Moments(mq, mp, q2 - mq * mq, p2 - mp * mp, 0.5 * (q2 + p2))


def _next_pow2(x: float) -> int:
    return 1 << max(1, math.ceil(math.log2(max(x, 2.0))))


def kick_reach(K: float, hbar: float, tol: float = 1e-6) -> float:
    """Momentum transfer of one kick beyond which amplitudes fall below ``tol``.

    The kick phase expands into harmonics ``J_m(K/hbar)`` carrying momentum
    ``m*hbar``; for large hbar this exceeds the classical bound K.
    """
    if K == 0:
        return 0.0
    x = K / hbar
    m = np.arange(0, int(x + 20 * (x + 1) ** (1 / 3) + 40))
    small = (m > x) & (np.abs(special.jv(m, x)) < tol)
    return float(hbar * m[np.argmax(small)])


def phase_space_radius(spec: GaussianSpec, hbar: float, K: float = 0.0, n_kicks: int = 0) -> float:
    """Radius bounding the state after ``n_kicks`` kicks of strength K.

    Rotations preserve radius and each kick moves a classical point by at
    most K; the quantum excess of :func:`kick_reach` over K is added once.
    This is an estimate, not a bound: evolutions re-grid on overflow.
    """
    if n_kicks == 0:
        K = 0.0
    _, sigma = spec.major_axis(hbar)
    excess = max(0.0, kick_reach(K, hbar) - K)
    return math.hypot(spec.q0, spec.p0) + 7.0 * sigma + n_kicks * K + excess + 1.0


def default_grid(spec: GaussianSpec, hbar: float, K: float = 0.0, n_kicks: int = 0,
                 min_points: int = 1024) -> GridSpec:
    """Grid holding the evolved state with room for the Wigner transform.

    The Wigner transform resolves momenta up to ``p_max/2``, so the grid is
    sized such that both ``q_max`` and ``p_max/2`` exceed the bounding radius.
    """
    radius = phase_space_radius(spec, hbar, K, n_kicks)
    q_max = max(20.0, 1.25 * radius)
    # p_max = pi*hbar*n/(2*q_max) >= 2.5*radius
    needed = 5.0 * radius * q_max / (math.pi * hbar)
    return make_grid(max(min_points, _next_pow2(needed)), q_max, hbar)


def enlarge(grid: GridSpec, axis: str) -> GridSpec:
    """Grid grown to absorb an overflow along ``axis``.

    Position overflow doubles the extent at fixed dq; momentum overflow
    halves dq at fixed extent.
    """
    if axis == "position":
        return make_grid(2 * grid.n_points, 2 * grid.q_max, grid.hbar)
    return make_grid(2 * grid.n_points, grid.q_max, grid.hbar)
