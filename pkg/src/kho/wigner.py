"""
Wigner functions of grid states and phase-space diagnostics.

    W(Q, P) = 1/(2 pi hbar) * Int psi(Q + x/2) psi*(Q - x/2) exp(-i P x / hbar) dx

Each row is the FFT of ``psi[j+m] * conj(psi[j-m])`` over m, i.e. the
separation x runs over even multiples of dq. The resulting momentum axis
has spacing ``pi*hbar/(n*dq)`` (half the grid's dp) and covers
``|P| < p_max/2``, so states must be confined to half the momentum band.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import QuantumState
from .errors import GridOverflowError

#: momentum mass allowed outside the band the Wigner transform resolves
BAND_MASS_LIMIT = 1e-10


@dataclass(frozen=True, eq=False)
class WignerGrid:
    values: np.ndarray  # shape (len(q_axis), len(p_axis))
    q_axis: np.ndarray
    p_axis: np.ndarray
    hbar: float

    @property
    def dq(self) -> float:
        return float(self.q_axis[1] - self.q_axis[0])

    @property
    def dp(self) -> float:
        return float(self.p_axis[1] - self.p_axis[0])

    def total(self) -> float:
        return float(self.values.sum() * self.dq * self.dp)

    def q_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.dp

    def p_marginal(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.dq

    def purity(self) -> float:
        """``2 pi hbar * sum W^2 dq dp``; 1 for pure states."""
        return float(2 * math.pi * self.hbar * np.sum(self.values**2) * self.dq * self.dp)

    def moments(self) -> tuple[np.ndarray, np.ndarray]:
        """Mean vector and covariance matrix of (Q, P) under W."""
        w = self.values * self.dq * self.dp
        q = self.q_axis[:, None]
        p = self.p_axis[None, :]
        norm = w.sum()
        mq = (w * q).sum() / norm
        mp = (w * p).sum() / norm
        cqq = (w * (q - mq) ** 2).sum() / norm
        cpp = (w * (p - mp) ** 2).sum() / norm
        cqp = (w * (q - mq) * (p - mp)).sum() / norm
        return np.array([mq, mp]), np.array([[cqq, cqp], [cqp, cpp]])


def _check_band(state: QuantumState) -> None:
    g = state.grid
    rho = np.abs(state.momentum_amplitudes()) ** 2 * g.dp
    outside = float(rho[np.abs(g.p) >= 0.5 * g.p_max].sum())
    if outside > BAND_MASS_LIMIT:
        raise GridOverflowError(
            f"momentum mass {outside:.3e} outside |P| < p_max/2; refine the grid",
            where="wigner_transform",
            axis="momentum",
        )


def wigner_transform(state: QuantumState) -> WignerGrid:
    g = state.grid
    _check_band(state)
    n = g.n_points
    psi = state.amplitudes
    j = np.arange(n)[:, None]
    m = np.fft.ifftshift(np.arange(-(n // 2), n - n // 2))[None, :]
    plus, minus = j + m, j - m
    inside = (plus >= 0) & (plus < n) & (minus >= 0) & (minus < n)
    corr = np.where(inside, psi[np.clip(plus, 0, n - 1)] * np.conj(psi[np.clip(minus, 0, n - 1)]), 0)
    spectrum = np.fft.fftshift(np.fft.fft(corr, axis=1), axes=1)
    values = spectrum.real * (g.dq / (math.pi * g.hbar))
    k = np.arange(-(n // 2), n - n // 2)
    p_axis = k * (math.pi * g.hbar / (n * g.dq))
    return WignerGrid(values, g.q.copy(), p_axis, g.hbar)


def negativity_volume(w: WignerGrid) -> float:
    """Integrated negative part of W."""
    return float(np.clip(-w.values, 0, None).sum() * w.dq * w.dp)


@dataclass(frozen=True)
class FringeEstimate:
    wavevector: tuple[float, float]  # (k_Q, k_P), radians per unit length
    wavelength: float
    area: float
    relative_power: float


def fringe_analysis(w: WignerGrid, envelope_sigma: float = 3.0,
                    min_power: float = 1e-6) -> FringeEstimate | None:
    """Dominant interference fringe of W from its 2-D power spectrum.

    Smooth structure is excluded twice over. A Gaussian with W's covariance
    C has spectrum ``exp(-k.C.k/2)``, and a minimum-uncertainty blob has
    ``exp(-hbar |k|^2/4)``; a frequency is a fringe candidate only where both
    exponents exceed ``envelope_sigma**2 / 2``. The strongest candidate that
    is also a local maximum of the spectrum is taken, provided its power
    exceeds ``min_power`` times the zero-frequency power. The peak position
    is refined by a parabola through the log-power of its axis neighbours.

    ``area`` is the square of the half wavelength: the tile of one sign in a
    checkerboard pattern of that wavelength.

    Returns None when no fringe is found (e.g. for Gaussian states).
    """
    spec = np.fft.fftshift(np.abs(np.fft.fft2(w.values)) ** 2)
    nq, npp = w.values.shape
    kq = 2 * math.pi * np.fft.fftshift(np.fft.fftfreq(nq, d=w.dq))
    kp = 2 * math.pi * np.fft.fftshift(np.fft.fftfreq(npp, d=w.dp))
    _, cov = w.moments()
    KQ, KP = np.meshgrid(kq, kp, indexing="ij")
    quad = cov[0, 0] * KQ**2 + 2 * cov[0, 1] * KQ * KP + cov[1, 1] * KP**2
    blob = 0.5 * w.hbar * (KQ**2 + KP**2)
    # one half-plane suffices: the spectrum of a real function is symmetric
    half = (KP > 0) | ((KP == 0) & (KQ > 0))
    peaks = spec >= ndimage.maximum_filter(spec, size=3, mode="constant")
    allowed = (quad >= envelope_sigma**2) & (blob >= envelope_sigma**2) & half & peaks
    candidates = np.where(allowed, spec, 0.0)
    i, j = np.unravel_index(np.argmax(candidates), candidates.shape)
    zero = spec[nq // 2, npp // 2]
    if zero <= 0 or candidates[i, j] < min_power * zero:
        return None

    logspec = np.log(spec + 1e-300)

    def refine(axis_vals, logs, idx):
        if 0 < idx < len(axis_vals) - 1:
            a, b, c = logs
            denom = a - 2 * b + c
            if denom < 0:
                return axis_vals[idx] + 0.5 * (a - c) / denom * (axis_vals[1] - axis_vals[0])
        return axis_vals[idx]

    kq_peak = refine(kq, logspec[i - 1:i + 2, j], i)
    kp_peak = refine(kp, logspec[i, j - 1:j + 2], j)
    wavelength = 2 * math.pi / math.hypot(kq_peak, kp_peak)
    return FringeEstimate((float(kq_peak), float(kp_peak)), wavelength,
                          (0.5 * wavelength) ** 2, float(candidates[i, j] / zero))


def fringe_scale(w: WignerGrid) -> float | None:
    """Area of the finest interference tile of W, or None without fringes."""
    est = fringe_analysis(w)
    return None if est is None else est.area


@dataclass(frozen=True)
class LinearPhaseSpaceMap:
    """Invertible linear map of phase-space coordinates."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        if abs(np.linalg.det(m)) < 1e-14:
            raise ValueError("linear map is singular")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def is_symplectic(self, tol: float = 1e-12) -> bool:
        return abs(self.det - 1.0) < tol

    @classmethod
    def rotation(cls, angle: float) -> "LinearPhaseSpaceMap":
        c, s = math.cos(angle), math.sin(angle)
        return cls(np.array([[c, -s], [s, c]]))

    @classmethod
    def scaling(cls, sq: float, sp: float) -> "LinearPhaseSpaceMap":
        return cls(np.diag([sq, sp]))

    def __matmul__(self, other: "LinearPhaseSpaceMap") -> "LinearPhaseSpaceMap":
        return LinearPhaseSpaceMap(self.matrix @ other.matrix)


def apply_linear_map(w: WignerGrid, E: LinearPhaseSpaceMap, order: int = 3) -> WignerGrid:
    """Resample ``W'(z) = W(E z) / |det E|`` on the same axes, renormalized.

    ``order`` is the spline order of the interpolation (1 for bilinear).
    """
    if not isinstance(E, LinearPhaseSpaceMap):
        E = LinearPhaseSpaceMap(E)
    Q, P = np.meshgrid(w.q_axis, w.p_axis, indexing="ij")
    m = E.matrix
    src_q = m[0, 0] * Q + m[0, 1] * P
    src_p = m[1, 0] * Q + m[1, 1] * P
    iq = (src_q - w.q_axis[0]) / w.dq
    ip = (src_p - w.p_axis[0]) / w.dp
    values = ndimage.map_coordinates(w.values, [iq, ip], order=order, mode="constant", cval=0.0)
    values /= abs(E.det)
    total = values.sum() * w.dq * w.dp
    if total != 0:
        values *= w.total() / total
    return WignerGrid(values, w.q_axis, w.p_axis, w.hbar)
