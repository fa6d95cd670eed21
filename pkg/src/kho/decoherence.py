"""
Dephasing of a polarization qubit by the kicked oscillator.

The kick acts on the H component only, so after n steps

    rho = 1/2 [[1, f e^{-i chi}], [f* e^{i chi}, 1]]    (basis H, V)

for an initial equatorial qubit (|H> + e^{i chi}|V>)/sqrt(2), with the
fidelity amplitude ``f = <U_SHO^n psi | U_KHO^n psi>``. Purity is
``(1 + |f|^2)/2``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (GaussianSpec, KhoParams, QuantumState, default_grid, enlarge,
                   inner_product, make_grid, prepare_gaussian)
from .errors import GridOverflowError
from .propagators import apply_rotation, kho_step

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class QubitState:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > 1e-12:
            raise ValueError(f"trace is {np.trace(rho)}, expected 1")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ValueError("density matrix is not positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    def bloch(self) -> np.ndarray:
        return np.real([np.trace(self.rho @ s) for s in (PAULI_X, PAULI_Y, PAULI_Z)])


def fidelity_curve(initial: QuantumState, params: KhoParams, n: int) -> np.ndarray:
    """Complex ``f(k)`` for k = 0..n from one pass of both branches."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    kho, sho = initial, initial
    out = np.empty(n + 1, dtype=complex)
    out[0] = inner_product(sho, kho)
    for k in range(1, n + 1):
        kho = kho_step(kho, params, step=k)
        sho = apply_rotation(sho, params.alpha)
        out[k] = inner_product(sho, kho)
    return out


def fidelity_amplitude(initial: QuantumState, params: KhoParams, n: int) -> complex:
    return complex(fidelity_curve(initial, params, n)[-1])


def qubit_from_fidelity(f: complex, azimuth: float = 0.0) -> QubitState:
    c = 0.5 * f * np.exp(-1j * azimuth)
    return QubitState(np.array([[0.5, c], [np.conj(c), 0.5]]))


def dephase_qubit(initial: QuantumState, params: KhoParams, n: int,
                  azimuth: float = 0.0) -> QubitState:
    """Qubit state after ``n`` steps; ``azimuth`` sets the initial equatorial state."""
    return qubit_from_fidelity(fidelity_amplitude(initial, params, n), azimuth)


@dataclass(frozen=True, eq=False)
class PurityCurve:
    params: KhoParams
    fidelity: np.ndarray  # complex f(n), n = 0..n_max
    grid: object = None
    error: str | None = None

    @property
    def n(self) -> np.ndarray:
        return np.arange(len(self.fidelity))

    @property
    def purity(self) -> np.ndarray:
        return 0.5 * (1 + np.abs(self.fidelity) ** 2)

    @property
    def ok(self) -> bool:
        return self.error is None


def purity_curve(spec: GaussianSpec, params: KhoParams, n_max: int,
                 max_regrids: int = 4, grid_size: tuple[int, float] | None = None) -> PurityCurve:
    """Purity curve, regridding on overflow.

    ``grid_size`` is an optional ``(n_points, q_max)`` starting grid; by
    default the grid is sized from the state and the kick strength.
    """
    if grid_size is None:
        grid = default_grid(spec, params.hbar, params.K, n_max)
    else:
        grid = make_grid(grid_size[0], grid_size[1], params.hbar)
    for _ in range(max_regrids + 1):
        try:
            state = prepare_gaussian(spec, grid)
            return PurityCurve(params, fidelity_curve(state, params, n_max), grid)
        except GridOverflowError as exc:
            last = exc
            grid = enlarge(grid, exc.axis)
    raise last


def purity_sweep(spec: GaussianSpec, template: KhoParams, n_max: int,
                 hbar_list, K_list, workers: int = 1,
                 grid_size: tuple[int, float] | None = None) -> list[PurityCurve]:
    """One curve per (K, hbar) cell, K-major order.

    Failing cells are returned with ``error`` set and an empty curve; the
    sweep carries on.
    """
    hbars = [float(h) for h in hbar_list]
    if any(not h > 0 for h in hbars):
        raise ValueError(f"all hbar values must be positive, got {hbars}")
    cells = [KhoParams(float(K), template.alpha, template.phi, h)
             for K in K_list for h in hbars]

    def run(params):
        try:
            return purity_curve(spec, params, n_max, grid_size=grid_size)
        except Exception as exc:  # reported per cell
            return PurityCurve(params, np.empty(0, dtype=complex), None, f"{type(exc).__name__}: {exc}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, cells))
    return [run(c) for c in cells]


STOKES_BASES = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "A": np.array([1, -1], dtype=complex) / math.sqrt(2),
    "R": np.array([1, 1j], dtype=complex) / math.sqrt(2),
    "L": np.array([1, -1j], dtype=complex) / math.sqrt(2),
}


@dataclass(frozen=True, eq=False)
class Tomography:
    intensities: dict
    raw: np.ndarray  # linear-inversion estimate before positivity projection
    state: QubitState
    clipped: bool


def projective_intensities(rho: QubitState, shot_noise: float | None = None,
                           rng: np.random.Generator | None = None) -> dict:
    """Six polarization projections, optionally with relative Gaussian noise."""
    out = {}
    for name, v in STOKES_BASES.items():
        out[name] = float(np.real(np.vdot(v, rho.rho @ v)))
    if shot_noise:
        rng = rng if rng is not None else np.random.default_rng(0)
        for name in out:
            out[name] *= 1.0 + shot_noise * rng.standard_normal()
    return out


def simulate_tomography(rho: QubitState, shot_noise: float | None = None,
                        seed: int = 0, rng: np.random.Generator | None = None) -> Tomography:
    """Six-projection tomography with linear inversion and positivity projection."""
    if rng is None:
        rng = np.random.default_rng(seed)
    I = projective_intensities(rho, shot_noise, rng)
    s1 = (I["H"] - I["V"]) / (I["H"] + I["V"])
    s2 = (I["D"] - I["A"]) / (I["D"] + I["A"])
    s3 = (I["R"] - I["L"]) / (I["R"] + I["L"])
    raw = 0.5 * (np.eye(2) + s2 * PAULI_X + s3 * PAULI_Y + s1 * PAULI_Z)
    vals, vecs = np.linalg.eigh(raw)
    clipped = bool(vals.min() < 0)
    vals = np.clip(vals, 0.0, None)
    vals /= vals.sum()
    est = (vecs * vals) @ vecs.conj().T
    est = 0.5 * (est + est.conj().T)
    return Tomography(I, raw, QubitState(est), clipped)
