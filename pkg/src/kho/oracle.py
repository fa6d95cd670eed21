"""
Truncated number-basis oracle for the kicked oscillator.

Dense D x D matrices, independent of the grid propagator: the kick is
built by diagonalizing the truncated position operator and exponentiating
``cos(Q + phi)`` on its eigenbasis; the rotation is diagonal with entries
``exp(i alpha (k + 1))``, i.e. ``exp(i alpha/2) exp(i alpha (k + 1/2))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GridSpec, KhoParams, QuantumState
from .errors import TruncationError
from .propagators import kho_evolve

DEFAULT_DIM = 256
#: population allowed in the top 20% of the basis
POPULATION_LIMIT = 1e-12


def ladder(dim: int) -> np.ndarray:
    """Annihilation operator ``a`` truncated to ``dim`` levels."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)


def position_operator(dim: int, hbar: float) -> np.ndarray:
    a = ladder(dim)
    return math.sqrt(hbar / 2) * (a + a.T)


def momentum_operator(dim: int, hbar: float) -> np.ndarray:
    a = ladder(dim)
    return 1j * math.sqrt(hbar / 2) * (a.T - a)


@dataclass(frozen=True, eq=False)
class FockOracle:
    dim: int
    params: KhoParams
    q_op: np.ndarray
    p_op: np.ndarray
    rotation: np.ndarray  # diagonal of R(alpha)
    kick: np.ndarray

    @property
    def hbar(self) -> float:
        return self.params.hbar

    def step_matrix(self) -> np.ndarray:
        return self.rotation[:, None] * self.kick


def oracle_build(params: KhoParams, dim: int = DEFAULT_DIM, conjugate_kick: bool = False) -> FockOracle:
    if dim < 4:
        raise ValueError(f"dim must be >= 4, got {dim}")
    hbar = params.hbar
    q_op = position_operator(dim, hbar)
    p_op = momentum_operator(dim, hbar)
    nodes, vecs = np.linalg.eigh(q_op)
    sign = 1.0 if conjugate_kick else -1.0
    phases = np.exp(sign * 1j * (params.K / hbar) * np.cos(nodes + params.phi))
    kick = (vecs * phases) @ vecs.T
    rotation = np.exp(1j * params.alpha * (np.arange(dim) + 1.0))
    return FockOracle(dim, params, q_op, p_op, rotation, kick)


def check_population(oracle: FockOracle, c: np.ndarray, where: str = "") -> None:
    cut = int(0.8 * oracle.dim)
    tail = float(np.sum(np.abs(c[cut:]) ** 2))
    if tail >= POPULATION_LIMIT:
        raise TruncationError(
            f"{where or 'oracle'}: population {tail:.3e} above level {cut} of {oracle.dim}"
        )


def oracle_evolve(oracle: FockOracle, c: np.ndarray, n: int) -> np.ndarray:
    """Apply the step matrix ``n`` times, guarding the truncation edge."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    c = np.asarray(c, dtype=complex)
    check_population(oracle, c, "oracle_evolve (input)")
    for k in range(1, n + 1):
        c = oracle.rotation * (oracle.kick @ c)
        check_population(oracle, c, f"oracle_evolve (step {k})")
    return c


def hermite_functions(q: np.ndarray, dim: int, hbar: float) -> np.ndarray:
    """Oscillator eigenfunctions ``phi_k(q)`` for k < dim, shape (len(q), dim).

    The three-term recurrence runs on rescaled values with a per-point log
    scale so that large |q| does not underflow ``exp(-q^2/(2 hbar))``.
    """
    x = np.asarray(q, dtype=float) / math.sqrt(hbar)
    out = np.empty((x.size, dim))
    log_scale = -0.5 * x * x - 0.25 * math.log(math.pi * hbar)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    out[:, 0] = np.exp(log_scale)
    for k in range(1, dim):
        nxt = math.sqrt(2.0 / k) * x * cur - math.sqrt((k - 1) / k) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e150
        if big.any():
            s = np.abs(cur[big])
            cur[big] /= s
            prev[big] /= s
            log_scale[big] += np.log(s)
        out[:, k] = cur * np.exp(log_scale)
    return out


def oracle_project(oracle: FockOracle, state: QuantumState) -> np.ndarray:
    """Number-basis coefficients ``<k|psi>`` by quadrature on the grid."""
    g = state.grid
    basis = hermite_functions(g.q, oracle.dim, oracle.hbar)
    return basis.T @ state.amplitudes * g.dq


def oracle_to_grid(oracle: FockOracle, c: np.ndarray, grid: GridSpec) -> QuantumState:
    basis = hermite_functions(grid.q, oracle.dim, oracle.hbar)
    return QuantumState(basis @ np.asarray(c, dtype=complex), grid)


def oracle_overlap(state: QuantumState, params: KhoParams, n: int,
                   dims=(DEFAULT_DIM, 512, 1024), conjugate_kick: bool = False) -> tuple[complex, int]:
    """Overlap ``<grid result | oracle result>`` after ``n`` steps from ``state``.

    Runs the grid propagator and the oracle from the same initial state,
    trying each truncation in ``dims`` until the population guard passes.
    Returns the complex overlap and the dimension used; a value of 1
    means agreement including the global phase.
    """
    final = kho_evolve(state, params, n, conjugate_kick)[-1]
    last = None
    for dim in dims:
        try:
            oracle = oracle_build(params, dim, conjugate_kick)
            c = oracle_evolve(oracle, oracle_project(oracle, state), n)
        except TruncationError as exc:
            last = exc
            continue
        return complex(np.vdot(oracle_project(oracle, final), c)), dim
    raise last
