"""
Floquet map of the kicked harmonic oscillator on grid states.

One step is ``U = R(alpha) V(K)``: the kick acts first, then the harmonic
rotation

    R(alpha) = exp(i alpha/2) exp(i alpha (Q^2 + P^2) / (2 hbar)).

With this sign the Heisenberg flow is dQ/dalpha = -P, dP/dalpha = Q, so the
mean (Q, P) of a state turns counterclockwise by alpha. ``R(2 pi)`` is the
identity including its phase.

The rotation is applied through the exact three-shear factorization

    exp(i alpha H / hbar) = exp(i a Q^2/hbar) exp(i b P^2/hbar) exp(i a Q^2/hbar)

with ``a = tan(alpha/2)/2`` and ``b = sin(alpha)/2``. Position chirps are
pointwise, the momentum chirp is diagonal after an FFT. Angles are reduced
to (-pi, pi] and split into sub-steps of at most pi/2, which keeps every
intermediate state within sqrt(2) of its final phase-space radius.
"""
from __future__ import annotations

import math

import numpy as np

from .core import KhoParams, QuantumState, check_boundary
from .errors import GridMismatchError

_EXACT_TOL = 1e-13


def _reduce_angle(alpha: float) -> float:
    """Representative of ``alpha`` modulo 2*pi in (-pi, pi]."""
    r = math.remainder(alpha, 2.0 * math.pi)
    if r <= -math.pi:
        r += 2.0 * math.pi
    return r


def kick_phase(q: np.ndarray, K: float, phi: float, hbar: float, conjugate: bool = False) -> np.ndarray:
    sign = 1.0 if conjugate else -1.0
    return np.exp(sign * 1j * (K / hbar) * np.cos(q + phi))


def apply_kick(state: QuantumState, K: float, phi: float = 0.0, conjugate: bool = False) -> QuantumState:
    """Multiply by ``exp(-i K cos(Q + phi) / hbar)``.

    ``conjugate=True`` flips the sign of the imprinted phase.
    """
    if K == 0:
        return state
    g = state.grid
    return state.with_amplitudes(state.amplitudes * kick_phase(g.q, K, phi, g.hbar, conjugate))


def _shear_rotation(psi: np.ndarray, q: np.ndarray, p: np.ndarray, hbar: float, alpha: float) -> np.ndarray:
    a = 0.5 * math.tan(0.5 * alpha)
    b = 0.5 * math.sin(alpha)
    chirp_q = np.exp(1j * a * q * q / hbar)
    chirp_p = np.exp(1j * b * p * p / hbar)
    psi = psi * chirp_q
    psi = np.fft.ifft(np.fft.fft(psi) * chirp_p)
    return psi * chirp_q


def _parity(psi: np.ndarray) -> np.ndarray:
    # q_j -> -q_j maps node j to n - j; node 0 (q_min) is its own image
    return np.roll(psi[::-1], 1)


def apply_rotation(state: QuantumState, alpha: float, check: bool = True) -> QuantumState:
    """Harmonic evolution ``R(alpha)`` with its global phase.

    Raises
    ------
    GridOverflowError
        If the rotated state reaches the grid edges (``check=True``).
    """
    g = state.grid
    r = _reduce_angle(float(alpha))
    psi = state.amplitudes
    if abs(r) < _EXACT_TOL:
        out = psi.copy()
    elif abs(abs(r) - math.pi) < _EXACT_TOL:
        # R(pi) = exp(i pi (n + 1)) = -parity
        out = -_parity(psi)
    else:
        m = max(1, math.ceil(abs(r) / (0.5 * math.pi) - 1e-12))
        sub = r / m
        q, p = g.q, g.p
        out = psi
        for _ in range(m):
            out = _shear_rotation(out, q, p, g.hbar, sub)
        out = out * np.exp(0.5j * r)
    result = state.with_amplitudes(out)
    if check:
        check_boundary(result, where="apply_rotation")
    return result


def _check_hbar(state: QuantumState, params: KhoParams) -> None:
    if not math.isclose(state.hbar, params.hbar, rel_tol=1e-12):
        raise GridMismatchError(
            f"state hbar {state.hbar} differs from parameter hbar {params.hbar}"
        )


def kho_step(state: QuantumState, params: KhoParams, conjugate_kick: bool = False,
             step: int | None = None) -> QuantumState:
    """One Floquet step: kick, then rotate."""
    _check_hbar(state, params)
    kicked = apply_kick(state, params.K, params.phi, conjugate_kick)
    out = apply_rotation(kicked, params.alpha, check=False)
    check_boundary(out, where="kho_step", step=step)
    return out


def kho_evolve(state: QuantumState, params: KhoParams, n: int,
               conjugate_kick: bool = False) -> list[QuantumState]:
    """Snapshots ``U^k |psi>`` for k = 0..n.

    A :class:`GridOverflowError` carries the 1-based step that failed.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    _check_hbar(state, params)
    snapshots = [state]
    for k in range(1, n + 1):
        snapshots.append(kho_step(snapshots[-1], params, conjugate_kick, step=k))
    return snapshots


def sho_evolve(state: QuantumState, alpha: float, n: int) -> QuantumState:
    """``n`` successive rotations by ``alpha`` (the kick-free map)."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    for _ in range(n):
        state = apply_rotation(state, alpha)
    return state
