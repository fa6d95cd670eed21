"""
Design formulas linking the optical layout to the dimensionless map.

Ray matrices act on column vectors (x, theta). A fractional Fourier stage
of order alpha is free space z, a thin lens f, free space z with
``z = 2 f sin^2(alpha/2)``; in the scaled coordinates (x, f' theta),
``f' = f sin(alpha)``, its matrix is the rotation
``[[cos a, sin a], [-sin a, cos a]]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .wigner import LinearPhaseSpaceMap


@dataclass(frozen=True)
class OpticalDesign:
    wavelength: float  # m
    focal_length: float  # m
    alpha: float  # rad
    kick_frequency: float  # 1/m, spatial frequency nu of the kick grating

    def __post_init__(self):
        for name in ("wavelength", "focal_length", "kick_frequency"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 < self.alpha < math.pi:
            raise ValueError(f"alpha must lie in (0, pi) for one lens stage, got {self.alpha}")

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def effective_focal_length(self) -> float:
        return self.focal_length * math.sin(self.alpha)


def hbar_eff_from_optics(d: OpticalDesign) -> float:
    """``nu^2 f' / k`` = ``nu^2 f sin(alpha) lambda / (2 pi)``."""
    return d.kick_frequency**2 * d.effective_focal_length / d.wavenumber


def kick_frequency_for(hbar: float, wavelength: float, focal_length: float, alpha: float) -> float:
    """Grating frequency nu that yields ``hbar`` for the given lens stage."""
    if not hbar > 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    f_eff = focal_length * math.sin(alpha)
    if not f_eff > 0:
        raise ValueError("focal_length * sin(alpha) must be positive")
    return math.sqrt(hbar * 2 * math.pi / (wavelength * f_eff))


def lens_spacing(f: float, alpha: float) -> float:
    """Free-space distance ``2 f sin^2(alpha/2)`` on each side of the lens."""
    if not f > 0:
        raise ValueError(f"focal length must be positive, got {f}")
    return 2.0 * f * math.sin(0.5 * alpha) ** 2


@dataclass(frozen=True)
class LossModel:
    t_outside: float = 1.0
    t_lens: float = 1.0
    t_slm: float = 1.0
    intensity_in: float = 1.0

    def __post_init__(self):
        for name in ("t_outside", "t_lens", "t_slm"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")

    @property
    def per_pass(self) -> float:
        return self.t_lens * self.t_slm


def loss_budget(m: LossModel, n: int) -> float:
    """Output intensity after ``n`` kicks."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return m.intensity_in * m.t_outside * m.per_pass**n


def max_kicks(m: LossModel, floor_fraction: float) -> int | None:
    """Largest n with ``I_out / I_in >= floor_fraction``.

    Returns None for a lossless pass (no limit) and -1 when even n = 0 is
    below the floor.
    """
    if not 0 < floor_fraction < 1:
        raise ValueError(f"floor_fraction must lie in (0, 1), got {floor_fraction}")
    if m.t_outside < floor_fraction:
        return -1
    if m.per_pass == 1.0:
        return None
    n = math.floor(math.log(floor_fraction / m.t_outside) / math.log(m.per_pass))
    # guard the floor() against rounding at exact boundaries
    while m.t_outside * m.per_pass ** (n + 1) >= floor_fraction:
        n += 1
    while n >= 0 and m.t_outside * m.per_pass**n < floor_fraction:
        n -= 1
    return n


def free_space(z: float) -> np.ndarray:
    return np.array([[1.0, z], [0.0, 1.0]])


def thin_lens(f: float) -> np.ndarray:
    return np.array([[1.0, 0.0], [-1.0 / f, 1.0]])


def compose_abcd(stages) -> LinearPhaseSpaceMap:
    """Product of ray matrices in propagation order (first stage acts first)."""
    total = np.eye(2)
    for k, stage in enumerate(stages):
        m = np.asarray(stage, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"stage {k} is not 2x2")
        if abs(np.linalg.det(m)) < 1e-14:
            raise ValueError(f"stage {k} is singular")
        total = m @ total
    return LinearPhaseSpaceMap(total)


def frft_stage(f: float, alpha: float) -> list[np.ndarray]:
    z = lens_spacing(f, alpha)
    return [free_space(z), thin_lens(f), free_space(z)]


def double_frft_stage(f: float, alpha: float) -> list[np.ndarray]:
    """Two consecutive stages of order alpha/2 with the same lens."""
    return frft_stage(f, 0.5 * alpha) * 2


def scaled_rotation(alpha: float, scale: float) -> np.ndarray:
    """Rotation by alpha in (x, scale*theta), written in (x, theta)."""
    c, s = math.cos(alpha), math.sin(alpha)
    S = np.diag([1.0, scale])
    return np.linalg.inv(S) @ np.array([[c, s], [-s, c]]) @ S


def design_report(wavelength: float, focal_length: float, alpha: float,
                  hbar_target: float | None = None, kick_frequency: float | None = None) -> dict:
    """Derived layout numbers for one lens stage."""
    report = {
        "wavelength_m": wavelength,
        "focal_length_m": focal_length,
        "alpha_rad": alpha,
        "effective_focal_length_m": focal_length * math.sin(alpha),
        "lens_spacing_m": lens_spacing(focal_length, alpha),
        "half_order_lens_spacing_m": lens_spacing(focal_length, 0.5 * alpha),
    }
    if hbar_target is not None:
        nu = kick_frequency_for(hbar_target, wavelength, focal_length, alpha)
        report["hbar_target"] = hbar_target
        report["kick_frequency_per_m"] = nu
        report["kick_period_m"] = 2 * math.pi / nu
    if kick_frequency is not None:
        design = OpticalDesign(wavelength, focal_length, alpha, kick_frequency)
        report["kick_frequency_per_m"] = kick_frequency
        report["hbar_eff"] = hbar_eff_from_optics(design)
    return report
