"""Reference parameter sets and the initial-state defaults used with them."""
from __future__ import annotations

import math

from .core import GaussianSpec, KhoParams

PI = math.pi

#: single-kick Wigner pictures, alpha = pi/3
SINGLE_KICK = {
    "strong_large_hbar": KhoParams(K=7.4, alpha=PI / 3, phi=1.45 * PI, hbar=4.72),
    "strong_small_hbar": KhoParams(K=7.4, alpha=PI / 3, phi=1.4 * PI, hbar=0.9),
    "weak": KhoParams(K=2.0, alpha=PI / 3, phi=0.0, hbar=0.9),
}

#: three-kick sequences, alpha = 2 pi/3
THREE_KICK = {
    "regular": KhoParams(K=0.75, alpha=2 * PI / 3, phi=0.44 * PI, hbar=0.42),
    "weak_chaos": KhoParams(K=2.0, alpha=2 * PI / 3, phi=1.33 * PI, hbar=0.9),
}

#: purity sweep grid
PURITY_ALPHA = 2 * PI / 3
PURITY_K = (0.5, 2.0)
PURITY_HBAR = (1.5, 1.0, 0.5, 0.1, 0.05)
# the purity runs start from the state of the regular three-kick sequence
PURITY_PHI = 0.44 * PI

#: squeeze of the initial state in the phase-space pictures
PICTURE_SQUEEZE = 2.0


def picture_state() -> GaussianSpec:
    return GaussianSpec(0.0, 0.0, PICTURE_SQUEEZE, 0.0)


def all_published() -> dict[str, KhoParams]:
    return {**SINGLE_KICK, **THREE_KICK}
