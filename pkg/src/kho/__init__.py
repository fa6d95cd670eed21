"""Simulator of the quantum kicked harmonic oscillator and its classical map."""
from ._version import __version__
from .classical import (Histogram2D, PhasePoint, Polyline, WebCloud, classical_step,
                        classical_step_inverse, default_seeds, distance_to_polyline,
                        evolve_manifold, initial_manifold, iterate, jacobian,
                        liouville_histogram, segment, stroboscopic_web)
from .core import (GaussianSpec, GridSpec, KhoParams, Moments, QuantumState, default_grid,
                   enlarge, expectations, fidelity, inner_product, make_grid, prepare_gaussian)
from .decoherence import (PurityCurve, QubitState, dephase_qubit, fidelity_amplitude,
                          fidelity_curve, purity_curve, purity_sweep, simulate_tomography)
from .errors import (GridMismatchError, GridOverflowError, KhoError, PointBudgetExceeded,
                     TruncationError)
from .optics import (LossModel, OpticalDesign, compose_abcd, hbar_eff_from_optics,
                     kick_frequency_for, lens_spacing, loss_budget, max_kicks)
from .oracle import FockOracle, oracle_build, oracle_evolve, oracle_project, oracle_to_grid
from .propagators import apply_kick, apply_rotation, kho_evolve, kho_step, sho_evolve
from .wigner import (LinearPhaseSpaceMap, WignerGrid, apply_linear_map, fringe_scale,
                     negativity_volume, wigner_transform)
