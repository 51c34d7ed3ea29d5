"""Patterned-waveplate compilation and simulation of photonic quantum walks.

A tau-step discrete-time walk protocol is compiled into three transversely
patterned waveplate profiles whose Jones product realizes the full walk
operator at every transverse position; a wave-optics pipeline (Gaussian
beam, plate stack, far-field mode projection, synthetic camera) validates
the compiled optics against direct lattice evolution.
"""

from ._kernels import backend_name
from .analysis import (EntropyCurve, entropy_dynamics, entropy_input_sweep,
                       linear_inputs, projection_intensities,
                       reduced_density_matrix, similarity,
                       stokes_from_projections, von_neumann_entropy)
from .compiler import (BranchSelectionError, CompilationError, FeasibilityReport,
                       PlatePatternSet, branch_candidates, compile_patterns,
                       export_patterns, feasibility_check, import_patterns,
                       select_continuous_branch, solve_angles, split_stages,
                       verify_reconstruction)
from .lattice import (ProbabilityDistribution, SiteRangeError, WalkerState,
                      bloch_evolve, distribution, evolve, linear_polarization_input,
                      localized_input)
from .optics import (AliasingError, ApertureError, CameraImage, ModeAmplitudes,
                     OpticalField, apply_pattern_set, apply_plate,
                     extract_distribution, far_field, misalignment_study,
                     prepare_input, render_camera, write_pgm16)
from .protocols import (BlochGrid, DisorderSpec, ProtocolSpec, coin_W,
                        disorder_schedule, quasienergy_map, rotation_R,
                        step_operator, translation_T_bloch, walk_operator_bloch,
                        walk_operator_grid)
from .su2 import matrix_power, pauli_compose, pauli_decompose, waveplate

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
