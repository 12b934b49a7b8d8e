"""Robust connectivity maintenance for single-integrator multi-agent systems."""
from .controllers import (ControllerParams, DomainParams, PowerShape, compute_K, connectivity_feedback,
                          delta_bound, design, invariance_feedback, max_R_tilde, repulsive_field,
                          validate_params)
from .graph import (AgentNetwork, from_edges, incidence_matrix, laplacian, spectral_summary, stacked_ops,
                    weighted_laplacian)
from .potentials import LinearPotential, PiecewiseNLPotential, TablePotential, energy_gradient, total_energy
from .simulator import DisturbanceSpec, SimConfig, SimTrace, run, step

__version__ = "0.1.0"
