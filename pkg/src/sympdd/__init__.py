"""Symplectic-picture simulation of dynamical decoupling, homogenization and
decoherence suppression for quadratic bosonic systems."""

from .averaging import (PartitionedModel, homogenization_system_group, pi0_map,
                        pi_map, tentative_condition_defect, tilde_pi)
from .error_analysis import (ErrorEstimate, GeneratorPair, SizeLimitError,
                             analytic_approximation, build_generators,
                             exact_expected_error, gate_error,
                             monte_carlo_expected_error, upper_bound)
from .eulerian import (CayleyGraph, EulerianCycle, GenerationError,
                       SplitGenerator, StructureError, build_cayley_graph,
                       eulerian_evolution, export_pulse_schedule,
                       find_eulerian_cycle, first_order_generator,
                       rotation_rate, split_generator, toggled_integral)
from .fock import (TruncatedMode, build_quadratures, heisenberg_check,
                   vitali_model)
from .groups import (EnumerationTooLargeError, GroupElement,
                     HomogenizationGroup, SignedPermutation, SuppressionGroup,
                     TrivialGroup, UnitaryDecouplingElement,
                     element_matrix, enumerate_homogenization_group,
                     enumerate_unitary_decoupling_set, sample_group_element,
                     suppression_group, verify_closure)
from .schemes import (TrajectoryConfig, deterministic_cycle, random_trajectory,
                      target_evolution, trial_seed_sequence)
from .symplectic import (BasisMismatchError, DimensionError, QuadraticModel,
                         SymplecticMatrix, basis_conversion,
                         basis_permutation_matrix, convert_matrix, evolve,
                         expm_real, hs_norm_sq, max_abs, op_norm,
                         symplectic_defect, symplectic_form,
                         symplectic_tolerance)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
