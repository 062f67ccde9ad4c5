"""Hierarchical equations of motion: oscillator moments and generic systems."""

from .generic import (
    GenericHEOM,
    GenericHEOMState,
    SystemSpec,
    build_generic_rhs,
    gibbs_state,
    rk4_propagate,
    steady_state,
    system_correlation,
    system_from_dict,
    system_to_dict,
)
from .index import HierarchyIndexSet, count_indices
from .moment import (
    MomentHEOMState,
    MomentIndexSet,
    build_moment_generator,
    correlation_mod,
    propagate_expm,
    second_moments,
    steady_moments,
    vacuum_state,
)
