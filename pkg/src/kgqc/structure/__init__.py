"""Structure computing: structure matrices, cost tables, and the solver."""

from kgqc.structure.matrix import (
    CostTables,
    StructureMatrix,
    ValidityReport,
    build_cost_tables,
    cost_score,
    dump_structure,
    is_valid,
    mean_vector,
)
from kgqc.structure.solver import (
    brute_force_solve,
    brute_force_tables,
    ideal_matrix,
    solve,
    solve_tables,
)

__all__ = [
    "StructureMatrix",
    "CostTables",
    "ValidityReport",
    "is_valid",
    "cost_score",
    "mean_vector",
    "build_cost_tables",
    "dump_structure",
    "ideal_matrix",
    "solve",
    "solve_tables",
    "brute_force_solve",
    "brute_force_tables",
]
