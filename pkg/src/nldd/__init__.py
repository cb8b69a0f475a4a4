"""Volume-constrained nonlocal diffusion: finite element assembly, an
exactly equivalent multi-subdomain decomposition, and the coupled solver."""

from .assembly_multi import (
    ScatterReport,
    SubdomainSystem,
    assemble_all_subdomains,
    assemble_subdomain,
    energy_sum,
    scatter_sum_check,
)
from .assembly_single import (
    LoadData,
    SingleDomainSystem,
    assemble_full,
    build_rhs,
    energy_single,
    load_moments,
    make_load,
    pair_block,
    solve_single,
    symmetry_error,
)
from .constraints import (
    ConstraintMatrix,
    ConstraintMode,
    build_constraints,
    constraint_violation,
    expected_row_count,
    verify_constraint_matrix,
)
from .dd_solver import (
    DDSolution,
    EquivalenceReport,
    KKTSystem,
    assemble_kkt,
    equivalence_report,
    reconstruct_global,
    solve_dd,
)
from .decomposition import (
    CoverageReport,
    DecompIndex,
    OverlapAtoms,
    Partition,
    SubdomainGeometry,
    ZetaTables,
    build_index_maps,
    build_subdomain_regions,
    compute_zeta,
    overlap_atoms,
    partition_blocks,
    verify_coverage,
)
from .errors import ConfigError, CoverageError, DecompositionError, SolverError
from .kernel import (
    KernelFamily,
    KernelSpec,
    TruncationMode,
    constant_scale,
    eval_kernel,
    interacting_pairs,
    pair_interacts,
)
from .mesh import (
    Mesh,
    NodeClass,
    Region,
    build_frame_mesh,
    build_mesh,
    classify_nodes,
    node_elements,
    validate_mesh,
)

__version__ = "0.1.0"
