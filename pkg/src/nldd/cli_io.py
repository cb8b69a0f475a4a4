"""Configuration-driven experiment runner, file formats, and the CLI.

Commands:
  run <config>     full pipeline with self-checks, writes requested artifacts
  check <config>   pipeline up to the decomposition coverage check
  export <config>  full pipeline, writes artifacts, no equivalence gating

Exit codes: 0 success, 2 configuration error, 3 decomposition/coverage
error, 4 solver failure, 1 any other failure (including failed
self-checks).  The environment variable NLDD_WORKERS sets the assembly
worker-thread count (default 1, fully deterministic either way).
"""
from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, field

import numpy as np
from scipy import io as spio
from scipy import sparse

from . import assembly_multi, assembly_single, constraints as constraints_mod, decomposition, dd_solver
from .errors import ConfigError, CoverageError, DecompositionError, SolverError
from .kernel import KernelFamily, KernelSpec, TruncationMode, constant_scale
from .mesh import Mesh, NodeClass, Region, build_frame_mesh, build_mesh, validate_mesh


# ---------------------------------------------------------------------------
# function vocabulary for f, g, reaction coefficients and region predicates

def parse_function_spec(text):
    """Closed vocabulary of scalar fields on the plane.

    constant k        -> k
    linear a b c      -> a*x + b*y + c
    sine k            -> k * sin(pi x) * sin(pi y)
    """
    tokens = text.split()
    if not tokens:
        raise ConfigError("empty function spec")
    kind, args = tokens[0].lower(), tokens[1:]
    try:
        vals = [float(a) for a in args]
    except ValueError:
        raise ConfigError(f"non-numeric parameter in function spec {text!r}")
    if kind == "constant" and len(vals) == 1:
        k = vals[0]
        return lambda pts: np.full(len(pts), k)
    if kind == "linear" and len(vals) == 3:
        a, b, c = vals
        return lambda pts: a * pts[:, 0] + b * pts[:, 1] + c
    if kind == "sine" and len(vals) == 1:
        k = vals[0]
        return lambda pts: k * np.sin(np.pi * pts[:, 0]) * np.sin(np.pi * pts[:, 1])
    raise ConfigError(f"unknown function spec {text!r}")


def parse_region_spec(text):
    """Region predicates: 'box x0 y0 x1 y1' or 'halfplane a b c' (a*x+b*y >= c)."""
    tokens = text.split()
    kind, args = tokens[0].lower(), tokens[1:]
    try:
        vals = [float(a) for a in args]
    except ValueError:
        raise ConfigError(f"non-numeric parameter in region spec {text!r}")
    if kind == "box" and len(vals) == 4:
        x0, y0, x1, y1 = vals
        return lambda pts: ((pts[:, 0] >= x0) & (pts[:, 0] <= x1)
                            & (pts[:, 1] >= y0) & (pts[:, 1] <= y1))
    if kind == "halfplane" and len(vals) == 3:
        a, b, c = vals
        return lambda pts: a * pts[:, 0] + b * pts[:, 1] >= c
    raise ConfigError(f"unknown region spec {text!r}")


def folded_source(f_base, f_neumann, region):
    """Compose the effective source: flux data enters with flipped sign on
    the marked strip, plain source elsewhere."""
    def f(pts):
        base = np.broadcast_to(np.asarray(f_base(pts), dtype=float), (len(pts),))
        flux = np.broadcast_to(np.asarray(f_neumann(pts), dtype=float), (len(pts),))
        return np.where(region(pts), -flux, base)
    return f


# ---------------------------------------------------------------------------
# run configuration

_ARTIFACTS = ("mesh", "matrices", "vectors", "solution", "report", "partition", "decomposition")


@dataclass
class RunConfig:
    side_length: float
    h: float
    mesh_file: str | None
    family: KernelFamily
    delta: float
    s: float | None
    scale: float
    truncation_mode: TruncationMode
    f_spec: str
    g_spec: str
    f_neumann_spec: str | None
    neumann_region_spec: str | None
    reaction_spec: str | None
    bx: int
    by: int
    partition_file: str | None
    constraints_mode: constraints_mod.ConstraintMode
    solver_method: str
    tolerance: float
    quad_order: int
    out_dir: str
    artifacts: tuple = field(default_factory=tuple)

    def source(self):
        f = parse_function_spec(self.f_spec)
        if self.f_neumann_spec is None:
            return f
        if self.neumann_region_spec is None:
            raise ConfigError("f_neumann requires a neumann_region spec")
        return folded_source(f, parse_function_spec(self.f_neumann_spec),
                             parse_region_spec(self.neumann_region_spec))

    def dirichlet(self):
        return parse_function_spec(self.g_spec)

    def reaction(self):
        return None if self.reaction_spec is None else parse_function_spec(self.reaction_spec)

    def kernel_spec(self):
        return KernelSpec(family=self.family, delta=self.delta, s=self.s,
                          scale=self.scale, truncation_mode=self.truncation_mode)


def load_config(path):
    if not os.path.exists(path):
        raise ConfigError(f"config file {path!r} does not exist")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path!r}: {exc}")

    def get(section, key, cast=str, default=None, required=False):
        if not cp.has_option(section, key):
            if required:
                raise ConfigError(f"missing [{section}] {key}")
            return default
        raw = cp.get(section, key).strip()
        try:
            return cast(raw)
        except ValueError:
            raise ConfigError(f"invalid value for [{section}] {key}: {raw!r}")

    try:
        family = KernelFamily(get("kernel", "family", str, "constant").lower())
    except ValueError:
        raise ConfigError(f"unknown kernel family {cp.get('kernel', 'family')!r}")
    try:
        trunc = TruncationMode(get("kernel", "truncation_mode", str, "barycenter_pair").lower())
    except ValueError:
        raise ConfigError(f"unknown truncation mode {cp.get('kernel', 'truncation_mode')!r}")
    try:
        cmode = constraints_mod.ConstraintMode(get("constraints", "mode", str, "nonredundant").lower())
    except ValueError:
        raise ConfigError(f"unknown constraint mode {cp.get('constraints', 'mode')!r}")

    delta = get("kernel", "delta", float, required=True)
    scale_raw = get("kernel", "scale", str, "1.0")
    scale = constant_scale(delta) if scale_raw == "auto" else float(scale_raw)

    cfg = RunConfig(
        side_length=get("mesh", "side_length", float, 1.0),
        h=get("mesh", "h", float, required=True),
        mesh_file=get("mesh", "file", str, None),
        family=family,
        delta=delta,
        s=get("kernel", "s", float, None),
        scale=scale,
        truncation_mode=trunc,
        f_spec=get("load", "f", str, "constant 0.0"),
        g_spec=get("load", "g", str, "constant 0.0"),
        f_neumann_spec=get("load", "f_neumann", str, None),
        neumann_region_spec=get("load", "neumann_region", str, None),
        reaction_spec=get("load", "reaction", str, None),
        bx=get("decomposition", "bx", int, 1),
        by=get("decomposition", "by", int, 1),
        partition_file=get("decomposition", "partition_file", str, None),
        constraints_mode=cmode,
        solver_method=get("solver", "method", str, "direct"),
        tolerance=get("solver", "tolerance", float, 1e-10),
        quad_order=get("assembly", "quad_order", int, 4),
        out_dir=get("outputs", "directory", str, "out"),
        artifacts=tuple(
            a.strip() for a in get("outputs", "artifacts", str, "").split(",") if a.strip()
        ),
    )
    if cfg.h <= 0 or cfg.delta <= 0 or cfg.side_length <= 0:
        raise ConfigError("side_length, h, and delta must be positive")
    if cfg.bx < 1 or cfg.by < 1:
        raise ConfigError("block counts must be >= 1")
    if cfg.quad_order < 1:
        raise ConfigError("quad_order must be >= 1")
    for a in cfg.artifacts:
        if a not in _ARTIFACTS:
            raise ConfigError(f"unknown artifact {a!r}; valid: {', '.join(_ARTIFACTS)}")
    for path_key in (cfg.mesh_file, cfg.partition_file):
        if path_key is not None and not os.path.exists(path_key):
            raise ConfigError(f"referenced file {path_key!r} does not exist")
    # validates family/s/scale combinations early
    cfg.kernel_spec()
    parse_function_spec(cfg.f_spec)
    parse_function_spec(cfg.g_spec)
    return cfg


# ---------------------------------------------------------------------------
# plain-text mesh and CSV formats

_CLASS_NAMES = {NodeClass.OMEGA_UNKNOWN: "OMEGA_UNKNOWN", NodeClass.GAMMA_DIRICHLET: "GAMMA_DIRICHLET"}
_REGION_NAMES = {Region.OMEGA: "OMEGA", Region.GAMMA: "GAMMA"}


def write_mesh_file(mesh, path):
    lines = [f"NODES {mesh.n_nodes}"]
    for i in range(mesh.n_nodes):
        x, y = mesh.vertices[i]
        lines.append(f"{i} {x!r} {y!r} {_CLASS_NAMES[NodeClass(mesh.node_class[i])]}")
    lines.append(f"ELEMENTS {mesh.n_elements}")
    for e in range(mesh.n_elements):
        v1, v2, v3 = mesh.elements[e]
        lines.append(f"{e} {v1} {v2} {v3} {_REGION_NAMES[Region(mesh.element_region[e])]}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh_file(path, h):
    """Load a mesh in the plain-text format; the grid size is not stored in
    the file and must be supplied.  Numbering and classification invariants
    are validated."""
    with open(path) as fh:
        tokens = fh.read().split("\n")
    try:
        if not tokens[0].startswith("NODES"):
            raise ValueError("expected NODES header")
        n = int(tokens[0].split()[1])
        verts = np.empty((n, 2))
        classes = np.empty(n, dtype=np.int8)
        cls_map = {v: k for k, v in _CLASS_NAMES.items()}
        reg_map = {v: k for k, v in _REGION_NAMES.items()}
        for i in range(n):
            idx, x, y, cls = tokens[1 + i].split()
            if int(idx) != i:
                raise ValueError(f"node ids must be consecutive, got {idx} at line {i + 2}")
            verts[i] = (float(x), float(y))
            classes[i] = cls_map[cls]
        if not tokens[1 + n].startswith("ELEMENTS"):
            raise ValueError("expected ELEMENTS header")
        m = int(tokens[1 + n].split()[1])
        elems = np.empty((m, 3), dtype=np.int64)
        regions = np.empty(m, dtype=np.int8)
        for e in range(m):
            idx, v1, v2, v3, reg = tokens[2 + n + e].split()
            if int(idx) != e:
                raise ValueError(f"element ids must be consecutive, got {idx}")
            elems[e] = (int(v1), int(v2), int(v3))
            regions[e] = reg_map[reg]
    except (IndexError, KeyError, ValueError) as exc:
        raise ValueError(f"malformed mesh file {path!r}: {exc}")

    mesh = build_mesh(verts, elems, regions, h)
    if not np.array_equal(mesh.vertices, verts) or not np.array_equal(mesh.node_class, classes):
        raise ValueError(
            f"mesh file {path!r} violates the numbering/classification contract "
            "(unknown nodes must come first and classes must match element incidence)"
        )
    validate_mesh(mesh)
    return mesh


def write_matrix(path, mat):
    spio.mmwrite(str(path), sparse.csr_matrix(mat), precision=17, symmetry="general")


def read_matrix(path):
    return sparse.csr_matrix(spio.mmread(str(path)))


def write_vector_csv(path, vec):
    lines = ["index,value"] + [f"{i},{v!r}" for i, v in enumerate(np.asarray(vec))]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_vector_csv(path):
    with open(path) as fh:
        rows = fh.read().strip().split("\n")[1:]
    return np.array([float(r.split(",")[1]) for r in rows])


def write_partition_csv(path, partition):
    lines = ["element,owner"] + [f"{e},{o}" for e, o in enumerate(partition.owner)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_partition_csv(path, mesh):
    with open(path) as fh:
        rows = fh.read().strip().split("\n")[1:]
    owner = np.full(mesh.n_elements, -1, dtype=np.int64)
    for r in rows:
        e, o = r.split(",")
        owner[int(e)] = int(o)
    omega = mesh.omega_elements
    if np.any(owner[omega] < 0):
        raise DecompositionError("partition file leaves interior elements unowned")
    if np.any(owner[mesh.gamma_elements] >= 0):
        raise DecompositionError("partition file assigns frame elements to subdomains")
    ns = int(owner.max()) + 1
    counts = np.bincount(owner[omega], minlength=ns)
    if np.any(counts == 0):
        raise DecompositionError(f"partition blocks {np.where(counts == 0)[0].tolist()} own no elements")
    return decomposition.Partition(n_subdomains=ns, owner=owner)


def write_solution_csv(path, mesh, u_single, u_dd):
    lines = ["node,x,y,u_single,u_dd,abs_diff"]
    for i in range(len(u_single)):
        x, y = mesh.vertices[i]
        d = abs(u_single[i] - u_dd[i])
        lines.append(f"{i},{x!r},{y!r},{u_single[i]!r},{u_dd[i]!r},{d!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_report(path, report):
    with open(path, "w") as fh:
        for key, value in report.items():
            fh.write(f"{key}: {value}\n")


def write_decomposition_report(path, geoms, index, atoms):
    lines = [f"subdomains: {len(geoms)}"]
    for g in geoms:
        lines.append(
            f"subdomain {g.n}: omega {len(g.omega_elems)} hat {len(g.hat_elems)} "
            f"collar {len(g.gamma_elems)} nodes {len(index.nodes[g.n])} "
            f"unknowns {index.n_unknowns[g.n]} floating {g.floating}"
        )
    lines.append(f"constraint_rows_nonredundant: {sum(m - 1 for m in index.m if m >= 2)}")
    lines.append(f"atoms: {len(atoms.signatures)}")
    for i, sig in enumerate(atoms.signatures):
        lines.append(f"atom {i}: signature {list(sig)} elements {len(atoms.elements[i])}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# pipeline

@dataclass
class PipelineState:
    config: RunConfig
    mesh: Mesh = None
    spec: KernelSpec = None
    load: assembly_single.LoadData = None
    single: assembly_single.SingleDomainSystem = None
    b_single: np.ndarray = None
    u_single: np.ndarray = None
    partition: decomposition.Partition = None
    geoms: list = None
    index: decomposition.DecompIndex = None
    tables: decomposition.ZetaTables = None
    coverage: decomposition.CoverageReport = None
    atoms: decomposition.OverlapAtoms = None
    systems: list = None
    scatter: assembly_multi.ScatterReport = None
    constraints: constraints_mod.ConstraintMatrix = None
    constraint_check: constraints_mod.ConstraintCheck = None
    solution: dd_solver.DDSolution = None
    u_dd: np.ndarray = None
    report: dd_solver.EquivalenceReport = None
    energy_single: float = None
    energy_dd: float = None


def _build_stage(state, workers):
    cfg = state.config
    if cfg.mesh_file:
        state.mesh = read_mesh_file(cfg.mesh_file, cfg.h)
    else:
        state.mesh = build_frame_mesh(cfg.side_length, cfg.h, cfg.delta)
    validate_mesh(state.mesh, delta=cfg.delta)
    state.spec = cfg.kernel_spec()
    state.load = assembly_single.make_load(state.mesh, cfg.source(), cfg.dirichlet())


def _decompose_stage(state):
    cfg = state.config
    if cfg.partition_file:
        state.partition = read_partition_csv(cfg.partition_file, state.mesh)
    else:
        state.partition = decomposition.partition_blocks(state.mesh, cfg.bx, cfg.by)
    state.geoms = decomposition.build_subdomain_regions(state.mesh, state.partition, cfg.delta)
    state.index = decomposition.build_index_maps(state.mesh, state.geoms)
    state.tables = decomposition.compute_zeta(state.geoms, state.mesh)
    state.atoms = decomposition.overlap_atoms(state.geoms, state.mesh)
    state.coverage = decomposition.verify_coverage(state.mesh, state.spec, state.tables)
    if not state.coverage.ok:
        sample = state.coverage.offending[:5].tolist()
        raise CoverageError(
            f"{len(state.coverage.offending)} interacting element pairs are covered by no "
            f"subdomain (e.g. {sample}); interface strips too narrow for this kernel"
        )


def run_pipeline(config, workers=1, through_coverage_only=False):
    """Execute the pipeline; returns the populated state."""
    state = PipelineState(config=config)
    _build_stage(state, workers)
    cfg = config
    if through_coverage_only:
        _decompose_stage(state)
        return state

    reaction = cfg.reaction()
    state.single = assembly_single.assemble_full(
        state.mesh, state.spec, cfg.quad_order, reaction=reaction, workers=workers
    )
    state.b_single = assembly_single.build_rhs(state.mesh, state.single, state.load, cfg.quad_order)
    state.load.b_single = state.b_single
    state.u_single = assembly_single.solve_single(
        state.single.A, state.b_single, tol=cfg.tolerance, method=cfg.solver_method
    )

    _decompose_stage(state)
    state.systems = assembly_multi.assemble_all_subdomains(
        state.mesh, state.spec, state.geoms, state.index, state.tables, state.load,
        state.coverage, quad_order=cfg.quad_order, reaction=reaction, workers=workers,
    )
    state.scatter = assembly_multi.scatter_sum_check(
        state.systems, state.index, state.single, state.b_single
    )

    if cfg.constraints_mode is constraints_mod.ConstraintMode.REDUNDANT:
        redundant = constraints_mod.build_constraints(state.index, constraints_mod.ConstraintMode.REDUNDANT)
        check_red = constraints_mod.verify_constraint_matrix(redundant, state.index)
        if not check_red.ok:
            raise DecompositionError("redundant constraint verification failed: "
                                     + "; ".join(check_red.issues))
    state.constraints = constraints_mod.build_constraints(
        state.index, constraints_mod.ConstraintMode.NONREDUNDANT
    )
    state.constraint_check = constraints_mod.verify_constraint_matrix(state.constraints, state.index)
    if not state.constraint_check.ok:
        raise DecompositionError("constraint verification failed: "
                                 + "; ".join(state.constraint_check.issues))

    kkt = dd_solver.assemble_kkt(state.systems, state.constraints)
    state.solution = dd_solver.solve_dd(kkt, tol=cfg.tolerance)
    state.u_dd, disagreement = dd_solver.reconstruct_global(
        state.solution.u_list, state.index, n_unknowns=state.mesh.n_unknowns
    )
    state.report = dd_solver.equivalence_report(
        state.u_dd, state.u_single, state.constraints, state.solution.u_list,
        max_disagreement=disagreement, solver_residual=state.solution.residual,
    )
    state.energy_single = assembly_single.energy_single(
        state.mesh, state.single, state.load, state.u_single, cfg.quad_order
    )
    state.energy_dd = assembly_multi.energy_sum(state.systems, state.solution.u_list)
    return state


def _report_dict(state):
    rep = {
        "mesh_nodes": state.mesh.n_nodes,
        "mesh_elements": state.mesh.n_elements,
        "mesh_unknowns": state.mesh.n_unknowns,
        "subdomains": len(state.geoms) if state.geoms else 0,
        "coverage_ok": state.coverage.ok,
        "coverage_pairs_checked": state.coverage.pairs_checked,
        "coverage_min_zeta": state.coverage.min_zeta,
    }
    if state.geoms:
        rep["floating_subdomains"] = sum(1 for g in state.geoms if g.floating)
    if state.scatter:
        rep["scatter_matrix_residual"] = repr(state.scatter.matrix_residual)
        rep["scatter_load_residual"] = repr(state.scatter.load_residual)
    if state.constraints:
        rep["constraint_rows"] = state.constraints.m_rows
        rep["constraint_rank"] = state.constraint_check.rank
    if state.report:
        rep["rel_inf_error"] = repr(state.report.rel_inf_error)
        rep["rel_l2_error"] = repr(state.report.rel_l2_error)
        rep["max_constraint_violation"] = repr(state.report.max_constraint_violation)
        rep["max_disagreement"] = repr(state.report.max_disagreement)
        rep["kkt_residual"] = repr(state.report.solver_residual)
        rep["energy_single"] = repr(state.energy_single)
        rep["energy_dd_sum"] = repr(state.energy_dd)
        rep["energy_gap"] = repr(abs(state.energy_single - state.energy_dd))
    return rep


def export_artifacts(state, selection, directory):
    """Write the requested artifact files; returns the list of paths."""
    written = []
    if not selection:
        return written
    os.makedirs(directory, exist_ok=True)

    def out(name):
        p = os.path.join(directory, name)
        written.append(p)
        return p

    if "mesh" in selection:
        write_mesh_file(state.mesh, out("mesh.txt"))
    if "partition" in selection and state.partition is not None:
        write_partition_csv(out("partition.csv"), state.partition)
    if "decomposition" in selection and state.geoms is not None:
        write_decomposition_report(out("decomposition.txt"), state.geoms, state.index, state.atoms)
    if "matrices" in selection and state.single is not None:
        write_matrix(out("A_single.mtx"), state.single.A)
        write_matrix(out("G_coupling.mtx"), state.single.G)
        for sys_n in state.systems or []:
            write_matrix(out(f"A_sub{sys_n.n:03d}.mtx"), sys_n.A)
        if state.constraints is not None and state.constraints.m_rows:
            write_matrix(out("M_constraints.mtx"), sparse.hstack(state.constraints.blocks))
    if "vectors" in selection and state.b_single is not None:
        write_vector_csv(out("b_single.csv"), state.b_single)
        for sys_n in state.systems or []:
            write_vector_csv(out(f"b_sub{sys_n.n:03d}.csv"), sys_n.b)
            write_vector_csv(out(f"g_sub{sys_n.n:03d}.csv"), sys_n.g)
    if "solution" in selection and state.u_dd is not None:
        write_solution_csv(out("solution.csv"), state.mesh, state.u_single, state.u_dd)
    if "report" in selection:
        write_report(out("report.txt"), _report_dict(state))
    return written


_GATES = {
    "scatter_matrix_residual": 1e-10,
    "scatter_load_residual": 1e-10,
    "rel_inf_error": 1e-6,
    "max_constraint_violation": 1e-8,
}


def _check_gates(state):
    failures = []
    if state.scatter.matrix_residual > _GATES["scatter_matrix_residual"]:
        failures.append(f"scatter matrix residual {state.scatter.matrix_residual:.3e}")
    if state.scatter.load_residual > _GATES["scatter_load_residual"]:
        failures.append(f"scatter load residual {state.scatter.load_residual:.3e}")
    if state.report.rel_inf_error > _GATES["rel_inf_error"]:
        failures.append(f"solution mismatch {state.report.rel_inf_error:.3e}")
    if state.report.max_constraint_violation > _GATES["max_constraint_violation"]:
        failures.append(f"constraint violation {state.report.max_constraint_violation:.3e}")
    return failures


def run(config, workers=1, gate=True):
    """Full pipeline + artifacts; returns (exit_status, state)."""
    state = run_pipeline(config, workers=workers)
    export_artifacts(state, config.artifacts, config.out_dir)
    if gate:
        failures = _check_gates(state)
        if failures:
            print("self-checks FAILED: " + "; ".join(failures), file=sys.stderr)
            return 1, state
    return 0, state


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="nldd",
        description="Nonlocal diffusion solver with an exactly equivalent subdomain decomposition",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("run", "full pipeline with self-checks and artifact export"),
        ("check", "pipeline through the decomposition coverage check only"),
        ("export", "full pipeline and artifact export without gating"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("config", help="path to the run configuration file")
    args = parser.parse_args(argv)

    try:
        workers = max(1, int(os.environ.get("NLDD_WORKERS", "1")))
    except ValueError:
        workers = 1

    try:
        config = load_config(args.config)
        if args.command == "check":
            state = run_pipeline(config, workers=workers, through_coverage_only=True)
            print(f"coverage_ok: {state.coverage.ok}")
            print(f"pairs_checked: {state.coverage.pairs_checked}")
            print(f"min_zeta: {state.coverage.min_zeta}")
            return 0
        status, state = run(config, workers=workers, gate=(args.command == "run"))
        for key, value in _report_dict(state).items():
            print(f"{key}: {value}")
        return status
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (DecompositionError, CoverageError) as exc:
        print(f"decomposition error: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
