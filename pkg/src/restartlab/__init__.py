"""restartlab: a CDCL/DPLL solver laboratory for restart-policy experiments.

Formula generators for structured CNF families (parity constraints on
expanders, satisfiable trapdoor ladders, unsatisfiable pitfall formulas
with small backdoors), a configurable search core covering thirteen solver
configurations, independent verification oracles, and an experiment
harness that reproduces the restart separations at desk scale.
"""

from .cnf import (
    Clause,
    CnfFormula,
    CnfInstance,
    Restriction,
    parse_dimacs,
    read_sidecar,
    restrict,
    write_dimacs,
    write_sidecar,
    xor_to_cnf,
)
from .engine import SolveReport, Solver, SolverConfig, solve
from .formulas import (
    LadderParams,
    PitfallParams,
    ladder,
    make_ladder,
    make_pitfall,
    make_tseitin,
    pitfall,
    random_kcnf,
    tseitin,
)
from .graphs import Graph, Labelling, edge_expansion, odd_labelling, random_regular_graph
from .harness import (
    ExperimentPlan,
    RunRecord,
    TABLE1_NAMES,
    emit_plot_data,
    run_experiment,
    table1_config,
)
from .verify import (
    audit_run,
    brute_force_sat,
    check_dpll_value_order_invariance,
    check_ladder_weak_backdoor,
    check_pitfall_conflict_pairs,
    check_static_restart_equivalence,
    check_strong_backdoor,
    model_count,
)

__version__ = "0.1.0"
