"""Random subjective expected utility: models, axioms, identification."""
from __future__ import annotations

from ._rat import rat, rat_str
from .core import (
    Act,
    Belief,
    ClassError,
    ConditioningError,
    Consequence,
    CoverageError,
    DataInconsistencyError,
    DegenerateConsumptionError,
    DomainError,
    DrseuError,
    InstanceError,
    InvariantError,
    Lottery,
    Menu,
    ModelMisfitError,
    ParseError,
    PreconditionError,
    PrizeSpace,
    SchemaError,
    SEUPair,
    ShapeError,
    StateSpace,
    SupportMismatchError,
    UndefinedConditionalError,
    Utility,
    argmax_set,
    bar_menu,
    eval_act,
    extreme_members,
    mix,
    rationalizes,
    same_preference,
)
from .static_model import (
    ASCFTable,
    DerivedSCF,
    FunctionOracle,
    RSEUModel,
    TieBreakCascade,
    ascf,
    derived_scf,
    simulate,
    tie_break_prob,
)
from .axioms import (
    ProbeBattery,
    Verdict,
    axiom_probe_menus,
    check_c_determinism,
    check_cib,
    check_nuc,
    run_axiom,
    state_indep_instances,
)
from .separation import SeparatingMenu, separating_lotteries, separating_menu
from .dynamic_model import (
    CHIInstance,
    DynamicModel,
    FunctionHistoryOracle,
    HCONTInstance,
    History,
    LHIInstance,
    MixtureLadder,
    SubjectiveState,
    conditional_ascf,
    consistent_states,
    consistent_weights,
    deterministic_chain,
    extended_ascf,
    history_prob,
    menu_without_ties,
    mix_history,
    node_ascf,
    revealed_geq,
    run_history_axiom,
    simulate_paths,
)
from .identify import (
    CandidateUniverse,
    ProbeRecord,
    RecoveredModel,
    canonicalize,
    models_equivalent,
    recover_kernels,
    recover_static,
    revealed_support,
)
from .preferences import (
    DLRMeasure,
    EvolvingPrimitives,
    FelicityNode,
    GLPrimitives,
    bellman_build,
    check_bellman,
    check_martingale,
    check_sophistication,
    check_stream_axioms,
    check_strong_dominance,
    check_weak_dominance,
    dlr_value,
    gl_build,
    identify_delta,
    learns_faster,
    menu_value,
    taste_learned,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
