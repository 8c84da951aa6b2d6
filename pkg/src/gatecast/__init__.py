"""Quasi-random rumor spreading on the complete graph, with the gate model,
its adversarial lists and the machinery behind its lower bound."""

from .bounds import (
    BoundParams,
    adhp_upper_bound,
    lemma_failure_bound,
    lemma_threshold,
    pittel_reference,
    pittel_window,
    theorem_lower_bound,
)
from .errors import (
    ConfigurationError,
    EnumerationBudgetError,
    GatecastError,
    LemmaRegimeWarning,
    ListFileError,
    RunawayError,
)
from .harness import (
    TrialConfig,
    TrialSummary,
    compare_bounds,
    export_results,
    run_trials,
)
from .lists import (
    ListFamily,
    build_adversarial_lists,
    build_random_lists,
    load_lists,
    save_lists,
    validate_lists,
)
from .marking import (
    MarkingConfig,
    MarkingOutcome,
    PhaseTrace,
    largest_unmarked_interval,
    negative_correlation_oracle,
    run_marking_experiment,
    two_phase_simulation,
)
from .protocol import (
    BroadcastResult,
    EngineState,
    ProtocolKind,
    fully_random,
    gate_model,
    gate_positions,
    init_state,
    quasi_random,
    run_broadcast,
    simulate_round,
)

__version__ = "0.1.0"
