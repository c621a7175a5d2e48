"""quasigraph: homomorphism counts, quasirandomness deviations, reductions."""

from .experiments import (
    ConfigError,
    ExperimentConfig,
    ExperimentOutcome,
    emit_plot_data,
    load_config,
    run_experiment,
)
from .graphs import (
    GeneratorSpec,
    Graph,
    VertexSet,
    build_graph,
    degree,
    degree_sequence,
    edge_density,
    edges_between,
    edges_within,
    generate,
    read_graph,
    write_graph,
)
from .homomorphisms import (
    ConstraintTuple,
    FiltrationStep,
    Pattern,
    doubled_count,
    filtration_values,
    hom_count,
    hom_count_in_induced,
    hom_density_estimate,
    partial_weighted_count,
    preset,
)
from .metrics import (
    DeviationReport,
    SamplerSpec,
    c4_deviation,
    crude_density_bound,
    edge_discrepancy,
    full_report,
    hereditary_deviation,
    labeled_deviation,
    spectral_report,
    tuple_deviation,
)
from .reductions import (
    AmplificationResult,
    CountingLemmaResult,
    MainLemmaTrace,
    amplify_discrepancy,
    counting_lemma_bound,
    disjointify_estimate,
    equitable_bipartition_expectation,
    main_lemma_trace,
    overlap_split,
    power_sum_gap,
)

__version__ = "0.1.0"
