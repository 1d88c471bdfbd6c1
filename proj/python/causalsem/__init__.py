"""Causal discovery under background knowledge and SEM model comparison."""

from ._core import (
    CorrelationMatrix,
    DataError,
    Dataset,
    DiscoveryConfig,
    DiscoveryResult,
    FitReport,
    FittedSem,
    Graph,
    GraphError,
    Knowledge,
    PipelineReport,
    Scm,
    bivariate_normal_cdf,
    correlation,
    cpdag_of,
    d_separated,
    dataset_from_csv_text,
    direct_lingam,
    fci,
    fges,
    fit_sem,
    knowledge_from_roles,
    knowledge_violations,
    load_csv,
    load_knowledge,
    parse_knowledge,
    pc,
    random_dag,
    random_scm,
    rank_models,
    run_pipeline,
    scale_unit,
    simplify_by_weight,
    structural_hamming_distance,
    travel_example,
)

__version__ = "0.1.0"
