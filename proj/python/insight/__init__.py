"""Python bindings for the insight core: cohorts, the analysis DSL, benchmarks and the agent."""

from ._insight import (
    Dataset,
    analyze,
    ask,
    evaluate,
    exact_match,
    generate_benchmark,
    generate_cohort,
    load_cohort,
    run_benchmark,
    save_cohort,
    search,
)

__all__ = [
    "Dataset",
    "analyze",
    "ask",
    "evaluate",
    "exact_match",
    "generate_benchmark",
    "generate_cohort",
    "load_cohort",
    "run_benchmark",
    "save_cohort",
    "search",
]
