"""Ratio-of-means inference and study planning for over-dispersed count data."""

__version__ = "0.1.0"

from .design import EfficacyDesign, Typology, TypologyGroup, classify, classify_fine
from .distributions import BetaParams, BnbParams, NegBinParams
from .estimators import PairedDataset, SampleSummary, nb_mle_k, pool_replicates, summarize
from .methods import (
    ALL_METHODS,
    AnalysisOptions,
    Method,
    MethodOutcome,
    analyze_all,
    analyze_summary,
)
from .montecarlo import (
    PlanCriteria,
    ScanResult,
    SimScenario,
    plan_sample_size,
    run_scan,
    scenario_from_preset,
    simulate_paired,
    typology_curves,
)

__all__ = [
    "ALL_METHODS",
    "AnalysisOptions",
    "BetaParams",
    "BnbParams",
    "EfficacyDesign",
    "Method",
    "MethodOutcome",
    "NegBinParams",
    "PairedDataset",
    "PlanCriteria",
    "SampleSummary",
    "ScanResult",
    "SimScenario",
    "Typology",
    "TypologyGroup",
    "analyze_all",
    "analyze_summary",
    "classify",
    "classify_fine",
    "nb_mle_k",
    "plan_sample_size",
    "pool_replicates",
    "run_scan",
    "scenario_from_preset",
    "simulate_paired",
    "summarize",
    "typology_curves",
]
