"""Canonical JSON wire formats.

One serializer is shared by the CLI, the HTTP service and the on-disk
snapshots so identical inputs yield byte-identical payloads.  Parsers
round-trip every type: parse(emit(x)) == x.
"""

from __future__ import annotations

import json
from typing import Any

from .design import EfficacyDesign, Typology, TypologyGroup
from .distributions import BetaParams
from .errors import ParseError
from .estimators import SampleSummary
from .methods import AnalysisOptions, KScaling, Method, MethodOutcome
from .montecarlo import (
    PlanCriteria,
    PlanReport,
    ScanCell,
    ScanResult,
    SimScenario,
    typology_curves,
)


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False)


def canonical_json_bytes(payload: Any) -> bytes:
    return canonical_json(payload).encode("utf-8")


# --- designs / options ------------------------------------------------------


def design_to_dict(design: EfficacyDesign) -> dict:
    return {
        "target": design.target,
        "margin": design.margin,
        "alpha": design.alpha,
        "threshold_inferiority": design.threshold_inferiority,
        "threshold_adequacy": design.threshold_adequacy,
        "confidence_level": design.confidence_level,
    }


def design_from_dict(data: dict) -> EfficacyDesign:
    try:
        return EfficacyDesign(
            target=float(data["target"]),
            margin=float(data.get("margin", 0.05)),
            alpha=float(data.get("alpha", 0.025)),
        )
    except KeyError as exc:
        raise ParseError(f"design missing field {exc}") from None


def options_to_dict(options: AnalysisOptions) -> dict:
    return {
        "prior_alpha": options.prior.alpha,
        "prior_beta": options.prior.beta,
        "binomial_99": options.binomial_99,
        "waavp_literal_variance": options.waavp_literal_variance,
        "k_scaling": options.k_scaling.value,
    }


def options_from_dict(data: dict) -> AnalysisOptions:
    return AnalysisOptions(
        prior=BetaParams(
            float(data.get("prior_alpha", 1.0)), float(data.get("prior_beta", 1.0))
        ),
        binomial_99=bool(data.get("binomial_99", False)),
        waavp_literal_variance=bool(data.get("waavp_literal_variance", False)),
        k_scaling=KScaling(data.get("k_scaling", "divide")),
    )


# --- outcomes ---------------------------------------------------------------


def typology_to_dict(typology: Typology) -> dict:
    return {
        "group": typology.group.name.lower(),
        "group_code": int(typology.group),
        "fine": typology.fine,
    }


def typology_from_dict(data: dict) -> Typology:
    return Typology(TypologyGroup[data["group"].upper()], data.get("fine"))


def outcome_to_dict(outcome: MethodOutcome) -> dict:
    return {
        "method": outcome.method.value,
        "r_hat": outcome.r_hat,
        "lcl": outcome.lcl,
        "ucl": outcome.ucl,
        "p_inferiority": outcome.p_inferiority,
        "p_noninferiority": outcome.p_noninferiority,
        "classification": typology_to_dict(outcome.classification),
        "degenerate": outcome.degenerate,
    }


def outcome_from_dict(data: dict) -> MethodOutcome:
    return MethodOutcome(
        method=Method(data["method"]),
        r_hat=float(data["r_hat"]),
        lcl=data.get("lcl"),
        ucl=data.get("ucl"),
        p_inferiority=data.get("p_inferiority"),
        p_noninferiority=data.get("p_noninferiority"),
        classification=typology_from_dict(data["classification"]),
        degenerate=data.get("degenerate"),
    )


def summary_to_dict(summary: SampleSummary) -> dict:
    return {
        "n_pre": summary.n_pre,
        "n_post": summary.n_post,
        "paired": summary.paired,
        "mean_pre": summary.mean_pre,
        "mean_post": summary.mean_post,
        "var_pre": summary.var_pre,
        "var_post": summary.var_post,
        "sum_pre": summary.sum_pre,
        "sum_post": summary.sum_post,
        "r_hat": summary.r_hat,
        "cov": summary.cov,
        "rho": summary.rho,
        "k_pre": summary.k_pre,
        "k_post": summary.k_post,
        "k_pre_underdispersed": summary.k_pre_underdispersed,
        "k_post_underdispersed": summary.k_post_underdispersed,
    }


def report_to_dict(
    design: EfficacyDesign,
    summary: SampleSummary,
    outcomes: list[MethodOutcome],
    options: AnalysisOptions,
    m_pre: int = 1,
    m_post: int = 1,
) -> dict:
    return {
        "design": design_to_dict(design),
        "options": options_to_dict(options),
        "data": {
            "m_pre": m_pre,
            "m_post": m_post,
        },
        "summary": summary_to_dict(summary),
        "outcomes": [outcome_to_dict(o) for o in outcomes],
    }


# --- scenarios / scans ------------------------------------------------------


def scenario_to_dict(scenario: SimScenario) -> dict:
    return {
        "n": scenario.n,
        "mu1": scenario.mu1,
        "k1": scenario.k1,
        "k2": scenario.k2,
        "rho": scenario.rho,
        "r_grid": list(scenario.r_grid),
        "replicates": scenario.replicates,
        "seed": scenario.seed,
        "design": design_to_dict(scenario.design),
        "methods": [m.value for m in scenario.methods],
        "options": options_to_dict(scenario.options),
    }


def scenario_from_dict(data: dict) -> SimScenario:
    try:
        return SimScenario(
            n=int(data["n"]),
            mu1=float(data["mu1"]),
            k1=float(data["k1"]),
            k2=float(data["k2"]),
            rho=float(data["rho"]),
            r_grid=tuple(float(r) for r in data["r_grid"]),
            replicates=int(data["replicates"]),
            seed=int(data["seed"]),
            design=design_from_dict(data["design"]),
            methods=tuple(Method(m) for m in data.get("methods", [m.value for m in Method])),
            options=options_from_dict(data.get("options", {})),
        )
    except KeyError as exc:
        raise ParseError(f"scenario missing field {exc}") from None


def cell_to_dict(cell: ScanCell) -> dict:
    return {
        "method": cell.method.value,
        "r": cell.r,
        "replicates": cell.replicates,
        "counts": {
            "reject_inferiority": cell.reject_inferiority,
            "reject_noninferiority": cell.reject_noninferiority,
            "reduced": cell.reduced,
            "inconclusive": cell.inconclusive,
            "borderline": cell.borderline,
            "adequate": cell.adequate,
            "degenerate": cell.degenerate,
        },
        "reject_inferiority_rate": cell.reject_inferiority_rate,
        "reject_noninferiority_rate": cell.reject_noninferiority_rate,
        "freq": {
            "reduced": cell.frequency(TypologyGroup.REDUCED),
            "inconclusive": cell.frequency(TypologyGroup.INCONCLUSIVE),
            "borderline": cell.frequency(TypologyGroup.BORDERLINE),
            "adequate": cell.frequency(TypologyGroup.ADEQUATE),
            "degenerate": cell.degenerate_fraction,
        },
    }


def cell_from_dict(data: dict) -> ScanCell:
    counts = data["counts"]
    return ScanCell(
        method=Method(data["method"]),
        r=float(data["r"]),
        replicates=int(data["replicates"]),
        reject_inferiority=int(counts["reject_inferiority"]),
        reject_noninferiority=int(counts["reject_noninferiority"]),
        reduced=int(counts["reduced"]),
        inconclusive=int(counts["inconclusive"]),
        borderline=int(counts["borderline"]),
        adequate=int(counts["adequate"]),
        degenerate=int(counts["degenerate"]),
    )


def scan_result_to_dict(result: ScanResult) -> dict:
    return {
        "scenario": scenario_to_dict(result.scenario),
        "cells": [cell_to_dict(c) for c in result.cells],
        "curves": typology_curves(result) if result.cells else None,
    }


def scan_result_from_dict(data: dict) -> ScanResult:
    return ScanResult(
        scenario=scenario_from_dict(data["scenario"]),
        cells=tuple(cell_from_dict(c) for c in data["cells"]),
    )


# --- planning ---------------------------------------------------------------


def criteria_to_dict(criteria: PlanCriteria) -> dict:
    return {
        "max_inconclusive": criteria.max_inconclusive,
        "max_misleading": criteria.max_misleading,
        "inconclusive_r_ranges": (
            None
            if criteria.inconclusive_r_ranges is None
            else [list(pair) for pair in criteria.inconclusive_r_ranges]
        ),
    }


def criteria_from_dict(data: dict) -> PlanCriteria:
    ranges = data.get("inconclusive_r_ranges")
    return PlanCriteria(
        max_inconclusive=float(data.get("max_inconclusive", 1.0)),
        max_misleading=float(data.get("max_misleading", 1.0)),
        inconclusive_r_ranges=(
            None if ranges is None else tuple((float(a), float(b)) for a, b in ranges)
        ),
    )


def plan_report_to_dict(report: PlanReport) -> dict:
    return {
        "criteria": criteria_to_dict(report.criteria),
        "recommended_n": report.recommended_n,
        "candidates": [
            {
                "n": cand.n,
                "passes": cand.passes,
                "max_inconclusive": cand.max_inconclusive,
                "max_misleading": cand.max_misleading,
                "scan": scan_result_to_dict(cand.scan),
            }
            for cand in report.candidates
        ],
    }
