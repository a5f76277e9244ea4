"""Command-line interface: analyze, simulate, plan, serve.

Exit codes: 0 success, 2 input/usage error, 3 when every requested method
is infeasible for the given data.
"""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

import click

from .datasets import SPECIES_PRESETS, ingest
from .design import EfficacyDesign
from .distributions import BetaParams
from .errors import NbRatioError
from .estimators import summarize
from .methods import ALL_METHODS, AnalysisOptions, KScaling, Method, analyze_summary
from .montecarlo import (
    PlanCriteria,
    default_workers,
    plan_sample_size,
    run_scan,
    scan_to_tidy_csv,
    scenario_from_preset,
)
from .serialize import (
    canonical_json,
    plan_report_to_dict,
    report_to_dict,
    scan_result_to_dict,
)

EXIT_INPUT_ERROR = 2
EXIT_ALL_METHODS_INFEASIBLE = 3


def _parse_methods(spec: str) -> tuple[Method, ...]:
    if spec.strip().lower() in ("all", ""):
        return ALL_METHODS
    out = []
    for token in spec.split(","):
        token = token.strip().lower()
        try:
            out.append(Method(token))
        except ValueError:
            raise click.UsageError(
                f"unknown method {token!r}; expected one of "
                f"{', '.join(m.value for m in Method)} or 'all'"
            ) from None
    return tuple(out)


def _parse_r_grid(single: float | None, grid: str | None) -> tuple[float, ...] | None:
    if grid:
        if ":" in grid:
            parts = grid.split(":")
            if len(parts) != 3:
                raise click.UsageError("--r-grid range must be start:stop:step")
            start, stop, step = (float(p) for p in parts)
            if step <= 0:
                raise click.UsageError("--r-grid step must be positive")
            values = []
            value = start
            while value <= stop + 1e-12:
                values.append(round(value, 12))
                value += step
            return tuple(values)
        return tuple(sorted(float(t) for t in grid.split(",") if t.strip()))
    if single is not None:
        return (float(single),)
    return None


def _options_from_flags(prior_a0, prior_b0, waavp_literal_v, k_scaling) -> AnalysisOptions:
    return AnalysisOptions(
        prior=BetaParams(prior_a0, prior_b0),
        waavp_literal_variance=waavp_literal_v,
        k_scaling=KScaling(k_scaling),
    )


def _fmt(value) -> str:
    if value is None:
        return "--"
    return f"{value:.6g}"


def _render_text_report(report: dict) -> str:
    design = report["design"]
    summary = report["summary"]
    lines = [
        f"Efficacy analysis: target {_fmt(design['target'])}, "
        f"margin {_fmt(design['margin'])}, alpha {_fmt(design['alpha'])} per one-sided test",
        f"Thresholds: inferiority {_fmt(design['threshold_inferiority'])}, "
        f"adequacy {_fmt(design['threshold_adequacy'])}",
        f"Data: N_pre {summary['n_pre']}, N_post {summary['n_post']}, "
        f"{'paired' if summary['paired'] else 'unpaired'}; "
        f"mean_pre {_fmt(summary['mean_pre'])}, mean_post {_fmt(summary['mean_post'])}, "
        f"estimated reduction {_fmt(summary['r_hat'])}",
        "",
        f"{'Method':<12}{'Estimate':<42}Classification",
    ]
    for outcome in report["outcomes"]:
        if outcome["degenerate"] == "sum-post-zero":
            estimate = "LCL: -- UCL: --"
            label = "NA: sum(post) = 0"
        elif outcome["degenerate"] is not None:
            estimate = "--"
            label = f"NA: {outcome['degenerate']}"
        elif outcome["method"] == "bnb":
            estimate = (
                f"p_A={_fmt(outcome['p_noninferiority'])} "
                f"p_I={_fmt(outcome['p_inferiority'])}"
            )
            label = outcome["classification"]["group"].capitalize()
        else:
            estimate = f"LCL: {_fmt(outcome['lcl'])} UCL: {_fmt(outcome['ucl'])}"
            label = outcome["classification"]["group"].capitalize()
            if outcome["classification"]["fine"]:
                label += f" ({outcome['classification']['fine']})"
        lines.append(f"{outcome['method'].upper():<12}{estimate:<42}{label}")
    return "\n".join(lines)


def _write_output(payload_json: str, out: str | None, as_json: bool, text: str | None) -> None:
    if out:
        Path(out).write_text(payload_json + "\n", encoding="utf-8")
    if as_json:
        click.echo(payload_json)
    elif text is not None:
        click.echo(text)


@click.group()
def main() -> None:
    """Ratio-of-means efficacy workbench for over-dispersed count data."""


@main.command()
@click.option("--data", required=True, type=click.Path(exists=True), help="Dataset file.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None)
@click.option("--paired/--unpaired", default=True)
@click.option("--target", required=True, type=float, help="Target efficacy in [0, 1].")
@click.option("--delta", type=float, default=0.05, help="Non-inferiority margin.")
@click.option("--alpha", type=float, default=0.025, help="One-sided significance level.")
@click.option("--methods", default="all", help="Comma-separated subset or 'all'.")
@click.option("--prior-a0", type=float, default=1.0)
@click.option("--prior-b0", type=float, default=1.0)
@click.option("--waavp-literal-v", is_flag=True, default=False)
@click.option("--k-scaling", type=click.Choice(["divide", "multiply"]), default="divide")
@click.option("--out", type=click.Path(), default=None, help="Write JSON report here.")
@click.option("--json", "as_json", is_flag=True, default=False, help="Print JSON to stdout.")
def analyze(data, fmt, paired, target, delta, alpha, methods, prior_a0, prior_b0,
            waavp_literal_v, k_scaling, out, as_json):
    """Analyse one dataset with the requested methods."""
    method_set = _parse_methods(methods)
    try:
        dataset = ingest(data, fmt=fmt, paired=paired)
        design = EfficacyDesign(target=target, margin=delta, alpha=alpha)
        options = _options_from_flags(prior_a0, prior_b0, waavp_literal_v, k_scaling)
        summary = summarize(dataset)
        outcomes = analyze_summary(summary, design, options, method_set)
    except NbRatioError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    report = report_to_dict(
        design, summary, outcomes, options, m_pre=dataset.m_pre, m_post=dataset.m_post
    )
    payload = canonical_json(report)
    _write_output(payload, out, as_json, _render_text_report(report))
    infeasible = all(
        o.degenerate is not None
        and o.lcl is None
        and o.p_inferiority is None
        for o in outcomes
    )
    if infeasible:
        sys.exit(EXIT_ALL_METHODS_INFEASIBLE)


def _scenario_from_flags(preset, n, r, r_grid, reps, seed, target, delta, alpha,
                         methods, options):
    scenario = scenario_from_preset(
        preset,
        n=n,
        replicates=reps,
        seed=seed,
        margin=delta,
        alpha=alpha,
        methods=_parse_methods(methods),
        options=options,
    )
    grid = _parse_r_grid(r, r_grid)
    if grid is not None:
        scenario = replace(scenario, r_grid=grid)
    if target is not None:
        design = EfficacyDesign(target=target, margin=delta, alpha=alpha)
        scenario = replace(scenario, design=design)
        if grid is None:
            scenario = replace(
                scenario, r_grid=(design.threshold_adequacy, design.threshold_inferiority)
            )
    return scenario


_COMMON_SIM_OPTIONS = [
    click.option("--preset", required=True,
                 type=click.Choice([p.name for p in SPECIES_PRESETS])),
    click.option("--n", type=int, default=91, help="Subjects per group."),
    click.option("--target", type=float, default=None, help="Override preset target."),
    click.option("--delta", type=float, default=0.05),
    click.option("--alpha", type=float, default=0.025),
    click.option("--seed", required=True, type=int, help="RNG seed (no silent entropy)."),
    click.option("--threads", type=int, default=None,
                 help="Worker count (default: NBRATIO_THREADS env var, else 1)."),
    click.option("--prior-a0", type=float, default=1.0),
    click.option("--prior-b0", type=float, default=1.0),
    click.option("--waavp-literal-v", is_flag=True, default=False),
    click.option("--k-scaling", type=click.Choice(["divide", "multiply"]), default="divide"),
    click.option("--out", type=click.Path(), default=None,
                 help="Output path (.json, or .csv for the tidy table)."),
    click.option("--json", "as_json", is_flag=True, default=False),
]


def _with_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@main.command()
@_with_options(_COMMON_SIM_OPTIONS)
@click.option("--r", type=float, default=None, help="Single true efficacy.")
@click.option("--r-grid", default=None, help="Comma list or start:stop:step.")
@click.option("--reps", type=int, default=10_000, help="Replicates per efficacy value.")
@click.option("--methods", default="all")
def simulate(preset, n, target, delta, alpha, seed, threads, prior_a0, prior_b0,
             waavp_literal_v, k_scaling, out, as_json, r, r_grid, reps, methods):
    """Monte Carlo error-rate scan over an efficacy grid."""
    options = _options_from_flags(prior_a0, prior_b0, waavp_literal_v, k_scaling)
    try:
        scenario = _scenario_from_flags(
            preset, n, r, r_grid, reps, seed, target, delta, alpha, methods, options
        )
        result = run_scan(scenario, parallelism=threads)
    except NbRatioError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    payload = canonical_json(scan_result_to_dict(result))
    if out and out.lower().endswith(".csv"):
        Path(out).write_text(scan_to_tidy_csv(result), encoding="utf-8")
        out = None
    _write_output(payload, out, as_json, None if as_json else payload)


@main.command()
@_with_options(_COMMON_SIM_OPTIONS)
@click.option("--n-candidates", required=True,
              help="Comma-separated candidate group sizes, e.g. 20,91,1000.")
@click.option("--r-grid", default=None,
              help="Planning grid (default: threshold band +-0.10, step 0.01).")
@click.option("--reps", type=int, default=2_000, help="Replicates per efficacy value.")
@click.option("--methods", default="bnb")
@click.option("--max-inconclusive", type=float, default=1.0,
              help="Largest tolerable inconclusive frequency where a conclusion is attainable.")
@click.option("--max-misleading", type=float, default=1.0,
              help="Largest tolerable misleading-classification frequency.")
def plan(preset, n, target, delta, alpha, seed, threads, prior_a0, prior_b0,
         waavp_literal_v, k_scaling, out, as_json, n_candidates, r_grid, reps,
         methods, max_inconclusive, max_misleading):
    """Pick the smallest candidate sample size meeting typology criteria."""
    options = _options_from_flags(prior_a0, prior_b0, waavp_literal_v, k_scaling)
    try:
        candidates = [int(tok) for tok in n_candidates.split(",") if tok.strip()]
    except ValueError:
        raise click.UsageError("--n-candidates must be a comma-separated integer list")
    try:
        scenario = _scenario_from_flags(
            preset, n, None, r_grid, reps, seed, target, delta, alpha, methods, options
        )
        if r_grid is None:
            design = scenario.design
            lo = max(0.0, design.threshold_adequacy - 0.10)
            hi = min(1.0, design.threshold_inferiority + 0.10)
            steps = int(round((hi - lo) / 0.01))
            grid = tuple(round(lo + 0.01 * i, 10) for i in range(steps + 1))
            scenario = replace(scenario, r_grid=grid)
        criteria = PlanCriteria(
            max_inconclusive=max_inconclusive, max_misleading=max_misleading
        )
        report = plan_sample_size(scenario, candidates, criteria, parallelism=threads)
    except NbRatioError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    payload = canonical_json(plan_report_to_dict(report))
    text = (
        f"recommended N: {report.recommended_n}"
        if report.recommended_n is not None
        else "no candidate sample size satisfies the criteria"
    )
    _write_output(payload, out, as_json, text)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.option("--threads", type=int, default=None, help="Monte Carlo worker count.")
@click.option("--replicate-cap", type=int, default=100_000,
              help="Largest allowed replicates per efficacy value.")
@click.option("--data-dir", type=click.Path(), default=None,
              help="Directory for completed-job snapshots.")
@click.option("--ttl-hours", type=float, default=24.0, help="Job retention period.")
@click.option("--static-dir", type=click.Path(), default=None,
              help="Serve the built frontend from this directory at /.")
def serve(host, port, threads, replicate_cap, data_dir, ttl_hours, static_dir):
    """Run the HTTP planning/analysis service."""
    import uvicorn

    from .service import ServiceConfig, create_app

    workers = threads if threads is not None else default_workers()
    app = create_app(
        ServiceConfig(
            workers=workers,
            replicate_cap=replicate_cap,
            data_dir=data_dir,
            ttl_seconds=ttl_hours * 3600.0,
            static_dir=static_dir,
        )
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
