// Planner view: edit a scenario, submit a scan (or a sample-size plan),
// poll the job, and render the typology-frequency chart. Runs can be pinned
// to compare candidate sample sizes in place; responses from superseded
// submissions are discarded by revision.

import { Api, ApiError } from "./api.js";
import { CurveBundle, inconclusiveBandMass, renderTypologyChart } from "./chart.js";
import { correlationBound, thresholdBandGrid, validateScenario } from "./feasibility.js";
import { PollOptions, pollJob } from "./poll.js";
import type {
  Curves,
  Job,
  MethodName,
  PlanReportPayload,
  ScanResultPayload,
  ScenarioRequest,
  SpeciesPreset,
} from "./types.js";

export interface PlannerState {
  scenario: ScenarioRequest;
  method: MethodName;
  presets: SpeciesPreset[];
  selectedPreset: string | null;
  activeJobId: string | null;
  revision: number;
  resultsByN: Map<number, ScanResultPayload>;
  pinned: CurveBundle[];
  lastPlan: PlanReportPayload | null;
}

export interface PlannerController {
  root: HTMLElement;
  state: PlannerState;
  readForm(): ScenarioRequest;
  writeForm(scenario: ScenarioRequest): void;
  submitScan(): Promise<void>;
  submitPlan(candidates: number[], maxInconclusive: number): Promise<void>;
  pinActive(): void;
  loadPresets(): Promise<void>;
  applyPreset(name: string): void;
  updateFeasibility(): void;
  renderChart(): void;
  pollOptions?: Partial<PollOptions>;
}

const DEFAULT_SCENARIO: ScenarioRequest = {
  n: 91,
  mu1: 74,
  k1: 0.84,
  k2: 0.58,
  rho: 0.65,
  r_grid: thresholdBandGrid(0.7, 0.05),
  replicates: 2000,
  seed: 1,
  design: { target: 0.7, margin: 0.05, alpha: 0.025 },
};

function curvesFor(result: ScanResultPayload, method: MethodName, label: string): CurveBundle | null {
  const curves: Curves | null = result.curves;
  if (!curves || !curves.r.length) return null;
  const series = curves.methods[method];
  if (!series) return null;
  return { label, r: curves.r, series };
}

export function mountPlannerView(root: HTMLElement, api: Api): PlannerController {
  root.innerHTML = `
    <section class="planner-view">
      <h2>Plan a study</h2>
      <div class="form-grid">
        <label>preset <select class="f-preset"><option value="">custom</option></select></label>
        <label>subjects N <input class="f-n" type="number" value="91"></label>
        <label>pre-treatment mean <input class="f-mu1" type="number" step="any" value="74"></label>
        <label>shape k1 <input class="f-k1" type="number" step="any" value="0.84"></label>
        <label>shape k2 <input class="f-k2" type="number" step="any" value="0.58"></label>
        <label>correlation <input class="f-rho" type="number" step="any" value="0.65"></label>
        <label>target <input class="f-target" type="number" step="any" value="0.7"></label>
        <label>margin <input class="f-margin" type="number" step="any" value="0.05"></label>
        <label>alpha <input class="f-alpha" type="number" step="any" value="0.025"></label>
        <label>replicates <input class="f-reps" type="number" value="2000"></label>
        <label>seed <input class="f-seed" type="number" value="1"></label>
        <label>method <select class="f-method">
          <option value="bnb" selected>bnb</option><option value="waavp">waavp</option>
          <option value="gamma">gamma</option><option value="binomial">binomial</option>
          <option value="asymptotic">asymptotic</option>
        </select></label>
      </div>
      <div class="rho-bound-hint"></div>
      <div class="form-errors"></div>
      <div class="actions">
        <button class="submit-scan">Run scan</button>
        <button class="pin-run" disabled>Pin this run</button>
        <label>candidates <input class="f-candidates" value="20,91,1000" size="12"></label>
        <label>max inconclusive <input class="f-max-inconclusive" type="number" step="any" value="0.2" size="6"></label>
        <button class="submit-plan">Find sample size</button>
      </div>
      <div class="job-status"></div>
      <div class="api-error"></div>
      <div class="recommendation-banner" hidden></div>
      <div class="chart-root"></div>
      <div class="band-readout"></div>
    </section>`;

  const field = <T extends HTMLElement>(selector: string) => root.querySelector<T>(selector)!;
  const statusBox = field<HTMLDivElement>(".job-status");
  const errorBox = field<HTMLDivElement>(".api-error");
  const formErrors = field<HTMLDivElement>(".form-errors");
  const banner = field<HTMLDivElement>(".recommendation-banner");
  const chartRoot = field<HTMLDivElement>(".chart-root");
  const bandReadout = field<HTMLDivElement>(".band-readout");
  const pinButton = field<HTMLButtonElement>(".pin-run");

  const state: PlannerState = {
    scenario: structuredClone(DEFAULT_SCENARIO),
    method: "bnb",
    presets: [],
    selectedPreset: "hookworm",
    activeJobId: null,
    revision: 0,
    resultsByN: new Map(),
    pinned: [],
    lastPlan: null,
  };

  const numberField = (selector: string): number => Number(field<HTMLInputElement>(selector).value);

  const controller: PlannerController = {
    root,
    state,

    readForm(): ScenarioRequest {
      const target = numberField(".f-target");
      const margin = numberField(".f-margin");
      return {
        n: numberField(".f-n"),
        mu1: numberField(".f-mu1"),
        k1: numberField(".f-k1"),
        k2: numberField(".f-k2"),
        rho: numberField(".f-rho"),
        r_grid: thresholdBandGrid(target, margin),
        replicates: numberField(".f-reps"),
        seed: numberField(".f-seed"),
        design: { target, margin, alpha: numberField(".f-alpha") },
        methods: [field<HTMLSelectElement>(".f-method").value as MethodName],
      };
    },

    writeForm(scenario: ScenarioRequest): void {
      field<HTMLInputElement>(".f-n").value = String(scenario.n);
      field<HTMLInputElement>(".f-mu1").value = String(scenario.mu1);
      field<HTMLInputElement>(".f-k1").value = String(scenario.k1);
      field<HTMLInputElement>(".f-k2").value = String(scenario.k2);
      field<HTMLInputElement>(".f-rho").value = String(scenario.rho);
      field<HTMLInputElement>(".f-target").value = String(scenario.design.target);
      field<HTMLInputElement>(".f-margin").value = String(scenario.design.margin);
      field<HTMLInputElement>(".f-alpha").value = String(scenario.design.alpha);
      field<HTMLInputElement>(".f-reps").value = String(scenario.replicates);
      field<HTMLInputElement>(".f-seed").value = String(scenario.seed);
      controller.updateFeasibility();
    },

    updateFeasibility(): void {
      const k1 = numberField(".f-k1");
      const k2 = numberField(".f-k2");
      const hint = field<HTMLDivElement>(".rho-bound-hint");
      if (k1 > 0 && k2 > 0) {
        const bound = correlationBound(k1, k2);
        hint.textContent = `correlation must stay below ${bound.toFixed(4)} for these shapes`;
        hint.dataset.bound = String(bound);
      } else {
        hint.textContent = "";
        delete hint.dataset.bound;
      }
    },

    async loadPresets(): Promise<void> {
      const catalog = await api.presets();
      state.presets = catalog.presets;
      const select = field<HTMLSelectElement>(".f-preset");
      for (const preset of catalog.presets) {
        const option = document.createElement("option");
        option.value = preset.name;
        option.textContent = `${preset.name} (target ${preset.target_efficacy})`;
        select.appendChild(option);
      }
      select.value = state.selectedPreset ?? "";
    },

    applyPreset(name: string): void {
      const preset = state.presets.find((p) => p.name === name);
      state.selectedPreset = name || null;
      if (!preset) return;
      const scenario = controller.readForm();
      controller.writeForm({
        ...scenario,
        mu1: preset.mu1,
        k1: preset.k1,
        k2: preset.k2,
        rho: preset.correlation,
        design: {
          target: preset.target_efficacy,
          margin: preset.default_margin,
          alpha: scenario.design.alpha,
        },
      });
    },

    async submitScan(): Promise<void> {
      errorBox.textContent = "";
      formErrors.textContent = "";
      banner.hidden = true;
      const scenario = controller.readForm();
      const problems = validateScenario(scenario);
      if (problems.length) {
        for (const problem of problems) {
          const div = document.createElement("div");
          div.className = "field-error";
          div.dataset.field = problem.field;
          div.textContent = `${problem.field}: ${problem.message}`;
          formErrors.appendChild(div);
        }
        return;
      }
      state.scenario = scenario;
      const revision = ++state.revision;
      statusBox.textContent = "submitting...";
      try {
        const jobId = await api.submitScan(scenario);
        state.activeJobId = jobId;
        const job = await pollJob(api, jobId, {
          ...controller.pollOptions,
          shouldDiscard: () => state.revision !== revision,
          onUpdate: (j: Job) => {
            statusBox.textContent = `${j.state} ${(100 * j.progress).toFixed(0)}%`;
          },
        });
        if (!job) return; // superseded by a newer submission
        if (job.state === "failed") {
          errorBox.textContent = job.error ?? "job failed";
          return;
        }
        const result = job.result as ScanResultPayload;
        state.resultsByN.set(scenario.n, result);
        controller.renderChart();
        pinButton.disabled = false;
      } catch (error) {
        errorBox.textContent = error instanceof ApiError ? error.message : String(error);
      }
    },

    async submitPlan(candidates: number[], maxInconclusive: number): Promise<void> {
      errorBox.textContent = "";
      const scenario = controller.readForm();
      const problems = validateScenario(scenario);
      if (problems.length) {
        formErrors.textContent = problems.map((p) => `${p.field}: ${p.message}`).join("; ");
        return;
      }
      const revision = ++state.revision;
      statusBox.textContent = "planning...";
      try {
        const jobId = await api.submitPlan({
          scenario,
          n_candidates: candidates,
          max_inconclusive: maxInconclusive,
        });
        state.activeJobId = jobId;
        const job = await pollJob(api, jobId, {
          ...controller.pollOptions,
          shouldDiscard: () => state.revision !== revision,
          onUpdate: (j: Job) => {
            statusBox.textContent = `${j.state} ${(100 * j.progress).toFixed(0)}%`;
          },
        });
        if (!job) return;
        if (job.state === "failed") {
          errorBox.textContent = job.error ?? "job failed";
          return;
        }
        const report = job.result as PlanReportPayload;
        state.lastPlan = report;
        for (const candidate of report.candidates) {
          state.resultsByN.set(candidate.n, candidate.scan);
        }
        banner.hidden = false;
        banner.textContent =
          report.recommended_n === null
            ? "No candidate sample size satisfies the criteria."
            : `Recommended sample size: N = ${report.recommended_n}`;
        banner.dataset.recommendedN = String(report.recommended_n);
        controller.renderChart();
      } catch (error) {
        errorBox.textContent = error instanceof ApiError ? error.message : String(error);
      }
    },

    pinActive(): void {
      const result = state.resultsByN.get(state.scenario.n);
      if (!result) return;
      const bundle = curvesFor(result, state.method, `N=${state.scenario.n}`);
      if (bundle) {
        state.pinned.push(bundle);
        controller.renderChart();
      }
    },

    renderChart(): void {
      state.method = field<HTMLSelectElement>(".f-method").value as MethodName;
      const result = state.resultsByN.get(controller.readForm().n) ?? null;
      const active = result ? curvesFor(result, state.method, `N=${controller.readForm().n}`) : null;
      const thresholds = result?.curves?.thresholds ?? {
        adequacy: state.scenario.design.target - state.scenario.design.margin,
        inferiority: state.scenario.design.target,
      };
      renderTypologyChart(chartRoot, active, state.pinned, thresholds);
      const parts: string[] = [];
      if (active) {
        parts.push(`${active.label}: inconclusive mass ${inconclusiveBandMass(active).toFixed(3)}`);
      }
      for (const pin of state.pinned) {
        parts.push(`${pin.label} (pinned): ${inconclusiveBandMass(pin).toFixed(3)}`);
      }
      bandReadout.textContent = parts.join(" | ");
    },
  };

  field<HTMLSelectElement>(".f-preset").addEventListener("change", (event) => {
    controller.applyPreset((event.target as HTMLSelectElement).value);
  });
  for (const selector of [".f-k1", ".f-k2", ".f-rho"]) {
    field<HTMLInputElement>(selector).addEventListener("input", controller.updateFeasibility);
  }
  field<HTMLButtonElement>(".submit-scan").addEventListener("click", () => {
    void controller.submitScan();
  });
  field<HTMLButtonElement>(".submit-plan").addEventListener("click", () => {
    const candidates = field<HTMLInputElement>(".f-candidates")
      .value.split(",")
      .map((token) => Number(token.trim()))
      .filter((value) => Number.isFinite(value));
    void controller.submitPlan(candidates, numberField(".f-max-inconclusive"));
  });
  pinButton.addEventListener("click", () => controller.pinActive());

  controller.updateFeasibility();
  return controller;
}
