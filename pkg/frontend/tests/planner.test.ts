import { afterEach, describe, expect, it, vi } from "vitest";

import { Api } from "../src/api.js";
import { inconclusiveBandMass } from "../src/chart.js";
import { correlationBound, thresholdBandGrid, validateScenario } from "../src/feasibility.js";
import { mountPlannerView } from "../src/plannerView.js";
import type { PlanReportPayload, ScanResultPayload } from "../src/types.js";
import { doneJob, jsonResponse, loadFixture, stubFetch } from "./helpers.js";

afterEach(() => {
  vi.unstubAllGlobals();
  document.body.innerHTML = "";
});

const SCAN_91 = loadFixture<ScanResultPayload>("scan_hookworm_n91.json");
const SCAN_1000 = loadFixture<ScanResultPayload>("scan_hookworm_n1000.json");

const PRESETS = {
  presets: [
    { name: "hookworm", target_efficacy: 0.7, default_margin: 0.05, mu1: 74, k1: 0.84, k2: 0.58, correlation: 0.65 },
    { name: "ascaris", target_efficacy: 0.95, default_margin: 0.05, mu1: 1255, k1: 0.08, k2: 0.0512, correlation: 0.67 },
  ],
};

function mountWithScans() {
  let submissions = 0;
  const calls = stubFetch({
    "/api/presets": () => jsonResponse(PRESETS),
    "/api/simulate": (call) => {
      submissions += 1;
      const n = (call.body as { n: number }).n;
      return jsonResponse({ job_id: `job-${n}-${submissions}`, state: "queued" }, 202);
    },
    "/api/jobs/job-91": () => jsonResponse(doneJob("job-91", SCAN_91)),
    "/api/jobs/job-1000": () => jsonResponse(doneJob("job-1000", SCAN_1000)),
  });
  const root = document.createElement("div");
  document.body.appendChild(root);
  const controller = mountPlannerView(root, new Api());
  controller.pollOptions = { sleep: async () => {} };
  return { calls, root, controller };
}

describe("feasibility", () => {
  it("computes the shared-shock correlation bound", () => {
    expect(correlationBound(0.84, 0.58)).toBeCloseTo(Math.sqrt(0.58 / 0.84), 12);
    expect(correlationBound(0.58, 0.84)).toBeCloseTo(Math.sqrt(0.58 / 0.84), 12);
  });

  it("mirrors the API bounds", () => {
    const scenario = {
      n: 91, mu1: 74, k1: 0.84, k2: 0.58, rho: 0.9,
      r_grid: thresholdBandGrid(0.7, 0.05),
      replicates: 100, seed: 1,
      design: { target: 0.7, margin: 0.05, alpha: 0.025 },
    };
    const errors = validateScenario(scenario);
    expect(errors.some((e) => e.field === "rho")).toBe(true);
    expect(validateScenario({ ...scenario, rho: 0.65 })).toEqual([]);
  });
});

describe("planner view", () => {
  it("routes scan-to-chart and pins runs for comparison (plan iteration loop)", async () => {
    const { root, controller } = mountWithScans();
    const mainBefore = root.querySelector(".planner-view");

    // run at N=91 using the fixture job
    stubRouteForN(root, 91);
    await controller.submitScan();
    expect(root.querySelector(".typology-chart")).not.toBeNull();
    const active91 = controller.state.resultsByN.get(91)!;
    expect(active91.scenario.n).toBe(91);

    // pin, switch to N=1000 and re-run: no remount, band shrinks visibly
    controller.pinActive();
    stubRouteForN(root, 1000);
    await controller.submitScan();

    expect(root.querySelector(".planner-view")).toBe(mainBefore); // no page reload
    const pinnedOverlay = root.querySelector<SVGPolylineElement>(".pinned-inconclusive")!;
    expect(pinnedOverlay.dataset.label).toBe("N=91");
    const mass91 = Number(pinnedOverlay.dataset.bandMass);
    const active = controller.state.resultsByN.get(1000)!;
    const mass1000 = inconclusiveBandMass({
      label: "N=1000",
      r: active.curves!.r,
      series: active.curves!.methods.bnb,
    });
    expect(mass1000).toBeLessThan(mass91);
    expect(root.querySelector(".band-readout")!.textContent).toContain("pinned");
  });

  it("blocks submission and shows the bound when the correlation is infeasible", async () => {
    const { calls, root, controller } = mountWithScans();
    root.querySelector<HTMLInputElement>(".f-rho")!.value = "0.95";
    await controller.submitScan();
    const error = root.querySelector<HTMLDivElement>(".field-error")!;
    expect(error.dataset.field).toBe("rho");
    expect(error.textContent).toContain("0.8309"); // sqrt(0.58/0.84)
    expect(calls.filter((c) => c.url.includes("/api/simulate"))).toHaveLength(0);
  });

  it("shows the live correlation bound as shapes change", () => {
    const { root, controller } = mountWithScans();
    const hint = root.querySelector<HTMLDivElement>(".rho-bound-hint")!;
    expect(Number(hint.dataset.bound)).toBeCloseTo(Math.sqrt(0.58 / 0.84), 6);
    root.querySelector<HTMLInputElement>(".f-k2")!.value = "0.84";
    controller.updateFeasibility();
    expect(Number(hint.dataset.bound)).toBeCloseTo(1.0, 12);
  });

  it("round-trips the scenario form", () => {
    const { controller } = mountWithScans();
    const scenario = {
      n: 250, mu1: 162, k1: 0.92, k2: 0.53, rho: 0.68,
      r_grid: thresholdBandGrid(0.5, 0.05),
      replicates: 1234, seed: 77,
      design: { target: 0.5, margin: 0.05, alpha: 0.025 },
      methods: ["bnb"] as const,
    };
    controller.writeForm(scenario as never);
    expect(controller.readForm()).toEqual(scenario);
  });

  it("discards stale results when a newer run supersedes the poll", async () => {
    const { root, controller } = mountWithScans();
    stubRouteForN(root, 91);
    const first = controller.submitScan();
    controller.state.revision += 1; // simulate a newer submission racing ahead
    await first;
    expect(controller.state.resultsByN.has(91)).toBe(false);
  });

  it("surfaces a recommendation banner when planning completes", async () => {
    const report: PlanReportPayload = {
      criteria: {},
      recommended_n: 91,
      candidates: [
        { n: 91, passes: true, max_inconclusive: { bnb: 0.1 }, max_misleading: { bnb: 0.0 }, scan: SCAN_91 },
      ],
    };
    const { root, controller } = mountWithScans();
    vi.stubGlobal(
      "fetch",
      vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
        const url = String(input);
        if (url.includes("/api/plan")) return jsonResponse({ job_id: "plan-1" }, 202);
        if (url.includes("/api/jobs/plan-1"))
          return jsonResponse({ ...doneJob("plan-1", report), kind: "plan" });
        if (url.includes("/api/presets")) return jsonResponse(PRESETS);
        throw new Error(`unstubbed ${url}`);
      }),
    );
    await controller.submitPlan([91], 0.2);
    const banner = root.querySelector<HTMLDivElement>(".recommendation-banner")!;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("N = 91");
    expect(controller.state.lastPlan).toEqual(report);
  });

  it("loads presets into the selector and applies them", async () => {
    const { root, controller } = mountWithScans();
    await controller.loadPresets();
    controller.applyPreset("ascaris");
    expect(root.querySelector<HTMLInputElement>(".f-mu1")!.value).toBe("1255");
    expect(root.querySelector<HTMLInputElement>(".f-target")!.value).toBe("0.95");
  });
});

/** Point the N form field at a fixture-backed job route. */
function stubRouteForN(root: HTMLElement, n: number): void {
  root.querySelector<HTMLInputElement>(".f-n")!.value = String(n);
}
