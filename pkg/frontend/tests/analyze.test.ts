import { afterEach, describe, expect, it, vi } from "vitest";

import { Api } from "../src/api.js";
import { mountAnalyzeView, parseCounts, verbatim } from "../src/analyzeView.js";
import type { AnalyzeReport } from "../src/types.js";
import { jsonResponse, loadFixture, stubFetch } from "./helpers.js";

afterEach(() => vi.unstubAllGlobals());

const FIXTURE = loadFixture<AnalyzeReport>("analyze_sum_post_zero.json");

describe("parseCounts", () => {
  it("accepts plain pairs and replicate groups", () => {
    const parsed = parseCounts("pre,post\n10,2\n3;4,0;1\n");
    expect(parsed.errors).toEqual([]);
    expect(parsed.pre).toEqual([[10], [3, 4]]);
    expect(parsed.post).toEqual([[2], [0, 1]]);
  });

  it("attaches errors to the offending line", () => {
    const parsed = parseCounts("10,2\nbogus,3\n4,-1\n");
    expect(parsed.errors.map((e) => e.line)).toEqual([2, 3]);
  });
});

describe("analyze view", () => {
  function mount() {
    const calls = stubFetch({ "/api/analyze": () => jsonResponse(FIXTURE) });
    const root = document.createElement("div");
    document.body.appendChild(root);
    const controller = mountAnalyzeView(root, new Api());
    return { calls, root, controller };
  }

  it("renders exactly the API payload for the zero-post-sum fixture", async () => {
    const { root, controller } = mount();
    root.querySelector<HTMLTextAreaElement>(".counts-input")!.value =
      "412,0\n97,0\n1180,0\n55,0\n2200,0";
    root.querySelector<HTMLInputElement>(".f-target")!.value = "0.95";
    await controller.submit();

    const rows = [...root.querySelectorAll<HTMLTableRowElement>("tbody tr")];
    expect(rows.map((r) => r.dataset.method)).toEqual(
      FIXTURE.outcomes.map((o) => o.method),
    );
    for (const outcome of FIXTURE.outcomes) {
      const row = root.querySelector(`tr[data-method="${outcome.method}"]`)!;
      const estimate = row.querySelector(".cell-estimate")!.textContent!;
      const badge = row.querySelector(".badge")!.textContent!;
      if (outcome.degenerate === "sum-post-zero") {
        expect(estimate).toBe("LCL: -- UCL: --");
        expect(badge).toBe("NA: sum(post) = 0");
      } else if (outcome.method === "bnb") {
        // exact payload numbers, rendered verbatim
        expect(estimate).toBe(
          `p_A=${String(outcome.p_noninferiority)} p_I=${String(outcome.p_inferiority)}`,
        );
        expect(badge).toContain(outcome.classification.group);
      } else {
        expect(estimate).toBe(`LCL: ${String(outcome.lcl)} UCL: ${String(outcome.ucl)}`);
        expect(badge).toContain(outcome.classification.group);
      }
    }
    expect(controller.lastReport).toEqual(FIXTURE);
  });

  it("sends the parsed form as the request body", async () => {
    const { calls, root, controller } = mount();
    root.querySelector<HTMLTextAreaElement>(".counts-input")!.value = "412,0\n97,0";
    root.querySelector<HTMLInputElement>(".f-target")!.value = "0.95";
    await controller.submit();
    expect(calls[0].body).toEqual({
      pre: [[412], [97]],
      post: [[0], [0]],
      paired: true,
      design: { target: 0.95, margin: 0.05, alpha: 0.025 },
    });
  });

  it("round-trips the form through a request and back", () => {
    const { controller } = mount();
    const request = {
      pre: [[1, 2], [3, 4]],
      post: [[0], [5]],
      paired: false,
      design: { target: 0.8, margin: 0.1, alpha: 0.05 },
    };
    controller.writeForm(request);
    expect(controller.readForm()).toEqual(request);
  });

  it("shows malformed-paste errors inline without calling the API", async () => {
    const { calls, root, controller } = mount();
    root.querySelector<HTMLTextAreaElement>(".counts-input")!.value = "abc,1\n2,3";
    await controller.submit();
    expect(calls).toHaveLength(0);
    const error = root.querySelector<HTMLLIElement>(".row-error")!;
    expect(error.dataset.line).toBe("1");
  });

  it("verbatim keeps null as --", () => {
    expect(verbatim(null)).toBe("--");
    expect(verbatim(0.123456789)).toBe("0.123456789");
  });
});
