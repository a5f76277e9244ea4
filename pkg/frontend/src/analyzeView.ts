// Analysis view: paste or upload counts, submit to /api/analyze, render the
// per-method table. Every number in the table is the payload value verbatim
// (String() of the JSON number); parsing here only structures the input.

import { Api, ApiError } from "./api.js";
import type { AnalyzeReport, AnalyzeRequest, MethodOutcome } from "./types.js";

export interface ParsedCounts {
  pre: number[][];
  post: number[][];
  errors: { line: number; message: string }[];
}

export function parseCounts(text: string): ParsedCounts {
  const pre: number[][] = [];
  const post: number[][] = [];
  const errors: { line: number; message: string }[] = [];
  const lines = text.split(/\r?\n/);
  lines.forEach((raw, index) => {
    const lineNo = index + 1;
    const line = raw.trim();
    if (!line) return;
    if (/^pre/i.test(line)) return; // header row
    const parts = line.split(",");
    if (parts.length !== 2) {
      errors.push({ line: lineNo, message: "expected 'pre,post' (replicates separated by ';')" });
      return;
    }
    const groups: number[][] = [];
    for (const part of parts) {
      const tokens = part.split(/[;\s]+/).filter((t) => t.length);
      const values: number[] = [];
      for (const token of tokens) {
        const value = Number(token);
        if (!Number.isInteger(value) || value < 0) {
          errors.push({ line: lineNo, message: `'${token}' is not a non-negative integer` });
          return;
        }
        values.push(value);
      }
      if (!values.length) {
        errors.push({ line: lineNo, message: "empty cell" });
        return;
      }
      groups.push(values);
    }
    pre.push(groups[0]);
    post.push(groups[1]);
  });
  return { pre, post, errors };
}

export function verbatim(value: number | null): string {
  return value === null ? "--" : String(value);
}

function estimateCell(outcome: MethodOutcome): string {
  if (outcome.degenerate === "sum-post-zero") return "LCL: -- UCL: --";
  if (outcome.degenerate !== null) return "--";
  if (outcome.method === "bnb") {
    return `p_A=${verbatim(outcome.p_noninferiority)} p_I=${verbatim(outcome.p_inferiority)}`;
  }
  return `LCL: ${verbatim(outcome.lcl)} UCL: ${verbatim(outcome.ucl)}`;
}

export interface AnalyzeController {
  root: HTMLElement;
  lastReport: AnalyzeReport | null;
  lastRequest: AnalyzeRequest | null;
  submit(): Promise<void>;
  readForm(): AnalyzeRequest | null;
  writeForm(request: AnalyzeRequest): void;
}

export function mountAnalyzeView(root: HTMLElement, api: Api): AnalyzeController {
  root.innerHTML = `
    <section class="analyze-view">
      <h2>Analyse a dataset</h2>
      <p class="hint">One subject per line: <code>pre,post</code>; replicate counts
      within a group separated by <code>;</code> and summed server-side.</p>
      <textarea class="counts-input" rows="8" spellcheck="false"></textarea>
      <div><input type="file" class="counts-file" accept=".csv,.txt"></div>
      <div class="design-row">
        <label>target <input class="f-target" type="number" step="0.01" value="0.95"></label>
        <label>margin <input class="f-margin" type="number" step="0.01" value="0.05"></label>
        <label>alpha <input class="f-alpha" type="number" step="0.005" value="0.025"></label>
        <label><input class="f-paired" type="checkbox" checked> paired</label>
      </div>
      <button class="submit-analyze">Analyse</button>
      <ul class="input-errors"></ul>
      <div class="api-error"></div>
      <table class="results-table"><thead>
        <tr><th>Method</th><th>Estimate</th><th>Classification</th></tr>
      </thead><tbody></tbody></table>
    </section>`;

  const textarea = root.querySelector<HTMLTextAreaElement>(".counts-input")!;
  const fileInput = root.querySelector<HTMLInputElement>(".counts-file")!;
  const errorsList = root.querySelector<HTMLUListElement>(".input-errors")!;
  const apiErrorBox = root.querySelector<HTMLDivElement>(".api-error")!;
  const tbody = root.querySelector<HTMLTableSectionElement>(".results-table tbody")!;

  const controller: AnalyzeController = {
    root,
    lastReport: null,
    lastRequest: null,

    readForm(): AnalyzeRequest | null {
      errorsList.textContent = "";
      const parsed = parseCounts(textarea.value);
      if (parsed.errors.length) {
        for (const err of parsed.errors) {
          const item = document.createElement("li");
          item.className = "row-error";
          item.dataset.line = String(err.line);
          item.textContent = `line ${err.line}: ${err.message}`;
          errorsList.appendChild(item);
        }
        return null;
      }
      if (!parsed.pre.length) {
        const item = document.createElement("li");
        item.className = "row-error";
        item.textContent = "no data rows";
        errorsList.appendChild(item);
        return null;
      }
      return {
        pre: parsed.pre,
        post: parsed.post,
        paired: root.querySelector<HTMLInputElement>(".f-paired")!.checked,
        design: {
          target: Number(root.querySelector<HTMLInputElement>(".f-target")!.value),
          margin: Number(root.querySelector<HTMLInputElement>(".f-margin")!.value),
          alpha: Number(root.querySelector<HTMLInputElement>(".f-alpha")!.value),
        },
      };
    },

    writeForm(request: AnalyzeRequest): void {
      const rows = (request.pre as number[][]).map((group, i) => {
        const postGroup = (request.post as number[][])[i];
        return `${group.join(";")},${postGroup.join(";")}`;
      });
      textarea.value = rows.join("\n");
      root.querySelector<HTMLInputElement>(".f-target")!.value = String(request.design.target);
      root.querySelector<HTMLInputElement>(".f-margin")!.value = String(request.design.margin);
      root.querySelector<HTMLInputElement>(".f-alpha")!.value = String(request.design.alpha);
      root.querySelector<HTMLInputElement>(".f-paired")!.checked = request.paired;
    },

    async submit(): Promise<void> {
      apiErrorBox.textContent = "";
      const request = controller.readForm();
      if (!request) return;
      controller.lastRequest = request;
      try {
        const report = await api.analyze(request);
        controller.lastReport = report;
        renderReport(report);
      } catch (error) {
        if (error instanceof ApiError) {
          apiErrorBox.textContent = error.message;
        } else {
          apiErrorBox.textContent = String(error);
        }
      }
    },
  };

  function renderReport(report: AnalyzeReport): void {
    tbody.textContent = "";
    for (const outcome of report.outcomes) {
      const row = document.createElement("tr");
      row.dataset.method = outcome.method;
      const method = document.createElement("td");
      method.className = "cell-method";
      method.textContent = outcome.method.toUpperCase();
      const estimate = document.createElement("td");
      estimate.className = "cell-estimate";
      estimate.textContent = estimateCell(outcome);
      const classification = document.createElement("td");
      classification.className = "cell-classification";
      if (outcome.degenerate !== null) {
        const badge = document.createElement("span");
        badge.className = "badge badge-degenerate";
        badge.textContent =
          outcome.degenerate === "sum-post-zero"
            ? "NA: sum(post) = 0"
            : `NA: ${outcome.degenerate}`;
        classification.appendChild(badge);
      } else {
        const badge = document.createElement("span");
        badge.className = `badge badge-${outcome.classification.group}`;
        badge.textContent =
          outcome.classification.group +
          (outcome.classification.fine ? ` (${outcome.classification.fine})` : "");
        classification.appendChild(badge);
      }
      row.append(method, estimate, classification);
      tbody.appendChild(row);
    }
  }

  root.querySelector<HTMLButtonElement>(".submit-analyze")!.addEventListener("click", () => {
    void controller.submit();
  });
  fileInput.addEventListener("change", async () => {
    const file = fileInput.files?.[0];
    if (file) textarea.value = await file.text();
  });

  return controller;
}
