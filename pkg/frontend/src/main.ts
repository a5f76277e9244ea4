// App bootstrap: two tabs (planner / analyse) over the shared API client.

import { Api } from "./api.js";
import { mountAnalyzeView } from "./analyzeView.js";
import { mountPlannerView } from "./plannerView.js";

export function bootstrap(root: HTMLElement, apiBase = ""): void {
  const api = new Api(apiBase);
  root.innerHTML = `
    <header>
      <h1>Count-reduction study planner</h1>
      <nav>
        <button class="tab-planner active">Planner</button>
        <button class="tab-analyze">Analyse</button>
      </nav>
    </header>
    <main>
      <div class="view-planner"></div>
      <div class="view-analyze" hidden></div>
    </main>`;

  const plannerRoot = root.querySelector<HTMLDivElement>(".view-planner")!;
  const analyzeRoot = root.querySelector<HTMLDivElement>(".view-analyze")!;
  const planner = mountPlannerView(plannerRoot, api);
  mountAnalyzeView(analyzeRoot, api);
  void planner.loadPresets().catch(() => {
    /* presets unavailable until the service is up */
  });

  const tabs: Array<[string, HTMLElement]> = [
    [".tab-planner", plannerRoot],
    [".tab-analyze", analyzeRoot],
  ];
  for (const [selector, view] of tabs) {
    root.querySelector<HTMLButtonElement>(selector)!.addEventListener("click", () => {
      for (const [otherSelector, otherView] of tabs) {
        const button = root.querySelector<HTMLButtonElement>(otherSelector)!;
        const activate = otherSelector === selector;
        button.classList.toggle("active", activate);
        otherView.hidden = !activate;
      }
    });
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap(document.getElementById("app")!);
}
