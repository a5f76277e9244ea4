// Client-side mirrors of the bounds the API enforces, so the form can flag
// problems (especially the correlation feasibility bound) before submitting.

import type { FieldError, ScenarioRequest } from "./types.js";

export function correlationBound(k1: number, k2: number): number {
  const lo = Math.min(k1, k2);
  const hi = Math.max(k1, k2);
  return Math.sqrt(lo / hi);
}

export function validateScenario(scenario: ScenarioRequest): FieldError[] {
  const errors: FieldError[] = [];
  if (!Number.isInteger(scenario.n) || scenario.n < 2) {
    errors.push({ field: "n", message: "need at least 2 subjects per group" });
  }
  if (!(scenario.mu1 > 0)) {
    errors.push({ field: "mu1", message: "pre-treatment mean must be positive" });
  }
  if (!(scenario.k1 > 0) || !(scenario.k2 > 0)) {
    errors.push({ field: "k", message: "shape parameters must be positive" });
  } else {
    const bound = correlationBound(scenario.k1, scenario.k2);
    if (!(scenario.rho >= 0 && scenario.rho < bound)) {
      errors.push({
        field: "rho",
        message: `correlation must lie in [0, ${bound.toFixed(4)}) for these shapes`,
      });
    }
  }
  const design = scenario.design;
  if (!(design.target >= 0 && design.target <= 1)) {
    errors.push({ field: "target", message: "target efficacy must lie in [0, 1]" });
  }
  if (!(design.margin >= 0 && design.margin <= design.target)) {
    errors.push({ field: "margin", message: "margin must lie in [0, target]" });
  }
  if (!(design.alpha > 0 && design.alpha < 0.5)) {
    errors.push({ field: "alpha", message: "alpha must lie in (0, 0.5)" });
  }
  if (scenario.replicates < 0) {
    errors.push({ field: "replicates", message: "replicates must be non-negative" });
  }
  if (scenario.seed < 0) {
    errors.push({ field: "seed", message: "seed must be non-negative" });
  }
  if (scenario.r_grid.length === 0) {
    errors.push({ field: "r_grid", message: "efficacy grid is empty" });
  }
  for (let i = 0; i < scenario.r_grid.length; i += 1) {
    const r = scenario.r_grid[i];
    if (!(r >= 0 && r <= 1)) {
      errors.push({ field: "r_grid", message: "efficacy values must lie in [0, 1]" });
      break;
    }
    if (i > 0 && r <= scenario.r_grid[i - 1]) {
      errors.push({ field: "r_grid", message: "efficacy grid must be strictly increasing" });
      break;
    }
  }
  return errors;
}

export function thresholdBandGrid(target: number, margin: number, pad = 0.1, step = 0.02): number[] {
  const lo = Math.max(0, target - margin - pad);
  const hi = Math.min(1, target + pad);
  const grid: number[] = [];
  for (let value = lo; value <= hi + 1e-9; value += step) {
    grid.push(Math.round(value * 1e6) / 1e6);
  }
  return grid;
}
