import { readFileSync } from "node:fs";
import { join } from "node:path";
import { vi } from "vitest";

import type { Job, ScanResultPayload } from "../src/types.js";

export function loadFixture<T>(name: string): T {
  // vitest runs with cwd = frontend/; import.meta.url is unreliable under jsdom
  const path = join(process.cwd(), "tests", "fixtures", name);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export interface FetchCall {
  url: string;
  method: string;
  body: unknown;
}

/** Route-based fetch stub recording every call. */
export function stubFetch(
  routes: Record<string, (call: FetchCall) => Response | Promise<Response>>,
): FetchCall[] {
  const calls: FetchCall[] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      const call: FetchCall = {
        url,
        method: init?.method ?? "GET",
        body: init?.body ? JSON.parse(String(init.body)) : null,
      };
      calls.push(call);
      for (const [prefix, handler] of Object.entries(routes)) {
        if (url.startsWith(prefix)) return handler(call);
      }
      throw new Error(`unstubbed fetch: ${url}`);
    }),
  );
  return calls;
}

export function doneJob(id: string, result: unknown): Job {
  return {
    id,
    kind: "scan",
    state: "done",
    progress: 1,
    result: result as ScanResultPayload,
    error: null,
    created: 0,
    updated: 1,
  };
}
