// Job polling with exponential backoff (1s doubling-ish to a 5s ceiling).
// One request is in flight at a time; a discard hook drops stale jobs when
// the user has already started a newer run.

import type { Api } from "./api.js";
import type { Job } from "./types.js";

export interface PollOptions {
  initialMs?: number;
  maxMs?: number;
  factor?: number;
  onUpdate?: (job: Job) => void;
  shouldDiscard?: () => boolean;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function pollJob(api: Api, jobId: string, options: PollOptions = {}): Promise<Job | null> {
  const initial = options.initialMs ?? 1000;
  const max = options.maxMs ?? 5000;
  const factor = options.factor ?? 1.5;
  const sleep = options.sleep ?? defaultSleep;
  let delay = initial;
  for (;;) {
    if (options.shouldDiscard?.()) return null;
    const job = await api.getJob(jobId);
    if (options.shouldDiscard?.()) return null;
    options.onUpdate?.(job);
    if (job.state === "done" || job.state === "failed") return job;
    await sleep(delay);
    delay = Math.min(max, delay * factor);
  }
}
