// Job polling. Polling is resumable: all state lives on the server, so
// a tracker can be reconstructed from a bare job id after a reload.

import type { GridshedApi } from './api';
import type { Job } from './types';

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  onUpdate?: (job: Job) => void;
}

const sleep = (ms: number) => new Promise(resolve => setTimeout(resolve, ms));

/**
 * Poll a job until it reaches a terminal state. Progress reported to
 * `onUpdate` is clamped monotone non-decreasing even if polls race.
 */
export async function pollJob(
  api: GridshedApi,
  jobId: string,
  options: PollOptions = {},
): Promise<Job> {
  const interval = options.intervalMs ?? 500;
  const deadline = Date.now() + (options.timeoutMs ?? 10 * 60 * 1000);
  let floor = 0;
  for (;;) {
    const job = await api.getJob(jobId);
    floor = Math.max(floor, job.state === 'done' ? 1 : job.progress);
    const snapshot = { ...job, progress: floor };
    options.onUpdate?.(snapshot);
    if (job.state === 'done' || job.state === 'failed') {
      return snapshot;
    }
    if (Date.now() > deadline) {
      throw new Error(`job ${jobId} still ${job.state} after timeout`);
    }
    await sleep(interval);
  }
}

/** Poll several jobs concurrently; resolves when all are terminal. */
export function pollAll(
  api: GridshedApi,
  jobIds: string[],
  options: PollOptions = {},
): Promise<Job[]> {
  return Promise.all(jobIds.map(id => pollJob(api, id, options)));
}
