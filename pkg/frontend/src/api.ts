// Thin typed client over the service HTTP endpoints. Every method maps
// to exactly one request; errors carry the HTTP status and the server's
// detail so the UI can show them inline.

import type {
  AnalyzeResponse,
  CaseDetail,
  CaseSummary,
  Job,
  OptimizeRequest,
  RunIndexEntry,
  RunRecord,
} from './types';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(typeof detail === 'string' ? detail : JSON.stringify(detail));
    this.name = 'ApiError';
  }

  /** The job id of the identical in-flight submission on a 409. */
  get conflictJobId(): string | null {
    if (this.status !== 409) return null;
    const d = this.detail as { job_id?: string } | null;
    return d && typeof d.job_id === 'string' ? d.job_id : null;
  }
}

async function parseBody(resp: Response): Promise<unknown> {
  const text = await resp.text();
  try {
    return text ? JSON.parse(text) : null;
  } catch {
    return text;
  }
}

export class GridshedApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    rawBody?: string,
  ): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: { 'content-type': 'application/json' },
      body: rawBody ?? (body === undefined ? undefined : JSON.stringify(body)),
    });
    const doc = await parseBody(resp);
    if (!resp.ok) {
      const detail =
        doc && typeof doc === 'object' && 'detail' in doc
          ? (doc as { detail: unknown }).detail
          : doc;
      throw new ApiError(resp.status, detail);
    }
    return doc as T;
  }

  health(): Promise<{ status: string }> {
    return this.request('GET', '/health');
  }

  /** Upload a case document verbatim; the server content-addresses it. */
  uploadCase(documentJson: string): Promise<CaseSummary> {
    return this.request('POST', '/cases', undefined, documentJson);
  }

  getCase(caseId: string): Promise<CaseDetail> {
    return this.request('GET', `/cases/${caseId}`);
  }

  analyze(caseId: string, outage: number[]): Promise<AnalyzeResponse> {
    return this.request('POST', `/cases/${caseId}/analyze`, { outage });
  }

  optimize(caseId: string, req: OptimizeRequest): Promise<{ job_id: string }> {
    return this.request('POST', `/cases/${caseId}/optimize`, req);
  }

  getJob(jobId: string): Promise<Job> {
    return this.request('GET', `/jobs/${jobId}`);
  }

  /** All jobs the server knows about; lets a reloaded page resume polling. */
  listJobs(): Promise<{ jobs: Job[] }> {
    return this.request('GET', '/jobs');
  }

  getRun(runId: string): Promise<RunRecord> {
    return this.request('GET', `/runs/${runId}`);
  }

  listRuns(): Promise<{ runs: RunIndexEntry[] }> {
    return this.request('GET', '/runs');
  }
}
