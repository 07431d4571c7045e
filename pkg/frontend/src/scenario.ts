// Scenario drafts: what the operator is about to launch. Validation
// happens here, before any request leaves the browser.

import type { CaseDocument, OptimizeRequest } from './types';

export type Mode = 'binary' | 'partial' | 'multistep';

export interface ScenarioDraft {
  caseId: string;
  /** Line ids to take out; must be non-empty unless `intact` is set. */
  outage: number[];
  intact: boolean;
  mode: Mode;
  /** Importance overrides by load id, each in [0, 1]. */
  importanceEdits: Map<number, number>;
  /** One optimize job is launched per seed. */
  seeds: number[];
  saturate: number | null;
  thresholds: number[];
}

export function emptyDraft(caseId: string): ScenarioDraft {
  return {
    caseId,
    outage: [],
    intact: false,
    mode: 'partial',
    importanceEdits: new Map(),
    seeds: [0, 1, 2],
    saturate: 25,
    thresholds: [0.8],
  };
}

export interface DraftProblem {
  field: string;
  message: string;
}

/** Every reason the draft cannot be launched, with the field at fault. */
export function validateDraft(
  draft: ScenarioDraft,
  doc?: CaseDocument,
): DraftProblem[] {
  const problems: DraftProblem[] = [];
  if (!draft.caseId) {
    problems.push({ field: 'case', message: 'no case selected' });
  }
  if (draft.outage.length === 0 && !draft.intact) {
    problems.push({
      field: 'outage',
      message: 'select at least one outage line or mark the scenario intact',
    });
  }
  if (draft.outage.length > 0 && draft.intact) {
    problems.push({
      field: 'outage',
      message: 'an intact scenario cannot also list outage lines',
    });
  }
  if (doc) {
    const known = new Set(doc.lines.map(line => line.id));
    for (const id of draft.outage) {
      if (!known.has(id)) {
        problems.push({ field: 'outage', message: `unknown line id ${id}` });
      }
    }
    const loads = new Set(doc.loads.map(load => load.id));
    for (const id of draft.importanceEdits.keys()) {
      if (!loads.has(id)) {
        problems.push({
          field: 'importance',
          message: `unknown load id ${id}`,
        });
      }
    }
  }
  for (const [id, value] of draft.importanceEdits) {
    if (!Number.isFinite(value) || value < 0 || value > 1) {
      problems.push({
        field: 'importance',
        message: `importance for load ${id} must be in [0, 1], got ${value}`,
      });
    }
  }
  if (draft.seeds.length === 0) {
    problems.push({ field: 'seeds', message: 'at least one seed required' });
  }
  if (new Set(draft.seeds).size !== draft.seeds.length) {
    problems.push({ field: 'seeds', message: 'seeds must be distinct' });
  }
  if (draft.mode === 'multistep' && draft.thresholds.length === 0) {
    problems.push({
      field: 'thresholds',
      message: 'multistep needs at least one importance threshold',
    });
  }
  return problems;
}

/** The request body for one seed of a valid draft. */
export function optimizeRequest(
  draft: ScenarioDraft,
  seed: number,
): OptimizeRequest {
  const req: OptimizeRequest = {
    outage: [...draft.outage].sort((a, b) => a - b),
    mode: draft.mode,
    seed,
    saturate: draft.saturate,
  };
  if (draft.mode === 'multistep') {
    req.thresholds = [...draft.thresholds];
  }
  if (draft.importanceEdits.size > 0) {
    const importance: Record<number, number> = {};
    for (const [id, value] of draft.importanceEdits) {
      importance[id] = value;
    }
    req.importance = importance;
  }
  return req;
}

/**
 * Deterministic uniform generator (mulberry32); good enough for
 * synthetic importance sampling and reproducible layouts.
 */
export function seededRandom(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Draw beta(5, 1) importances: the skewed-toward-critical shape used
 * for synthetic studies. Inverse-CDF: F(x) = x^5, so x = u^(1/5).
 */
export function sampleBetaImportance(
  nLoads: number,
  seed = 1,
): Map<number, number> {
  const rand = seededRandom(seed);
  const edits = new Map<number, number>();
  for (let id = 0; id < nLoads; id++) {
    edits.set(id, Math.pow(rand(), 1 / 5));
  }
  return edits;
}
