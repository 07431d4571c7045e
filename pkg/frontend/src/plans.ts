// Candidate plans as the operator compares them. A PlanView is a
// read-only projection of a stored run record: every number comes from
// the server payload verbatim and stays traceable to the run id.

import type { CaseDocument, GAResultPayload, RunRecord } from './types';

export interface ShedAssignment {
  loadId: number;
  /** Fraction of the load still served, on the gene lattice. */
  fraction: number;
  importance: number;
}

export interface PlanView {
  runId: string;
  seed: number;
  mode: string;
  label: string;
  kind: string;
  feasible: boolean;
  stage: number | null;
  shedMw: number;
  shedMvar: number;
  assignments: ShedAssignment[];
  /** Highest importance among loads the plan touches; 0 if none. */
  maxImportanceShed: number;
  /** [generation, best remaining MW] pairs for charting. */
  convergence: Array<[number, number]>;
}

function importanceOf(doc: CaseDocument | undefined, loadId: number): number {
  const load = doc?.loads.find(l => l.id === loadId);
  return load?.importance ?? 1;
}

export function planFromRun(
  record: RunRecord,
  doc?: CaseDocument,
): PlanView {
  const result = record.payload.result;
  if (!result) {
    // a no-instability classification: nothing was shed
    return {
      runId: record.run_id,
      seed: Number(record.config.seed ?? 0),
      mode: String(record.config.mode ?? ''),
      label: record.payload.label,
      kind: record.payload.kind,
      feasible: true,
      stage: null,
      shedMw: 0,
      shedMvar: 0,
      assignments: [],
      maxImportanceShed: 0,
      convergence: [],
    };
  }
  const overrides = record.config.importance ?? {};
  const assignments: ShedAssignment[] = result.shed_loads.map(
    ([loadId, fraction]) => ({
      loadId,
      fraction,
      importance:
        overrides[String(loadId)] ?? importanceOf(doc, loadId),
    }),
  );
  return {
    runId: record.run_id,
    seed: Number(record.config.seed ?? 0),
    mode: String(record.config.mode ?? ''),
    label: record.payload.label,
    kind: record.payload.kind,
    feasible: result.feasible,
    stage: result.stage,
    shedMw: result.shed_mw,
    shedMvar: result.shed_mvar,
    assignments,
    maxImportanceShed: assignments.reduce(
      (acc, a) => Math.max(acc, a.importance),
      0,
    ),
    convergence: result.history.map(([gen, , mw]) => [gen, mw]),
  };
}

export type SortKey = 'shed' | 'importance' | 'stage';

/** Stable sort for the comparison table; ties keep insertion order. */
export function sortPlans(plans: PlanView[], key: SortKey): PlanView[] {
  const ranked = plans.map((plan, index) => ({ plan, index }));
  const value = (p: PlanView): number => {
    switch (key) {
      case 'shed':
        return p.shedMw;
      case 'importance':
        return p.maxImportanceShed;
      case 'stage':
        // feasible early stages first; infeasible plans sink to the end
        return p.feasible ? (p.stage ?? 0) : Number.POSITIVE_INFINITY;
    }
  };
  ranked.sort(
    (a, b) => value(a.plan) - value(b.plan) || a.index - b.index,
  );
  return ranked.map(r => r.plan);
}

export function formatAssignment(a: ShedAssignment): string {
  const pct = Math.round(a.fraction * 100);
  return `load ${a.loadId} @ ${pct}% (imp ${a.importance.toFixed(2)})`;
}

/** Convergence series from a result payload, one per stage if staged. */
export function convergenceSeries(
  result: GAResultPayload,
  name: string,
): Map<string, Array<[number, number]>> {
  const series = new Map<string, Array<[number, number]>>();
  if (result.stage_trace && result.stage_trace.length > 0) {
    for (const stageResult of result.stage_trace) {
      series.set(
        `${name} stage ${stageResult.stage}`,
        stageResult.history.map(([gen, , mw]) => [gen, mw]),
      );
    }
  } else {
    series.set(name, result.history.map(([gen, , mw]) => [gen, mw]));
  }
  return series;
}
