// JSON contracts of the gridshed HTTP service. Field names mirror the
// server payloads exactly; the console never recomputes any of them.

export interface CaseSummary {
  case_id: string;
  buses: number;
  lines: number;
  generators: number;
  loads: number;
  shunts: number;
  total_p_mw: number;
  total_q_mvar: number;
}

export interface CaseDetail extends CaseSummary {
  document: string;
}

export interface CaseBus {
  id: number;
  kind: 'slack' | 'pv' | 'pq';
  [key: string]: unknown;
}

export interface CaseLine {
  id: number;
  from: number;
  to: number;
  rating_mva: number;
  in_service?: boolean;
}

export interface CaseLoad {
  id: number;
  bus: number;
  p_mw: number;
  q_mvar: number;
  importance?: number;
}

/** The parsed form of CaseDetail.document. */
export interface CaseDocument {
  base_mva: number;
  buses: CaseBus[];
  lines: CaseLine[];
  loads: CaseLoad[];
  meta?: {
    coordinates?: Record<string, [number, number]>;
    [key: string]: unknown;
  };
}

export interface SafetyPayload {
  safe: boolean;
  converged: boolean;
  worst_line_loading: number;
  v_extremes: [number, number] | null;
  line_violations: Array<[number, number]>;
  voltage_violations: Array<[number, number]>;
  line_loading_pct: Array<[number, number]>;
  bus_voltage: Array<[number, number]>;
  iterations: number;
}

export interface AnalyzeResponse {
  case_id: string;
  outage: number[];
  islanded_loads: number[];
  safety: SafetyPayload;
}

export type JobState = 'queued' | 'running' | 'done' | 'failed';

export interface Job {
  job_id: string;
  kind: string;
  case_id: string;
  state: JobState;
  progress: number;
  error: string | null;
  run_id: string | null;
}

export interface FitnessPayload {
  scalar: number;
  safe: boolean;
  remaining_mw: number;
  remaining_mvar: number;
}

export interface GAResultPayload {
  best: number[];
  fitness: FitnessPayload;
  feasible: boolean;
  shed_mw: number;
  shed_mvar: number;
  shed_loads: Array<[number, number]>;
  history: Array<[number, number, number]>;
  generations_run: number;
  evaluations: number;
  stage: number | null;
  pinned: Array<[number, number]>;
  stage_trace?: GAResultPayload[];
}

export interface ClassificationPayload {
  label: string;
  out_lines: number[];
  kind: 'no_instability' | 'solution_found' | 'infeasible';
  forced_out_loads: number[];
  result: GAResultPayload | null;
  base_safety: SafetyPayload | null;
  residual: SafetyPayload | null;
}

export interface RunRecord {
  run_id: string;
  kind: string;
  config: Record<string, unknown> & {
    seed?: number;
    mode?: string;
    importance?: Record<string, number>;
    outage?: number[];
  };
  payload: ClassificationPayload;
  created_at: string | null;
  runtime: Record<string, unknown> | null;
}

export interface RunIndexEntry {
  run_id: string;
  kind: string;
  created_at: string;
}

export interface OptimizeRequest {
  outage: number[];
  mode: 'binary' | 'partial' | 'multistep';
  seed: number;
  population_size?: number;
  max_iterations?: number;
  saturate?: number | null;
  thresholds?: number[];
  importance?: Record<number, number>;
}
