// Console wiring: one mutable state record, pure render functions over it,
// and a handful of async actions that talk to the service. Every displayed
// number comes from a server payload; the console never optimizes locally.

import { ApiError, GridshedApi } from './api';
import { renderChart, renderLegend, seriesColor, type Series } from './chart';
import { createImportanceEditor } from './importance';
import { pollJob } from './jobs';
import { layoutPositions, type Point } from './layout';
import { renderNetwork } from './network';
import {
  convergenceSeries,
  formatAssignment,
  planFromRun,
  sortPlans,
  type PlanView,
  type SortKey,
} from './plans';
import {
  emptyDraft,
  validateDraft,
  optimizeRequest,
  type ScenarioDraft,
} from './scenario';
import type {
  AnalyzeResponse,
  CaseDocument,
  CaseSummary,
  Job,
  RunRecord,
} from './types';

export interface AppState {
  caseId: string | null;
  summary: CaseSummary | null;
  doc: CaseDocument | null;
  positions: Map<number, Point> | null;
  draft: ScenarioDraft;
  analysis: AnalyzeResponse | null;
  jobs: Map<string, Job>;
  plans: PlanView[];
  records: Map<string, RunRecord>;
  view: 'before' | 'after';
  selectedRun: string | null;
  sortKey: SortKey;
}

export interface AppOptions {
  pollIntervalMs?: number;
}

export interface AppHandles {
  state: AppState;
  actions: {
    uploadCase(documentJson: string): Promise<void>;
    analyze(): Promise<void>;
    launch(): Promise<void>;
    resume(): Promise<void>;
    setView(view: 'before' | 'after'): void;
    selectPlan(runId: string): void;
    sortBy(key: SortKey): void;
  };
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  html = '',
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (html) node.innerHTML = html;
  return node;
}

function escapeHtml(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

function parseIdList(text: string): number[] {
  return text
    .split(/[\s,]+/)
    .filter(part => part.length > 0)
    .map(Number)
    .filter(Number.isFinite);
}

function parseFloatList(text: string): number[] {
  return parseIdList(text);
}

function shortId(id: string): string {
  return id.slice(0, 8);
}

export function initApp(
  root: HTMLElement,
  api: GridshedApi,
  options: AppOptions = {},
): AppHandles {
  const pollIntervalMs = options.pollIntervalMs ?? 500;

  const state: AppState = {
    caseId: null,
    summary: null,
    doc: null,
    positions: null,
    draft: emptyDraft(''),
    analysis: null,
    jobs: new Map(),
    plans: [],
    records: new Map(),
    view: 'before',
    selectedRun: null,
    sortKey: 'shed',
  };

  root.innerHTML = '';
  const errorBar = el('div', { id: 'error-bar', class: 'error-bar hidden' });

  const caseInput = el('textarea', {
    id: 'case-input',
    rows: '6',
    placeholder: 'paste a case document (JSON)',
  });
  const uploadBtn = el('button', { id: 'upload-btn', type: 'button' }, 'upload case');
  const caseSummary = el('div', { id: 'case-summary', class: 'case-summary' });

  const outageInput = el('input', { id: 'outage-input', type: 'text', placeholder: 'line ids, e.g. 77' });
  const intactCheck = el('input', { id: 'intact-check', type: 'checkbox' });
  const modeSelect = el(
    'select',
    { id: 'mode-select' },
    '<option value="binary">binary</option>' +
      '<option value="partial" selected>partial</option>' +
      '<option value="multistep">multistep</option>',
  );
  const seedsInput = el('input', { id: 'seeds-input', type: 'text', value: '0, 1, 2' });
  const saturateInput = el('input', { id: 'saturate-input', type: 'number', value: '25' });
  const thresholdsInput = el('input', { id: 'thresholds-input', type: 'text', value: '0.8' });
  const thresholdsRow = el('label', { id: 'thresholds-row', class: 'field hidden' }, 'stage thresholds ');
  thresholdsRow.appendChild(thresholdsInput);
  const importanceHost = el('div', { id: 'importance-editor' });
  const draftErrors = el('ul', { id: 'draft-errors', class: 'draft-errors' });
  const analyzeBtn = el('button', { id: 'analyze-btn', type: 'button' }, 'analyze outage');
  const launchBtn = el('button', { id: 'launch-btn', type: 'button' }, 'launch runs');

  const beforeBtn = el('button', { id: 'view-before', type: 'button', class: 'active' }, 'before');
  const afterBtn = el('button', { id: 'view-after', type: 'button' }, 'after');
  const planSelect = el('select', { id: 'plan-select', class: 'hidden' });
  const networkView = el('div', { id: 'network-view', class: 'network-view' });
  const analysisSummary = el('div', { id: 'analysis-summary' });

  const jobList = el('div', { id: 'job-list' });

  const sortSelect = el(
    'select',
    { id: 'sort-select' },
    '<option value="shed" selected>total shed</option>' +
      '<option value="importance">max importance shed</option>' +
      '<option value="stage">feasibility stage</option>',
  );
  const planTable = el('div', { id: 'plan-table' });
  const planDetail = el('div', { id: 'plan-detail' });
  const chartHost = el('div', { id: 'chart' });
  const legendHost = el('div', { id: 'legend' });

  const scenarioFields = el('div', { class: 'fields' });
  const fieldRows: Array<[string, HTMLElement]> = [
    ['outage lines ', outageInput],
    ['intact ', intactCheck],
    ['mode ', modeSelect],
    ['seeds ', seedsInput],
    ['saturate ', saturateInput],
  ];
  for (const [label, input] of fieldRows) {
    const row = el('label', { class: 'field' }, label);
    row.appendChild(input);
    scenarioFields.appendChild(row);
  }
  scenarioFields.appendChild(thresholdsRow);

  const sections: Array<[string, string, HTMLElement[]]> = [
    ['case-panel', 'case', [caseInput, uploadBtn, caseSummary]],
    [
      'scenario-panel',
      'scenario',
      [scenarioFields, importanceHost, draftErrors, analyzeBtn, launchBtn],
    ],
    [
      'network-panel',
      'network',
      [beforeBtn, afterBtn, planSelect, analysisSummary, networkView],
    ],
    ['jobs-panel', 'jobs', [jobList]],
    ['plans-panel', 'plans', [sortSelect, planTable, planDetail, chartHost, legendHost]],
  ];
  root.appendChild(errorBar);
  for (const [id, title, children] of sections) {
    const section = el('section', { id, class: 'panel' });
    section.appendChild(el('h2', {}, title));
    for (const child of children) section.appendChild(child);
    root.appendChild(section);
  }

  function showError(message: string): void {
    errorBar.textContent = message;
    errorBar.classList.remove('hidden');
  }

  function clearError(): void {
    errorBar.textContent = '';
    errorBar.classList.add('hidden');
  }

  function surface(err: unknown): void {
    if (err instanceof ApiError) {
      showError(`server error ${err.status}: ${err.message}`);
    } else {
      showError(String(err));
    }
  }

  function syncDraftFromInputs(): void {
    state.draft.outage = parseIdList(outageInput.value);
    state.draft.intact = intactCheck.checked;
    state.draft.mode = modeSelect.value as ScenarioDraft['mode'];
    state.draft.seeds = parseIdList(seedsInput.value);
    state.draft.saturate =
      saturateInput.value === '' ? null : Number(saturateInput.value);
    state.draft.thresholds = parseFloatList(thresholdsInput.value);
    thresholdsRow.classList.toggle('hidden', state.draft.mode !== 'multistep');
  }

  function renderDraftErrors(problems: Array<{ field: string; message: string }>): void {
    draftErrors.innerHTML = problems
      .map(
        p =>
          `<li class="draft-error" data-field="${p.field}">${escapeHtml(p.message)}</li>`,
      )
      .join('');
  }

  function renderCaseSummary(): void {
    const s = state.summary;
    if (!s) {
      caseSummary.textContent = '';
      return;
    }
    caseSummary.innerHTML =
      `<span class="case-id" data-case="${s.case_id}">${shortId(s.case_id)}</span> · ` +
      `${s.buses} buses, ${s.lines} lines, ${s.loads} loads · ` +
      `${s.total_p_mw} MW, ${s.total_q_mvar} MVAr`;
  }

  function renderAnalysis(): void {
    const a = state.analysis;
    if (!a) {
      analysisSummary.textContent = '';
      return;
    }
    const s = a.safety;
    const verdict = s.safe
      ? '<span class="safe">safe</span>'
      : '<span class="unsafe">unsafe</span>';
    const islanded = a.islanded_loads.length
      ? ` · islanded loads: ${a.islanded_loads.join(', ')}`
      : '';
    analysisSummary.innerHTML =
      `outage [${a.outage.join(', ')}] → ${verdict} · ` +
      `worst line ${s.worst_line_loading.toFixed(1)}%${islanded}`;
  }

  function renderNetworkPanel(): void {
    beforeBtn.classList.toggle('active', state.view === 'before');
    afterBtn.classList.toggle('active', state.view === 'after');
    planSelect.classList.toggle('hidden', state.view !== 'after');
    if (!state.doc || !state.positions) {
      networkView.innerHTML = '';
      return;
    }
    if (state.view === 'before') {
      networkView.innerHTML = renderNetwork({
        doc: state.doc,
        positions: state.positions,
        safety: state.analysis?.safety ?? null,
        outage: state.analysis?.outage ?? state.draft.outage,
        islandedLoads: state.analysis?.islanded_loads ?? [],
        fractions: new Map(),
      });
      return;
    }
    const plan =
      state.plans.find(p => p.runId === state.selectedRun) ?? state.plans[0];
    if (!plan) {
      networkView.innerHTML = '<p class="placeholder">no plans yet</p>';
      return;
    }
    const record = state.records.get(plan.runId)!;
    networkView.innerHTML = renderNetwork({
      doc: state.doc,
      positions: state.positions,
      safety: record.payload.residual,
      outage: (record.config.outage as number[] | undefined) ?? state.draft.outage,
      islandedLoads: record.payload.forced_out_loads,
      fractions: new Map(plan.assignments.map(a => [a.loadId, a.fraction])),
    });
  }

  function renderJobs(): void {
    const rows = [...state.jobs.values()].map(job => {
      const pct = Math.round(job.progress * 100);
      const error = job.error ? ` · ${escapeHtml(job.error)}` : '';
      return (
        `<div class="job" data-job="${job.job_id}" data-state="${job.state}">` +
        `<span class="job-id">${shortId(job.job_id)}</span> ` +
        `<span class="job-kind">${job.kind}</span> ` +
        `<span class="job-state">${job.state}</span>` +
        `<span class="progress"><span class="bar" style="width:${pct}%"></span></span>` +
        `<span class="job-pct">${pct}%</span>${error}</div>`
      );
    });
    jobList.innerHTML = rows.join('');
  }

  function renderPlanSelect(): void {
    planSelect.innerHTML = state.plans
      .map(
        p =>
          `<option value="${p.runId}"${p.runId === state.selectedRun ? ' selected' : ''}>` +
          `seed ${p.seed} · ${shortId(p.runId)}</option>`,
      )
      .join('');
  }

  function renderPlans(): void {
    renderPlanSelect();
    if (state.plans.length === 0) {
      planTable.innerHTML = '';
      planDetail.innerHTML = '';
      chartHost.innerHTML = '';
      legendHost.innerHTML = '';
      return;
    }
    const sorted = sortPlans(state.plans, state.sortKey);
    const header =
      '<tr><th>run</th><th>seed</th><th>mode</th><th>outcome</th>' +
      '<th>stage</th><th>shed MW</th><th>max imp shed</th><th>assignments</th></tr>';
    const body = sorted
      .map(p => {
        const assignments = p.assignments.map(formatAssignment).join('; ') || 'none';
        const outcome = p.feasible ? p.kind : `${p.kind} (infeasible)`;
        return (
          `<tr class="plan-row" data-run="${p.runId}">` +
          `<td class="run-id">${shortId(p.runId)}</td>` +
          `<td>${p.seed}</td><td>${p.mode}</td><td>${outcome}</td>` +
          `<td>${p.stage ?? ''}</td>` +
          `<td class="shed-mw">${p.shedMw}</td>` +
          `<td class="max-imp">${p.maxImportanceShed.toFixed(2)}</td>` +
          `<td class="assignments">${escapeHtml(assignments)}</td></tr>`
        );
      })
      .join('');
    planTable.innerHTML = `<table class="plan-table">${header}${body}</table>`;

    if (state.plans.length === 1) {
      const p = state.plans[0];
      const lines = p.assignments.map(
        a => `<li>${escapeHtml(formatAssignment(a))}</li>`,
      );
      planDetail.innerHTML =
        `<h3>plan ${shortId(p.runId)}</h3>` +
        `<p>${p.mode} · ${p.feasible ? 'feasible' : 'infeasible'} · ` +
        `${p.shedMw} MW shed</p><ul>${lines.join('')}</ul>`;
    } else {
      planDetail.innerHTML = '';
    }

    const series: Series[] = [];
    state.plans.forEach((plan, i) => {
      const record = state.records.get(plan.runId);
      const result = record?.payload.result;
      if (!result) return;
      for (const [name, points] of convergenceSeries(result, `seed ${plan.seed}`)) {
        series.push({ name, color: seriesColor(i), points });
      }
    });
    chartHost.innerHTML = renderChart(series);
    legendHost.innerHTML = renderLegend(series);
  }

  function renderImportance(): void {
    if (!state.doc) return;
    createImportanceEditor(
      importanceHost,
      state.doc.loads,
      state.draft.importanceEdits,
      (loadId, value) => {
        state.draft.importanceEdits.set(loadId, value);
      },
    );
  }

  async function addPlan(runId: string): Promise<void> {
    if (state.records.has(runId)) return; // relaunches dedupe by run id
    const record = await api.getRun(runId);
    state.records.set(runId, record);
    state.plans.push(planFromRun(record, state.doc ?? undefined));
    if (state.selectedRun === null) state.selectedRun = runId;
    renderPlans();
    if (state.view === 'after') renderNetworkPanel();
  }

  function track(jobId: string): Promise<void> {
    return pollJob(api, jobId, {
      intervalMs: pollIntervalMs,
      onUpdate: job => {
        state.jobs.set(job.job_id, job);
        renderJobs();
      },
    })
      .then(job => {
        state.jobs.set(job.job_id, job);
        renderJobs();
        if (job.state === 'done' && job.run_id) return addPlan(job.run_id);
        if (job.state === 'failed') showError(`job ${shortId(jobId)} failed: ${job.error}`);
        return undefined;
      })
      .catch(surface);
  }

  const actions = {
    async uploadCase(documentJson: string): Promise<void> {
      clearError();
      try {
        const summary = await api.uploadCase(documentJson);
        const detail = await api.getCase(summary.case_id);
        state.summary = summary;
        state.caseId = summary.case_id;
        state.doc = JSON.parse(detail.document) as CaseDocument;
        state.positions = layoutPositions(state.doc);
        state.draft = emptyDraft(summary.case_id);
        state.analysis = null;
        renderCaseSummary();
        renderImportance();
        renderDraftErrors([]);
        renderAnalysis();
        renderNetworkPanel();
      } catch (err) {
        surface(err);
      }
    },

    async analyze(): Promise<void> {
      clearError();
      if (!state.caseId) {
        showError('upload a case first');
        return;
      }
      syncDraftFromInputs();
      try {
        state.analysis = await api.analyze(state.caseId, state.draft.outage);
        state.view = 'before';
        renderAnalysis();
        renderNetworkPanel();
      } catch (err) {
        surface(err);
      }
    },

    async launch(): Promise<void> {
      clearError();
      syncDraftFromInputs();
      const problems = validateDraft(state.draft, state.doc ?? undefined);
      renderDraftErrors(problems);
      if (problems.length > 0) return; // invalid drafts never reach the server
      const caseId = state.draft.caseId;
      const waits: Array<Promise<void>> = [];
      for (const seed of state.draft.seeds) {
        const body = optimizeRequest(state.draft, seed);
        try {
          const { job_id } = await api.optimize(caseId, body);
          waits.push(track(job_id));
        } catch (err) {
          if (err instanceof ApiError && err.conflictJobId) {
            waits.push(track(err.conflictJobId));
          } else {
            surface(err);
          }
        }
      }
      await Promise.all(waits);
    },

    async resume(): Promise<void> {
      try {
        const { jobs } = await api.listJobs();
        const waits: Array<Promise<void>> = [];
        for (const job of jobs) {
          state.jobs.set(job.job_id, job);
          if (job.state === 'queued' || job.state === 'running') {
            waits.push(track(job.job_id));
          } else if (job.state === 'done' && job.run_id) {
            waits.push(addPlan(job.run_id).catch(surface));
          }
        }
        renderJobs();
        await Promise.all(waits);
      } catch (err) {
        surface(err);
      }
    },

    setView(view: 'before' | 'after'): void {
      state.view = view;
      renderNetworkPanel();
    },

    selectPlan(runId: string): void {
      state.selectedRun = runId;
      renderPlanSelect();
      renderNetworkPanel();
    },

    sortBy(key: SortKey): void {
      state.sortKey = key;
      renderPlans();
    },
  };

  uploadBtn.addEventListener('click', () => {
    void actions.uploadCase(caseInput.value);
  });
  analyzeBtn.addEventListener('click', () => {
    void actions.analyze();
  });
  launchBtn.addEventListener('click', () => {
    void actions.launch();
  });
  beforeBtn.addEventListener('click', () => actions.setView('before'));
  afterBtn.addEventListener('click', () => actions.setView('after'));
  planSelect.addEventListener('change', () => actions.selectPlan(planSelect.value));
  sortSelect.addEventListener('change', () =>
    actions.sortBy(sortSelect.value as SortKey),
  );
  modeSelect.addEventListener('change', syncDraftFromInputs);

  return { state, actions };
}
