/**
 * Browser entry point: wires the screen models to the DOM and keeps the
 * displayed step in lock-step with the server state via ETag polling.
 */

import { WorkshopClient, SessionState } from './api.js';
import { POLL_INTERVAL_MS, Role, ViewState, submissionProgress } from './state.js';
import {
  ballotScreen,
  blankCells,
  matrixScreen,
  selectorOptions,
  scaleLabel,
  weightScreen,
} from './screens.js';
import { buildChartModel, convergenceLine, regionFor, ChartModel } from './charts.js';

const app = document.getElementById('app') as HTMLElement;

interface Login {
  sessionId: string;
  token: string;
  role: Role;
  analystId: string | null;
}

function readLogin(): Login | null {
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get('session');
  const token = params.get('token');
  if (!sessionId || !token) return null;
  const analystId = params.get('analyst');
  return { sessionId, token, role: analystId ? 'analyst' : 'facilitator', analystId };
}

function el(tag: string, className: string, text = ''): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text) node.textContent = text;
  return node;
}

function renderConflict(view: ViewState, into: HTMLElement): void {
  if (!view.conflict) return;
  const banner = el('div', 'banner conflict', view.conflict.message);
  const dismiss = el('button', 'dismiss', 'Dismiss');
  dismiss.addEventListener('click', () => {
    view.dismissConflict();
    render(view);
  });
  banner.appendChild(dismiss);
  into.appendChild(banner);
}

function scoreSelect(current: number | null, allowBlank: boolean): HTMLSelectElement {
  const select = document.createElement('select');
  if (allowBlank) {
    const opt = document.createElement('option');
    opt.value = '';
    opt.textContent = '— not scored —';
    select.appendChild(opt);
  }
  for (const v of selectorOptions()) {
    const opt = document.createElement('option');
    opt.value = String(v);
    opt.textContent = String(v);
    select.appendChild(opt);
  }
  select.value = current === null ? '' : String(current);
  return select;
}

function renderBallot(view: ViewState, into: HTMLElement): void {
  const criteria = view.snapshot!.session.criteria;
  const table = el('table', 'ballot');
  for (const row of ballotScreen(criteria, view.pendingEdits.votes)) {
    const tr = el('tr', '');
    tr.appendChild(el('td', 'name', row.name));
    const toggle = document.createElement('input');
    toggle.type = 'checkbox';
    toggle.checked = row.vote === 1;
    toggle.addEventListener('change', () => {
      view.pendingEdits.votes[row.criterionId] = toggle.checked ? 1 : 0;
    });
    const td = el('td', 'vote');
    td.appendChild(toggle);
    tr.appendChild(td);
    table.appendChild(tr);
  }
  into.appendChild(table);
  const submit = el('button', 'submit', 'Submit votes');
  submit.addEventListener('click', async () => {
    const votes: Record<string, 0 | 1> = {};
    for (const c of criteria) votes[c.id] = view.pendingEdits.votes[c.id] ?? 0;
    await view.submit((rev) =>
      view.client.submitBallot(view.sessionId, currentRound(view), rev, view.analystId!, votes),
    );
    render(view);
  });
  into.appendChild(submit);
}

function renderWeights(view: ViewState, into: HTMLElement): void {
  const criteria = view.snapshot!.session.criteria;
  const table = el('table', 'weights');
  for (const row of weightScreen(criteria, view.pendingEdits.weights)) {
    const tr = el('tr', '');
    tr.appendChild(el('td', 'name', row.name));
    const select = scoreSelect(row.score, false);
    select.title = scaleLabel('criterion', row.score);
    select.addEventListener('change', () => {
      view.pendingEdits.weights[row.criterionId] = Number(select.value);
      select.title = scaleLabel('criterion', Number(select.value));
    });
    const td = el('td', 'score');
    td.appendChild(select);
    tr.appendChild(td);
    tr.appendChild(el('td', 'hint', row.label));
    table.appendChild(tr);
  }
  into.appendChild(table);
  const submit = el('button', 'submit', 'Submit weights');
  submit.addEventListener('click', async () => {
    const scores: Record<string, number> = {};
    for (const c of criteria) scores[c.id] = view.pendingEdits.weights[c.id] ?? 0;
    await view.submit((rev) =>
      view.client.submitSheet(view.sessionId, currentRound(view), rev, view.analystId!, scores),
    );
    render(view);
  });
  into.appendChild(submit);
}

function renderMatrix(view: ViewState, into: HTMLElement): void {
  const session = view.snapshot!.session;
  const rounds = session.rounds;
  const shortlist = rounds[rounds.length - 1].shortlist;
  const criteria = session.criteria.filter((c) => shortlist.includes(c.id));
  const fieldErrors = view.conflict?.fieldErrors ?? {};
  const grid = matrixScreen(session.sources, criteria, view.pendingEdits.cells, fieldErrors);

  const table = el('table', 'matrix');
  const head = el('tr', '');
  head.appendChild(el('th', '', 'source'));
  for (const c of criteria) head.appendChild(el('th', '', c.name ?? c.id));
  table.appendChild(head);
  for (const row of grid) {
    const tr = el('tr', '');
    tr.appendChild(el('td', 'name', row[0].sourceId));
    for (const cell of row) {
      const td = el('td', cell.fieldError ? 'cell error' : 'cell');
      const select = scoreSelect(cell.value, true);
      select.title = cell.description;
      select.addEventListener('change', () => {
        const cells = view.pendingEdits.cells;
        cells[cell.sourceId] = cells[cell.sourceId] ?? {};
        cells[cell.sourceId][cell.criterionId] =
          select.value === '' ? null : Number(select.value);
      });
      td.appendChild(select);
      if (cell.fieldError) td.appendChild(el('div', 'field-error', cell.fieldError));
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  into.appendChild(table);

  const blanks = blankCells(grid);
  if (blanks.length > 0) {
    into.appendChild(
      el('p', 'note', `${blanks.length} cell(s) left blank will be imputed from the panel.`),
    );
  }
  const submit = el('button', 'submit', 'Submit scores');
  submit.addEventListener('click', async () => {
    const cells: Record<string, Record<string, number | null>> = {};
    for (const d of session.sources) {
      cells[d.id] = {};
      for (const c of criteria) {
        cells[d.id][c.id] = view.pendingEdits.cells[d.id]?.[c.id] ?? null;
      }
    }
    await view.submit((rev) =>
      view.client.submitMatrix(view.sessionId, currentRound(view), rev, view.analystId!, cells),
    );
    render(view);
  });
  into.appendChild(submit);
}

function currentRound(view: ViewState): number {
  const rounds = view.snapshot!.session.rounds;
  return rounds.length > 0 ? rounds[rounds.length - 1].index : 0;
}

function svgChart(model: ChartModel, width = 560, height = 240): SVGSVGElement {
  const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
  svg.setAttribute('width', String(width));
  svg.setAttribute('height', String(height));
  const y = (v: number) => height - v * height;

  for (const region of model.regions) {
    const rect = document.createElementNS(svg.namespaceURI, 'rect');
    rect.setAttribute('x', '0');
    rect.setAttribute('width', String(width));
    rect.setAttribute('y', String(y(region.to)));
    rect.setAttribute('height', String(y(region.from) - y(region.to)));
    rect.setAttribute('fill', region.shade);
    rect.setAttribute('data-band', region.name);
    svg.appendChild(rect);
  }

  const slot = width / model.labels.length;
  model.labels.forEach((_, i) => {
    const x0 = i * slot;
    if (model.mode === 'grouped-bars') {
      const barWidth = slot / (model.bars.length + 2);
      model.bars.forEach((series, j) => {
        const v = series.values[i];
        const rect = document.createElementNS(svg.namespaceURI, 'rect');
        rect.setAttribute('x', String(x0 + (j + 1) * barWidth));
        rect.setAttribute('width', String(barWidth * 0.9));
        rect.setAttribute('y', String(y(v)));
        rect.setAttribute('height', String(height - y(v)));
        rect.setAttribute('fill', `hsl(${(j * 67) % 360} 60% 45%)`);
        svg.appendChild(rect);
      });
    } else {
      const box = model.boxes[i];
      const cx = x0 + slot / 2;
      const rect = document.createElementNS(svg.namespaceURI, 'rect');
      rect.setAttribute('x', String(cx - slot * 0.2));
      rect.setAttribute('width', String(slot * 0.4));
      rect.setAttribute('y', String(y(box.q3)));
      rect.setAttribute('height', String(y(box.q1) - y(box.q3)));
      rect.setAttribute('fill', '#7da7d9');
      svg.appendChild(rect);
      for (const v of [box.min, box.median, box.max]) {
        const line = document.createElementNS(svg.namespaceURI, 'line');
        line.setAttribute('x1', String(cx - slot * 0.2));
        line.setAttribute('x2', String(cx + slot * 0.2));
        line.setAttribute('y1', String(y(v)));
        line.setAttribute('y2', String(y(v)));
        line.setAttribute('stroke', '#233');
        svg.appendChild(line);
      }
    }
    // group marker
    const marker = document.createElementNS(svg.namespaceURI, 'circle');
    marker.setAttribute('cx', String(x0 + slot / 2));
    marker.setAttribute('cy', String(y(model.group[i])));
    marker.setAttribute('r', '4');
    marker.setAttribute('fill', '#111');
    svg.appendChild(marker);
  });
  return svg;
}

async function renderDashboard(view: ViewState, into: HTMLElement): Promise<void> {
  const session = view.snapshot!.session;

  const progress = el('table', 'progress');
  for (const row of submissionProgress(view.snapshot!)) {
    const tr = el('tr', '');
    tr.appendChild(el('td', 'name', row.analystId));
    tr.appendChild(el('td', '', row.ballot ? 'ballot ✓' : 'ballot —'));
    tr.appendChild(el('td', '', row.sheet ? 'weights ✓' : 'weights —'));
    tr.appendChild(el('td', '', row.matrix ? 'matrix ✓' : 'matrix —'));
    progress.appendChild(tr);
  }
  into.appendChild(progress);

  const targets: SessionState[] = ['voting', 'weighting', 'scoring', 'computed', 'closed'];
  const controls = el('div', 'advance');
  for (const target of targets) {
    const button = el('button', 'advance', `advance to ${target}`);
    button.addEventListener('click', async () => {
      try {
        await view.client.advance(view.sessionId, target);
      } catch (err) {
        window.alert(String(err));
      }
      await view.refresh();
      render(view);
    });
    controls.appendChild(button);
  }
  into.appendChild(controls);

  if (session.state !== 'computed') return;

  const round = currentRound(view);
  const result = await view.client.getResult(view.sessionId, round);
  const report = await view.client.getDiscrepancies(view.sessionId, round);
  const convergence = await view.client.getConvergence(view.sessionId);

  const ranking = el('div', 'chart ranking');
  ranking.appendChild(el('h3', '', 'Ranking'));
  const labels = Object.keys(result.group_scaled);
  const rankingModel = buildChartModel({
    kind: 'ranking',
    labels,
    series: Object.entries(result.per_analyst).map(([name, scores]) => ({
      name,
      values: labels.map((d) => scores[d]),
    })),
    group: labels.map((d) => result.group_scaled[d]),
    bands: null,
  });
  ranking.appendChild(svgChart(rankingModel));
  into.appendChild(ranking);

  const spreads = el('table', 'spreads');
  for (const [sourceId, entry] of Object.entries(report.per_source_spread)) {
    const tr = el('tr', `band-${regionFor(entry.spread).name}`);
    tr.appendChild(el('td', 'name', sourceId));
    tr.appendChild(el('td', '', entry.spread.toFixed(3)));
    tr.appendChild(el('td', '', entry.class));
    tr.addEventListener('click', async () => {
      // clicking a row opens the per-criterion drill-down charts
      const detail = el('div', 'chart drilldown');
      for (const c of session.rounds[session.rounds.length - 1].shortlist) {
        const payload = await view.client.getDrilldown(view.sessionId, round, c);
        detail.appendChild(el('h4', '', `criterion ${c}`));
        detail.appendChild(svgChart(buildChartModel(payload)));
      }
      into.appendChild(detail);
    });
    spreads.appendChild(tr);
  }
  into.appendChild(spreads);

  const line = el('div', 'chart convergence');
  line.appendChild(el('h3', '', 'Convergence'));
  for (const point of convergenceLine(convergence)) {
    line.appendChild(el('div', 'point', `round ${point.round}: ${point.distance.toFixed(4)}`));
  }
  into.appendChild(line);
}

function render(view: ViewState): void {
  app.replaceChildren();
  if (!view.snapshot) {
    app.appendChild(el('p', 'loading', 'Loading session…'));
    return;
  }
  const header = el('div', 'header', `Session ${view.sessionId} — step: ${view.state}`);
  app.appendChild(header);
  renderConflict(view, app);

  const body = el('div', 'body');
  app.appendChild(body);
  if (view.role === 'facilitator') {
    void renderDashboard(view, body);
    return;
  }
  switch (view.state) {
    case 'voting':
      renderBallot(view, body);
      break;
    case 'weighting':
      renderWeights(view, body);
      break;
    case 'scoring':
      renderMatrix(view, body);
      break;
    default:
      body.appendChild(el('p', 'note', `Waiting for the facilitator (${view.state}).`));
  }
}

async function start(): Promise<void> {
  const login = readLogin();
  if (!login) {
    app.appendChild(
      el('p', 'note', 'Open with ?session=<id>&token=<token>[&analyst=<id>] to join.'),
    );
    return;
  }
  const client = new WorkshopClient('', login.token);
  const view = new ViewState(client, login.sessionId, login.role, login.analystId);
  await view.refresh();
  render(view);
  window.setInterval(async () => {
    if (!view.shouldPoll) return;
    const before = view.revision;
    await view.refresh();
    if (view.revision !== before) render(view);
  }, POLL_INTERVAL_MS);
}

document.addEventListener('DOMContentLoaded', () => void start());
