/**
 * Typed client for the workshop HTTP service.
 *
 * The client performs no aggregation math: every number the UI shows is
 * read verbatim from server responses. Writes carry an If-Match revision
 * header; reads are ETag-conditional so the 2 s poll loop is cheap.
 */

export interface ProblemStatement {
  current_situation: string;
  desired_situation: string;
  gap_quantification: string;
  candidate_solutions: string[];
  trigger?: string;
}

export interface MethodConfig {
  normalization?: 'sum' | 'max';
  vote_threshold_policy?: 'strict-majority' | 'at-least' | 'accept-all';
  at_least_t?: number;
  scale_final?: boolean;
}

export interface CatalogItem {
  id: string;
  name?: string;
  category?: string;
  description?: string;
}

export type SessionState =
  | 'drafting'
  | 'voting'
  | 'weighting'
  | 'scoring'
  | 'computed'
  | 'closed';

export interface SessionSnapshot {
  revision: number;
  session: {
    state: SessionState;
    analysts: { id: string; display_name: string }[];
    criteria: CatalogItem[];
    sources: CatalogItem[];
    rounds: {
      index: number;
      shortlist: string[];
      ballots: { analyst_id: string }[];
      sheets: { analyst_id: string }[];
      matrices: { analyst_id: string }[];
      result: RankingResultWire | null;
    }[];
    [key: string]: unknown;
  };
}

export interface RankingResultWire {
  per_analyst: Record<string, Record<string, number>>;
  group: Record<string, number>;
  group_scaled: Record<string, number>;
  degenerate: boolean;
  config: Record<string, unknown>;
  [key: string]: unknown;
}

export interface ChartSeriesWire {
  kind: string;
  labels: (string | number)[];
  series: { name: string; values: number[] }[];
  group: number[];
  bands: { low_cut: number; high_cut: number } | null;
}

export interface DiscrepancyReportWire {
  pairwise_distances: Record<string, number>;
  per_source_spread: Record<string, { spread: number; class: string }>;
  [key: string]: unknown;
}

export interface ApiProblem {
  code: string;
  message: string;
  details: unknown[];
}

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly problem: ApiProblem,
  ) {
    super(`${status}: ${problem.code}: ${problem.message}`);
  }
}

/** Matrix cells on the wire: source -> criterion -> score, null = not scored. */
export type MatrixCellsWire = Record<string, Record<string, number | null>>;

interface RawResponse {
  status: number;
  etag: string | null;
  body: unknown;
}

export class WorkshopClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token?: string,
  ) {}

  /** Same endpoint, different bearer token (e.g. switch to an analyst). */
  withToken(token: string): WorkshopClient {
    return new WorkshopClient(this.baseUrl, token);
  }

  private async request(
    method: string,
    path: string,
    opts: { body?: unknown; ifMatch?: number; ifNoneMatch?: string } = {},
  ): Promise<RawResponse> {
    const headers: Record<string, string> = {};
    if (this.token !== undefined) headers['Authorization'] = `Bearer ${this.token}`;
    if (opts.ifMatch !== undefined) headers['If-Match'] = String(opts.ifMatch);
    if (opts.ifNoneMatch !== undefined) headers['If-None-Match'] = opts.ifNoneMatch;
    if (opts.body !== undefined) headers['Content-Type'] = 'application/json';

    const response = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: opts.body !== undefined ? JSON.stringify(opts.body) : undefined,
    });
    const etag = response.headers.get('etag');
    if (response.status === 304) return { status: 304, etag, body: null };
    const body = await response.json();
    if (response.status >= 400) {
      throw new ApiRequestError(response.status, body as ApiProblem);
    }
    return { status: response.status, etag, body };
  }

  async createSession(
    problem: ProblemStatement,
    config: MethodConfig = {},
  ): Promise<{ session_id: string; revision: number; facilitator_token: string }> {
    const r = await this.request('POST', '/sessions', { body: { problem, config } });
    return r.body as { session_id: string; revision: number; facilitator_token: string };
  }

  async getSession(
    sessionId: string,
    etag?: string,
  ): Promise<{ notModified: boolean; etag: string | null; snapshot: SessionSnapshot | null }> {
    const r = await this.request('GET', `/sessions/${sessionId}`, { ifNoneMatch: etag });
    if (r.status === 304) return { notModified: true, etag: r.etag, snapshot: null };
    return { notModified: false, etag: r.etag, snapshot: r.body as SessionSnapshot };
  }

  async registerAnalyst(
    sessionId: string,
    revision: number,
    analyst: { id: string; display_name?: string; role_label?: string },
  ): Promise<{ revision: number; analyst_id: string; analyst_token: string }> {
    const r = await this.request('POST', `/sessions/${sessionId}/analysts`, {
      body: analyst,
      ifMatch: revision,
    });
    return r.body as { revision: number; analyst_id: string; analyst_token: string };
  }

  async putCriteria(
    sessionId: string,
    revision: number,
    items: CatalogItem[],
  ): Promise<{ revision: number }> {
    const r = await this.request('PUT', `/sessions/${sessionId}/criteria`, {
      body: items,
      ifMatch: revision,
    });
    return r.body as { revision: number };
  }

  async putSources(
    sessionId: string,
    revision: number,
    items: CatalogItem[],
  ): Promise<{ revision: number }> {
    const r = await this.request('PUT', `/sessions/${sessionId}/sources`, {
      body: items,
      ifMatch: revision,
    });
    return r.body as { revision: number };
  }

  async submitBallot(
    sessionId: string,
    roundIndex: number,
    revision: number,
    analystId: string,
    votes: Record<string, 0 | 1>,
  ): Promise<{ revision: number; changed: boolean }> {
    const r = await this.request('POST', `/sessions/${sessionId}/rounds/${roundIndex}/ballots`, {
      body: { analyst_id: analystId, votes },
      ifMatch: revision,
    });
    return r.body as { revision: number; changed: boolean };
  }

  async submitSheet(
    sessionId: string,
    roundIndex: number,
    revision: number,
    analystId: string,
    scores: Record<string, number>,
  ): Promise<{ revision: number; changed: boolean }> {
    const r = await this.request('POST', `/sessions/${sessionId}/rounds/${roundIndex}/sheets`, {
      body: { analyst_id: analystId, scores },
      ifMatch: revision,
    });
    return r.body as { revision: number; changed: boolean };
  }

  async submitMatrix(
    sessionId: string,
    roundIndex: number,
    revision: number,
    analystId: string,
    cells: MatrixCellsWire,
  ): Promise<{ revision: number; changed: boolean }> {
    const r = await this.request('POST', `/sessions/${sessionId}/rounds/${roundIndex}/matrices`, {
      body: { analyst_id: analystId, cells },
      ifMatch: revision,
    });
    return r.body as { revision: number; changed: boolean };
  }

  async advance(
    sessionId: string,
    target: SessionState,
  ): Promise<{ revision: number; state: SessionState; result?: RankingResultWire }> {
    const r = await this.request('POST', `/sessions/${sessionId}/advance`, {
      body: { target },
    });
    return r.body as { revision: number; state: SessionState; result?: RankingResultWire };
  }

  async getResult(sessionId: string, roundIndex: number): Promise<RankingResultWire> {
    const r = await this.request('GET', `/sessions/${sessionId}/rounds/${roundIndex}/result`);
    return r.body as RankingResultWire;
  }

  async getDiscrepancies(sessionId: string, roundIndex: number): Promise<DiscrepancyReportWire> {
    const r = await this.request(
      'GET',
      `/sessions/${sessionId}/rounds/${roundIndex}/discrepancies`,
    );
    return r.body as DiscrepancyReportWire;
  }

  async getDrilldown(
    sessionId: string,
    roundIndex: number,
    criterion: string,
  ): Promise<ChartSeriesWire> {
    const r = await this.request(
      'GET',
      `/sessions/${sessionId}/rounds/${roundIndex}/drilldown?criterion=${encodeURIComponent(criterion)}`,
    );
    return r.body as ChartSeriesWire;
  }

  async getConvergence(sessionId: string): Promise<ChartSeriesWire> {
    const r = await this.request('GET', `/sessions/${sessionId}/convergence`);
    return r.body as ChartSeriesWire;
  }
}
