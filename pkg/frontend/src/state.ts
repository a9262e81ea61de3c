/**
 * Client-side view state: one session snapshot plus local edits.
 *
 * The server is the source of truth. Edits the analyst has typed but not
 * submitted live in `pendingEdits`; a revision conflict never discards
 * them — it raises a banner and forces a re-fetch first.
 */

import {
  ApiRequestError,
  SessionSnapshot,
  SessionState,
  WorkshopClient,
} from './api.js';

export type Role = 'facilitator' | 'analyst';

export interface PendingEdits {
  votes: Record<string, 0 | 1>;
  weights: Record<string, number>;
  cells: Record<string, Record<string, number | null>>;
}

export interface ConflictBanner {
  code: string;
  message: string;
  /** field-level messages keyed by offending entity, from 422 details */
  fieldErrors: Record<string, string>;
}

export const POLL_INTERVAL_MS = 2000;

const ACTIVE_STATES: SessionState[] = ['voting', 'weighting', 'scoring'];

export function emptyEdits(): PendingEdits {
  return { votes: {}, weights: {}, cells: {} };
}

export class ViewState {
  snapshot: SessionSnapshot | null = null;
  etag: string | null = null;
  pendingEdits: PendingEdits = emptyEdits();
  conflict: ConflictBanner | null = null;

  constructor(
    public readonly client: WorkshopClient,
    public readonly sessionId: string,
    public readonly role: Role,
    public readonly analystId: string | null,
  ) {}

  get revision(): number {
    return this.snapshot?.revision ?? 0;
  }

  get state(): SessionState | null {
    return this.snapshot?.session.state ?? null;
  }

  /** Poll only while analysts can still act; computed/closed screens are static. */
  get shouldPoll(): boolean {
    return this.state !== null && ACTIVE_STATES.includes(this.state);
  }

  async refresh(): Promise<void> {
    const r = await this.client.getSession(this.sessionId, this.etag ?? undefined);
    if (!r.notModified) {
      this.snapshot = r.snapshot;
      this.etag = r.etag;
    }
  }

  /**
   * Run one submission, translating failures into the banner contract:
   * 409 re-fetches and keeps pending edits, 422 maps details onto fields.
   */
  async submit(action: (revision: number) => Promise<{ revision: number }>): Promise<boolean> {
    try {
      await action(this.revision);
    } catch (err) {
      if (err instanceof ApiRequestError && err.status === 409) {
        const edits = this.pendingEdits;
        await this.refresh();
        this.pendingEdits = edits; // conflict must never discard local work
        this.conflict = {
          code: err.problem.code,
          message: 'Someone changed the session — review and resubmit.',
          fieldErrors: {},
        };
        return false;
      }
      if (err instanceof ApiRequestError && err.status === 422) {
        const fieldErrors: Record<string, string> = {};
        for (const d of err.problem.details as { entity_id?: string; message: string }[]) {
          if (d.entity_id) fieldErrors[d.entity_id] = d.message;
        }
        this.conflict = { code: err.problem.code, message: err.problem.message, fieldErrors };
        return false;
      }
      throw err;
    }
    this.conflict = null;
    this.pendingEdits = emptyEdits();
    await this.refresh();
    return true;
  }

  dismissConflict(): void {
    this.conflict = null;
  }
}

/** Per-analyst submission progress for the facilitator's dashboard. */
export function submissionProgress(
  snapshot: SessionSnapshot,
): { analystId: string; ballot: boolean; sheet: boolean; matrix: boolean }[] {
  const rounds = snapshot.session.rounds;
  const current = rounds.length > 0 ? rounds[rounds.length - 1] : null;
  return snapshot.session.analysts.map((a) => ({
    analystId: a.id,
    ballot: current?.ballots.some((b) => b.analyst_id === a.id) ?? false,
    sheet: current?.sheets.some((s) => s.analyst_id === a.id) ?? false,
    matrix: current?.matrices.some((m) => m.analyst_id === a.id) ?? false,
  }));
}
