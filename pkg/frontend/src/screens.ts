/**
 * Screen models for the analyst input steps.
 *
 * Pure data shaping for the DOM layer: bounded 0-5 selectors with the
 * scale-table semantics inline, and an explicit blank-vs-zero
 * distinction in the matrix grid ("not scored" is not "no contribution").
 */

export const SCORE_MIN = 0;
export const SCORE_MAX = 5;

export const CRITERION_SCALE_LABELS: readonly string[] = [
  'Not relevant at all (to the given problem)',
  'Marginally relevant',
  'Somewhat relevant',
  'Moderately relevant',
  'Very relevant',
  'Most relevant',
];

export const SOURCE_SCALE_LABELS: readonly string[] = [
  'Does not favorably contribute to the criterion at all',
  'Marginal favorable contribution',
  'Somewhat favorable contribution',
  'Moderately favorable contribution',
  'Favorable contribution',
  'Most favorable contribution',
];

/** The values a selector can offer; entering anything else is impossible. */
export function selectorOptions(): number[] {
  const out: number[] = [];
  for (let v = SCORE_MIN; v <= SCORE_MAX; v++) out.push(v);
  return out;
}

export function isValidScore(value: number): boolean {
  return Number.isInteger(value) && value >= SCORE_MIN && value <= SCORE_MAX;
}

export function scaleLabel(kind: 'criterion' | 'source', score: number): string {
  if (!isValidScore(score)) throw new RangeError(`score ${score} outside 0-${SCORE_MAX}`);
  return kind === 'criterion' ? CRITERION_SCALE_LABELS[score] : SOURCE_SCALE_LABELS[score];
}

export interface BallotRow {
  criterionId: string;
  name: string;
  vote: 0 | 1;
}

export function ballotScreen(
  criteria: { id: string; name?: string }[],
  pendingVotes: Record<string, 0 | 1>,
): BallotRow[] {
  return criteria.map((c) => ({
    criterionId: c.id,
    name: c.name ?? c.id,
    vote: pendingVotes[c.id] ?? 0,
  }));
}

export interface WeightRow {
  criterionId: string;
  name: string;
  score: number;
  label: string;
}

export function weightScreen(
  criteria: { id: string; name?: string }[],
  pendingWeights: Record<string, number>,
): WeightRow[] {
  return criteria.map((c) => {
    const score = pendingWeights[c.id] ?? 0;
    return {
      criterionId: c.id,
      name: c.name ?? c.id,
      score,
      label: scaleLabel('criterion', score),
    };
  });
}

export type CellValue = number | null;

export interface MatrixCell {
  sourceId: string;
  criterionId: string;
  value: CellValue;
  /** blank and zero mean different things and must read differently */
  description: string;
  fieldError: string | null;
}

export function describeCell(value: CellValue): string {
  if (value === null) return 'not scored';
  if (value === 0) return 'no contribution';
  return scaleLabel('source', value);
}

export function matrixScreen(
  sources: { id: string }[],
  criteria: { id: string }[],
  pendingCells: Record<string, Record<string, CellValue>>,
  fieldErrors: Record<string, string> = {},
): MatrixCell[][] {
  return sources.map((d) =>
    criteria.map((c) => {
      const value = pendingCells[d.id]?.[c.id] ?? null;
      return {
        sourceId: d.id,
        criterionId: c.id,
        value,
        description: describeCell(value),
        fieldError: fieldErrors[d.id] ?? fieldErrors[c.id] ?? null,
      };
    }),
  );
}

/** Cells the analyst left blank, listed so the submit button can warn. */
export function blankCells(grid: MatrixCell[][]): { sourceId: string; criterionId: string }[] {
  const out: { sourceId: string; criterionId: string }[] = [];
  for (const row of grid) {
    for (const cell of row) {
      if (cell.value === null) out.push({ sourceId: cell.sourceId, criterionId: cell.criterionId });
    }
  }
  return out;
}
