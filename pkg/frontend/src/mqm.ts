import type { MqmError, Severity, Taxonomy } from "./types.js";

export const SEVERITY_WEIGHTS: Record<Severity, number> = {
  trivial: 0,
  minor: 1,
  major: 5,
  critical: 25,
};

/** Local preview of the server-side weighted MQM score: the negated sum
 * of severity weights, 0 for an error-free segment. */
export function mqmPreviewScore(errors: MqmError[]): number {
  let total = 0;
  for (const e of errors) {
    total += SEVERITY_WEIGHTS[e.severity];
  }
  return total === 0 ? 0 : -total; // avoid the -0 artifact
}

/** Validate an error against the taxonomy the server advertises; mirrors
 * the server's 422 rules so bad picks are rejected before submission. */
export function validateError(error: MqmError, taxonomy: Taxonomy): string | null {
  const subtypes = taxonomy.mqm[error.category];
  if (subtypes === undefined) {
    return `unknown MQM category ${error.category}`;
  }
  if (error.subtype) {
    if (!subtypes.includes(error.subtype)) {
      return `subtype ${error.subtype} not valid for ${error.category}`;
    }
  } else if (subtypes.length > 0) {
    return `category ${error.category} requires a subtype`;
  }
  if (!(error.severity in taxonomy.severities)) {
    return `unknown severity ${error.severity}`;
  }
  return null;
}

export function validDaScore(value: number): boolean {
  return Number.isFinite(value) && value >= 0 && value <= 100;
}
