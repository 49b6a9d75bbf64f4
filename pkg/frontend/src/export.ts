import type { DomainLabelRecord } from "./types.js";

/** Canonical ordering used by the server export: (segment_id, annotator). */
export function sortLabels(labels: DomainLabelRecord[]): DomainLabelRecord[] {
  return [...labels].sort((a, b) => {
    if (a.segment_id !== b.segment_id) {
      return a.segment_id < b.segment_id ? -1 : 1;
    }
    if (a.annotator !== b.annotator) {
      return a.annotator < b.annotator ? -1 : 1;
    }
    return 0;
  });
}

/** CSV in the same shape the server's /export?format=csv produces, so a
 * local download is interchangeable with a server export. */
export function labelsToCsv(labels: DomainLabelRecord[]): string {
  const lines = ["segment_id,label,annotator,hazard_tag"];
  for (const l of sortLabels(labels)) {
    lines.push(`${l.segment_id},${l.label},${l.annotator},${l.hazard_tag ?? ""}`);
  }
  return lines.join("\n") + "\n";
}

export function parseCsv(text: string): DomainLabelRecord[] {
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  const header = lines.shift();
  if (header !== "segment_id,label,annotator,hazard_tag") {
    throw new Error(`unexpected CSV header: ${header}`);
  }
  return lines.map((line) => {
    const [segment_id, label, annotator, hazard_tag] = line.split(",");
    const record: DomainLabelRecord = {
      segment_id,
      label: label as DomainLabelRecord["label"],
      annotator,
    };
    if (hazard_tag) {
      record.hazard_tag = hazard_tag;
    }
    return record;
  });
}
