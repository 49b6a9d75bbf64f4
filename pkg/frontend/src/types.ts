export type DomainLabelValue = "in_domain" | "out_of_domain";

export interface AnnotationItem {
  segment_id: string;
  partition: number;
  src: string;
  tgt: string;
}

export interface DomainLabelRecord {
  segment_id: string;
  label: DomainLabelValue;
  annotator: string;
  hazard_tag?: string;
  timestamp?: string;
}

export interface Progress {
  total_items: number;
  labeled: number;
  per_annotator: Record<string, number>;
}

export type Severity = "trivial" | "minor" | "major" | "critical";

export interface MqmError {
  category: string;
  subtype: string | null;
  severity: Severity;
  span?: [number, number] | null;
}

export interface Taxonomy {
  mqm: Record<string, string[]>;
  severities: Record<Severity, number>;
  hazard_clusters: string[];
}

export interface EvaluationSubmission {
  segment_id: string;
  system: string;
  annotator: string;
  da_score: number;
  errors: MqmError[];
}
