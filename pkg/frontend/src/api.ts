import type {
  AnnotationItem,
  DomainLabelRecord,
  DomainLabelValue,
  EvaluationSubmission,
  MqmError,
  Progress,
  Taxonomy,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ConflictError extends Error {
  existing: DomainLabelRecord;

  constructor(existing: DomainLabelRecord) {
    super(`segment ${existing.segment_id} already labeled by ${existing.annotator}`);
    this.existing = existing;
  }
}

export class ApiError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

/** Thin typed client over the annotation HTTP API. The fetch function is
 * injectable so tests can run against an in-memory server. */
export class AnnotationClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (resp.status === 409) {
      const body = await resp.json();
      throw new ConflictError(body.detail.existing as DomainLabelRecord);
    }
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return resp;
  }

  async items(annotator: string): Promise<AnnotationItem[]> {
    const resp = await this.request(
      `/items?annotator=${encodeURIComponent(annotator)}`,
    );
    return resp.json();
  }

  async submitLabel(
    segmentId: string,
    label: DomainLabelValue,
    annotator: string,
    hazardTag?: string,
  ): Promise<void> {
    await this.request("/labels", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        segment_id: segmentId,
        label,
        annotator,
        hazard_tag: hazardTag ?? null,
      }),
    });
  }

  async progress(): Promise<Progress> {
    const resp = await this.request("/progress");
    return resp.json();
  }

  async exportLabels(format: "jsonl" | "csv"): Promise<string> {
    const resp = await this.request(`/export?format=${format}`);
    return resp.text();
  }

  async taxonomy(): Promise<Taxonomy> {
    const resp = await this.request("/taxonomy");
    return resp.json();
  }

  async scoreMqm(errors: MqmError[]): Promise<number> {
    const resp = await this.request("/mqm/score", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ errors }),
    });
    const body = await resp.json();
    return body.score as number;
  }

  async submitEvaluation(sub: EvaluationSubmission): Promise<number> {
    const resp = await this.request("/evaluations", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(sub),
    });
    const body = await resp.json();
    return body.mqm_weighted as number;
  }
}
