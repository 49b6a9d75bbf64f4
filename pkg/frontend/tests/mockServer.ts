/** In-memory stand-in for the annotation service, implementing the same
 * HTTP contract (routes, status codes, canonical export order) so the
 * client and UI logic can be tested without a running backend. */

import type {
  AnnotationItem,
  DomainLabelRecord,
  MqmError,
} from "../src/types.js";
import type { FetchLike } from "../src/api.js";

const WEIGHTS: Record<string, number> = {
  trivial: 0,
  minor: 1,
  major: 5,
  critical: 25,
};

const TAXONOMY: Record<string, string[]> = {
  Accuracy: ["Addition", "Mistranslation", "Omission", "Overtranslation", "Undertranslation"],
  AudienceAppropriateness: ["Offensive"],
  LinguisticConventions: ["Grammar", "Punctuation"],
  Style: ["AwkwardStyle", "LanguageRegister"],
  Terminology: ["WrongTerm"],
  Fluency: [],
  LocaleConventions: [],
  Verity: [],
};

const HAZARDS = [
  "Meteorological and Hydrological",
  "Extraterrestrial",
  "Geological",
  "Environmental",
  "Chemical",
  "Biological",
  "Technological",
  "Societal",
];

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function errorFor(e: MqmError): string | null {
  const subtypes = TAXONOMY[e.category];
  if (subtypes === undefined) return `unknown MQM category ${e.category}`;
  if (e.subtype) {
    if (!subtypes.includes(e.subtype)) return `invalid subtype ${e.subtype}`;
  } else if (subtypes.length > 0) {
    return `category ${e.category} requires a subtype`;
  }
  if (!(e.severity in WEIGHTS)) return `unknown severity ${e.severity}`;
  return null;
}

export class MockServer {
  labels = new Map<string, DomainLabelRecord>();
  evaluations: Array<{ da_score: number; errors: MqmError[] }> = [];

  constructor(private items: AnnotationItem[]) {}

  private key(segmentId: string, annotator: string): string {
    return `${segmentId} ${annotator}`;
  }

  sortedLabels(): DomainLabelRecord[] {
    return [...this.labels.values()].sort((a, b) =>
      a.segment_id === b.segment_id
        ? a.annotator.localeCompare(b.annotator)
        : a.segment_id.localeCompare(b.segment_id),
    );
  }

  fetch: FetchLike = async (url, init) => {
    const u = new URL(url, "http://mock");
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : null;

    if (u.pathname === "/items" && method === "GET") {
      const annotator = u.searchParams.get("annotator") ?? "";
      const done = new Set(
        [...this.labels.values()]
          .filter((l) => l.annotator === annotator)
          .map((l) => l.segment_id),
      );
      return json(200, this.items.filter((it) => !done.has(it.segment_id)));
    }

    if (u.pathname === "/labels" && method === "POST") {
      if (!this.items.some((it) => it.segment_id === body.segment_id)) {
        return json(404, { detail: `unknown segment id ${body.segment_id}` });
      }
      if (body.label !== "in_domain" && body.label !== "out_of_domain") {
        return json(422, { detail: `unknown label ${body.label}` });
      }
      if (body.hazard_tag) {
        if (body.label !== "in_domain") {
          return json(422, { detail: "hazard tag only valid for in_domain labels" });
        }
        if (!HAZARDS.includes(body.hazard_tag)) {
          return json(422, { detail: `unknown hazard cluster ${body.hazard_tag}` });
        }
      }
      const key = this.key(body.segment_id, body.annotator);
      const existing = this.labels.get(key);
      if (existing !== undefined) {
        return json(409, { detail: { error: "already labeled", existing } });
      }
      const record: DomainLabelRecord = {
        segment_id: body.segment_id,
        label: body.label,
        annotator: body.annotator,
      };
      if (body.hazard_tag) record.hazard_tag = body.hazard_tag;
      this.labels.set(key, record);
      return json(201, { status: "ok" });
    }

    if (u.pathname === "/progress" && method === "GET") {
      const perAnnotator: Record<string, number> = {};
      const segments = new Set<string>();
      for (const l of this.labels.values()) {
        perAnnotator[l.annotator] = (perAnnotator[l.annotator] ?? 0) + 1;
        segments.add(l.segment_id);
      }
      return json(200, {
        total_items: this.items.length,
        labeled: segments.size,
        per_annotator: perAnnotator,
      });
    }

    if (u.pathname === "/export" && method === "GET") {
      const labels = this.sortedLabels();
      if (u.searchParams.get("format") === "csv") {
        const lines = ["segment_id,label,annotator,hazard_tag"];
        for (const l of labels) {
          lines.push(`${l.segment_id},${l.label},${l.annotator},${l.hazard_tag ?? ""}`);
        }
        return new Response(lines.join("\n") + "\n", { status: 200 });
      }
      const bodyText = labels.map((l) => JSON.stringify(l)).join("\n");
      return new Response(bodyText + (bodyText ? "\n" : ""), { status: 200 });
    }

    if (u.pathname === "/mqm/score" && method === "POST") {
      for (const e of body.errors as MqmError[]) {
        const problem = errorFor(e);
        if (problem !== null) return json(422, { detail: problem });
      }
      const total = (body.errors as MqmError[]).reduce(
        (acc, e) => acc + WEIGHTS[e.severity],
        0,
      );
      return json(200, { score: -total });
    }

    if (u.pathname === "/evaluations" && method === "POST") {
      for (const e of body.errors as MqmError[]) {
        const problem = errorFor(e);
        if (problem !== null) return json(422, { detail: problem });
      }
      if (body.da_score < 0 || body.da_score > 100) {
        return json(422, { detail: "DA score must be in [0, 100]" });
      }
      this.evaluations.push({ da_score: body.da_score, errors: body.errors });
      const total = (body.errors as MqmError[]).reduce(
        (acc, e) => acc + WEIGHTS[e.severity],
        0,
      );
      return json(201, { status: "ok", mqm_weighted: -total });
    }

    if (u.pathname === "/taxonomy" && method === "GET") {
      return json(200, {
        mqm: TAXONOMY,
        severities: WEIGHTS,
        hazard_clusters: HAZARDS,
      });
    }

    return json(404, { detail: `no route ${method} ${u.pathname}` });
  };
}

export function makeItems(n: number): AnnotationItem[] {
  return Array.from({ length: n }, (_, i) => ({
    segment_id: `s${String(i).padStart(4, "0")}`,
    partition: (i % 6) + 1,
    src: `frase ${i}`,
    tgt: `sentence ${i}`,
  }));
}
