import { AnnotationClient } from "./api.js";
import { labelsToCsv, parseCsv } from "./export.js";
import { LabelingQueue } from "./labeling.js";
import { mqmPreviewScore, validateError, validDaScore } from "./mqm.js";
import type { MqmError, Severity, Taxonomy } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function setText(id: string, text: string): void {
  el(id).textContent = text;
}

async function setupLabelingView(client: AnnotationClient, taxonomy: Taxonomy) {
  const annotator = el<HTMLInputElement>("annotator");
  let queue: LabelingQueue | null = null;

  const render = () => {
    const item = queue?.current() ?? null;
    if (item === null) {
      setText("segment-src", "queue empty");
      setText("segment-tgt", "");
      setText("segment-meta", "");
      return;
    }
    setText("segment-src", item.src);
    setText("segment-tgt", item.tgt);
    setText("segment-meta",
            `${item.segment_id} (partition ${item.partition}, ` +
            `${queue?.remaining() ?? 0} left)`);
  };

  const hazardList = el<HTMLOListElement>("hazard-list");
  taxonomy.hazard_clusters.forEach((name, i) => {
    const li = document.createElement("li");
    li.textContent = `[${i + 1}] ${name}`;
    hazardList.appendChild(li);
  });

  el<HTMLButtonElement>("start").addEventListener("click", async () => {
    queue = new LabelingQueue(client, annotator.value, {
      onItem: render,
      onError: (msg) => setText("status", msg),
    });
    await queue.load();
    const progress = await client.progress();
    setText("status",
            `${progress.labeled}/${progress.total_items} segments labeled`);
  });

  document.addEventListener("keydown", async (ev) => {
    if (queue === null || ev.target === annotator) {
      return;
    }
    const handled = await queue.handleKey(ev.key, taxonomy.hazard_clusters);
    if (handled) {
      setText("hazard-current", queue.hazard() ?? "none");
      ev.preventDefault();
    }
  });

  el<HTMLButtonElement>("download-csv").addEventListener("click", async () => {
    const jsonl = await client.exportLabels("jsonl");
    const labels = jsonl
      .split("\n")
      .filter((l) => l.trim().length > 0)
      .map((l) => JSON.parse(l));
    const blob = new Blob([labelsToCsv(labels)], { type: "text/csv" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "labels.csv";
    a.click();
  });

  el<HTMLInputElement>("import-csv").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) {
      return;
    }
    const labels = parseCsv(await file.text());
    let submitted = 0;
    for (const l of labels) {
      try {
        await client.submitLabel(l.segment_id, l.label, l.annotator, l.hazard_tag);
        submitted += 1;
      } catch {
        // duplicates from a previous session are fine
      }
    }
    setText("status", `imported ${submitted}/${labels.length} labels`);
  });
}

function setupEvaluationView(client: AnnotationClient, taxonomy: Taxonomy) {
  const errors: MqmError[] = [];
  const categorySelect = el<HTMLSelectElement>("mqm-category");
  const subtypeSelect = el<HTMLSelectElement>("mqm-subtype");
  const severitySelect = el<HTMLSelectElement>("mqm-severity");

  for (const category of Object.keys(taxonomy.mqm).sort()) {
    categorySelect.add(new Option(category));
  }
  for (const severity of Object.keys(taxonomy.severities)) {
    severitySelect.add(new Option(severity));
  }

  const refreshSubtypes = () => {
    subtypeSelect.innerHTML = "";
    const subtypes = taxonomy.mqm[categorySelect.value] ?? [];
    subtypeSelect.add(new Option("(none)", ""));
    for (const s of subtypes) {
      subtypeSelect.add(new Option(s));
    }
    subtypeSelect.disabled = subtypes.length === 0;
  };
  categorySelect.addEventListener("change", refreshSubtypes);
  refreshSubtypes();

  const renderPreview = () => {
    setText("mqm-preview", `MQM preview: ${mqmPreviewScore(errors)}`);
    setText("mqm-errors", errors
      .map((e) => `${e.category}${e.subtype ? "/" + e.subtype : ""} (${e.severity})`)
      .join("; "));
  };

  el<HTMLButtonElement>("mqm-add").addEventListener("click", () => {
    const error: MqmError = {
      category: categorySelect.value,
      subtype: subtypeSelect.value || null,
      severity: severitySelect.value as Severity,
    };
    const problem = validateError(error, taxonomy);
    if (problem !== null) {
      setText("eval-status", problem);
      return;
    }
    errors.push(error);
    renderPreview();
  });

  el<HTMLButtonElement>("eval-submit").addEventListener("click", async () => {
    const da = Number(el<HTMLInputElement>("da-score").value);
    if (!validDaScore(da)) {
      setText("eval-status", "DA score must be between 0 and 100");
      return;
    }
    const serverScore = await client.submitEvaluation({
      segment_id: el<HTMLInputElement>("eval-segment").value,
      system: el<HTMLInputElement>("eval-system").value,
      annotator: el<HTMLInputElement>("eval-annotator").value,
      da_score: da,
      errors,
    });
    const preview = mqmPreviewScore(errors);
    setText("eval-status",
            serverScore === preview
              ? `submitted (MQM ${serverScore})`
              : `submitted, but server scored ${serverScore} vs preview ${preview}`);
    errors.length = 0;
    renderPreview();
  });

  renderPreview();
}

export async function startApp(client?: AnnotationClient): Promise<void> {
  const api = client ?? new AnnotationClient("");
  const taxonomy = await api.taxonomy();
  await setupLabelingView(api, taxonomy);
  setupEvaluationView(api, taxonomy);
}

declare global {
  interface Window {
    crisismineStart?: typeof startApp;
  }
}

if (typeof window !== "undefined") {
  window.crisismineStart = startApp;
  if (document.readyState !== "loading") {
    void startApp();
  } else {
    document.addEventListener("DOMContentLoaded", () => void startApp());
  }
}
