import { AnnotationClient, ConflictError } from "./api.js";
import type { AnnotationItem, DomainLabelValue } from "./types.js";

export interface QueueEvents {
  onItem?: (item: AnnotationItem | null) => void;
  onError?: (message: string) => void;
}

/** Keyboard shortcuts for the labeling view: i/o decide the label,
 * digits 1-8 pick the hazard cluster for an in-domain label. */
export const KEY_BINDINGS: Record<string, DomainLabelValue> = {
  i: "in_domain",
  o: "out_of_domain",
};

export function hazardForDigit(
  key: string,
  clusters: string[],
): string | undefined {
  const n = Number.parseInt(key, 10);
  if (Number.isInteger(n) && n >= 1 && n <= clusters.length) {
    return clusters[n - 1];
  }
  return undefined;
}

/** Client-side labeling queue: holds the remaining items for one
 * annotator and advances on successful submission. A 409 from a
 * concurrent session is treated as already-done and skipped. */
export class LabelingQueue {
  private queue: AnnotationItem[] = [];
  private pendingHazard: string | undefined;

  constructor(
    private client: AnnotationClient,
    private annotator: string,
    private events: QueueEvents = {},
  ) {}

  async load(): Promise<void> {
    this.queue = await this.client.items(this.annotator);
    this.events.onItem?.(this.current());
  }

  current(): AnnotationItem | null {
    return this.queue.length > 0 ? this.queue[0] : null;
  }

  remaining(): number {
    return this.queue.length;
  }

  setHazard(tag: string | undefined): void {
    this.pendingHazard = tag;
  }

  hazard(): string | undefined {
    return this.pendingHazard;
  }

  async submit(label: DomainLabelValue): Promise<boolean> {
    const item = this.current();
    if (item === null) {
      return false;
    }
    const hazard = label === "in_domain" ? this.pendingHazard : undefined;
    try {
      await this.client.submitLabel(item.segment_id, label, this.annotator, hazard);
    } catch (err) {
      if (err instanceof ConflictError) {
        this.advance();
        return false;
      }
      this.events.onError?.(err instanceof Error ? err.message : String(err));
      return false;
    }
    this.advance();
    return true;
  }

  /** Route a keypress; returns true when the key was handled. */
  async handleKey(key: string, clusters: string[]): Promise<boolean> {
    const hazard = hazardForDigit(key, clusters);
    if (hazard !== undefined) {
      this.setHazard(hazard);
      return true;
    }
    const label = KEY_BINDINGS[key];
    if (label !== undefined) {
      await this.submit(label);
      return true;
    }
    return false;
  }

  private advance(): void {
    this.queue.shift();
    this.pendingHazard = undefined;
    this.events.onItem?.(this.current());
  }
}
