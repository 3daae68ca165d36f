import type { SessionEntry, VerifyReport, VerifyRequest } from "./types.js";

export const HISTORY_CAP = 50;
export const STORAGE_KEY = "faithctl-playground-history";

export interface EntryStore {
  load(): SessionEntry[];
  save(entries: SessionEntry[]): void;
}

/** localStorage-backed store; quota or parse problems degrade to empty. */
export class LocalEntryStore implements EntryStore {
  constructor(
    private readonly storage: Storage,
    private readonly key: string = STORAGE_KEY,
  ) {}

  load(): SessionEntry[] {
    try {
      const raw = this.storage.getItem(this.key);
      if (!raw) return [];
      const parsed = JSON.parse(raw);
      return Array.isArray(parsed) ? (parsed as SessionEntry[]) : [];
    } catch {
      return [];
    }
  }

  save(entries: SessionEntry[]): void {
    try {
      this.storage.setItem(this.key, JSON.stringify(entries));
    } catch {
      // history persistence is best-effort
    }
  }
}

export class MemoryEntryStore implements EntryStore {
  private entries: SessionEntry[] = [];
  load(): SessionEntry[] {
    return [...this.entries];
  }
  save(entries: SessionEntry[]): void {
    this.entries = [...entries];
  }
}

/** Copies the server's report into a history entry, field for field. */
export function buildEntry(
  request: VerifyRequest,
  report: VerifyReport,
  now: Date = new Date(),
): SessionEntry {
  return {
    id: `${now.getTime()}-${Math.random().toString(36).slice(2, 8)}`,
    requestedTag: request.tag,
    context: request.context,
    knowledge: request.knowledge,
    response: report.response,
    breakdown: report.breakdown,
    measuredTag: report.measured_tag,
    deviation: report.deviation,
    timestamp: now.toISOString(),
  };
}

export class SessionHistory {
  entries: SessionEntry[];
  private selected: string[] = [];

  constructor(
    private readonly store: EntryStore,
    private readonly cap: number = HISTORY_CAP,
  ) {
    this.entries = store.load().slice(0, cap);
  }

  add(entry: SessionEntry): void {
    this.entries = [entry, ...this.entries].slice(0, this.cap);
    this.store.save(this.entries);
  }

  canCompare(): boolean {
    return this.entries.length >= 2;
  }

  isSelected(id: string): boolean {
    return this.selected.includes(id);
  }

  /** Toggle selection for compare; at most two stay selected (oldest drops). */
  toggleSelect(id: string): void {
    if (this.selected.includes(id)) {
      this.selected = this.selected.filter((s) => s !== id);
      return;
    }
    this.selected = [...this.selected, id].slice(-2);
  }

  clearSelection(): void {
    this.selected = [];
  }

  selectedPair(): [SessionEntry, SessionEntry] | null {
    if (this.selected.length !== 2) return null;
    const byId = new Map(this.entries.map((e) => [e.id, e]));
    const first = byId.get(this.selected[0]);
    const second = byId.get(this.selected[1]);
    return first && second ? [first, second] : null;
  }
}
