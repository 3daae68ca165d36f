import { ApiClient, ApiError } from "./api.js";
import {
  LocalEntryStore,
  SessionHistory,
  buildEntry,
} from "./state.js";
import type { Breakdown, SessionEntry, ServiceInfo } from "./types.js";

interface Elements {
  banner: HTMLElement;
  bannerText: HTMLElement;
  bannerRetry: HTMLButtonElement;
  form: HTMLFormElement;
  knowledge: HTMLTextAreaElement;
  context: HTMLTextAreaElement;
  slider: HTMLInputElement;
  sliderValue: HTMLElement;
  weights: HTMLElement;
  submit: HTMLButtonElement;
  validation: HTMLElement;
  historySection: HTMLElement;
  historyList: HTMLElement;
  compareHint: HTMLElement;
  compareSection: HTMLElement;
  compareLeft: HTMLElement;
  compareRight: HTMLElement;
  compareDelta: HTMLElement;
  compareClose: HTMLButtonElement;
}

function grab(doc: Document): Elements {
  const byId = <T extends HTMLElement>(id: string): T => {
    const node = doc.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  };
  return {
    banner: byId("banner"),
    bannerText: byId("banner-text"),
    bannerRetry: byId<HTMLButtonElement>("banner-retry"),
    form: byId<HTMLFormElement>("control-form"),
    knowledge: byId<HTMLTextAreaElement>("knowledge"),
    context: byId<HTMLTextAreaElement>("context"),
    slider: byId<HTMLInputElement>("tag-slider"),
    sliderValue: byId("tag-value"),
    weights: byId("weights-display"),
    submit: byId<HTMLButtonElement>("submit-btn"),
    validation: byId("validation-msg"),
    historySection: byId("history-section"),
    historyList: byId("history-list"),
    compareHint: byId("compare-hint"),
    compareSection: byId("compare-section"),
    compareLeft: byId("compare-left"),
    compareRight: byId("compare-right"),
    compareDelta: byId("compare-delta"),
    compareClose: byId<HTMLButtonElement>("compare-close"),
  };
}

function percent(value: number | null): string {
  return value === null ? "n/a" : `${Math.round(value * 100)}%`;
}

function scoreBar(doc: Document, label: string, value: number | null): HTMLElement {
  const row = doc.createElement("div");
  row.className = "bar-row";
  const name = doc.createElement("span");
  name.className = "bar-label";
  name.textContent = label;
  const track = doc.createElement("div");
  track.className = "bar-track";
  const fill = doc.createElement("div");
  fill.className = "bar-fill";
  fill.style.width = value === null ? "0%" : `${value * 100}%`;
  track.appendChild(fill);
  const amount = doc.createElement("span");
  amount.className = "bar-value";
  amount.textContent = percent(value);
  row.append(name, track, amount);
  return row;
}

function breakdownBlock(doc: Document, breakdown: Breakdown): HTMLElement {
  const block = doc.createElement("div");
  block.className = "breakdown";
  block.appendChild(scoreBar(doc, "lexical", breakdown.lexical));
  block.appendChild(scoreBar(doc, "semantic", breakdown.semantic));
  block.appendChild(scoreBar(doc, "self-eval", breakdown.self_eval));
  const final = doc.createElement("div");
  final.className = "final-score";
  final.textContent = `final ${breakdown.final.toFixed(3)}`;
  block.appendChild(final);
  return block;
}

function tagBadge(doc: Document, entry: SessionEntry): HTMLElement {
  const badge = doc.createElement("span");
  badge.className = entry.deviation === 0 ? "tag-badge exact" : "tag-badge off";
  badge.textContent = `requested ${entry.requestedTag} / measured ${entry.measuredTag} (deviation ${entry.deviation})`;
  return badge;
}

function entryCard(
  doc: Document,
  entry: SessionEntry,
  history: SessionHistory,
  onSelectionChange: () => void,
): HTMLElement {
  const item = doc.createElement("li");
  item.className = "entry-card";
  item.dataset.entryId = entry.id;

  const header = doc.createElement("div");
  header.className = "entry-header";
  const pick = doc.createElement("input");
  pick.type = "checkbox";
  pick.className = "compare-pick";
  pick.checked = history.isSelected(entry.id);
  pick.addEventListener("change", () => {
    history.toggleSelect(entry.id);
    onSelectionChange();
  });
  const stamp = doc.createElement("span");
  stamp.className = "timestamp";
  stamp.textContent = new Date(entry.timestamp).toLocaleTimeString();
  header.append(pick, tagBadge(doc, entry), stamp);

  const response = doc.createElement("p");
  response.className = "response-text";
  response.textContent = entry.response;

  item.append(header, response, breakdownBlock(doc, entry.breakdown));
  return item;
}

function comparePanel(doc: Document, entry: SessionEntry): HTMLElement {
  const panel = doc.createElement("div");
  const title = doc.createElement("h3");
  title.textContent = `requested ${entry.requestedTag}`;
  const response = doc.createElement("p");
  response.className = "response-text";
  response.textContent = entry.response;
  panel.append(title, tagBadge(doc, entry), response, breakdownBlock(doc, entry.breakdown));
  return panel;
}

export class PlaygroundApp {
  readonly ready: Promise<void>;
  private readonly els: Elements;
  private inFlight = false;
  private info: ServiceInfo | null = null;

  constructor(
    private readonly doc: Document,
    private readonly api: ApiClient,
    readonly history: SessionHistory,
  ) {
    this.els = grab(doc);
    this.wire();
    this.renderHistory();
    this.ready = this.loadConfig();
  }

  private wire(): void {
    this.els.slider.addEventListener("input", () => {
      this.els.sliderValue.textContent = this.els.slider.value;
    });
    this.els.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
    this.els.bannerRetry.addEventListener("click", () => {
      void this.loadConfig();
    });
    this.els.compareClose.addEventListener("click", () => {
      this.history.clearSelection();
      this.renderHistory();
    });
  }

  private async loadConfig(): Promise<void> {
    try {
      this.info = await this.api.config();
    } catch {
      this.info = null;
      this.els.banner.hidden = false;
      this.els.submit.disabled = true;
      return;
    }
    this.els.banner.hidden = true;
    // Slider bounds come from the service, never hardcoded.
    this.els.slider.max = String(this.info.levels);
    if (Number(this.els.slider.value) > this.info.levels) {
      this.els.slider.value = String(this.info.levels);
    }
    this.els.sliderValue.textContent = this.els.slider.value;
    const weights = this.info.weights;
    this.els.weights.textContent =
      `weights: lexical ${weights.lexical.toFixed(2)}, ` +
      `semantic ${weights.semantic.toFixed(2)}, ` +
      `self-eval ${weights.self_eval.toFixed(2)}`;
    this.els.submit.disabled = false;
  }

  async submit(): Promise<void> {
    if (this.inFlight || this.info === null) return;
    const knowledge = this.els.knowledge.value;
    const context = this.els.context.value;
    this.els.validation.textContent = "";
    if (!knowledge.trim()) {
      this.els.validation.textContent = "Knowledge passage must not be empty.";
      return;
    }
    if (!context.trim()) {
      this.els.validation.textContent = "Context must not be empty.";
      return;
    }
    const request = { knowledge, context, tag: Number(this.els.slider.value) };
    this.inFlight = true;
    this.els.submit.disabled = true;
    try {
      const report = await this.api.verify(request);
      this.history.add(buildEntry(request, report));
      this.renderHistory();
    } catch (error) {
      if (error instanceof ApiError) {
        this.els.validation.textContent = `The service rejected the request. ${error.message}`;
      } else {
        this.els.validation.textContent = "Request failed; is the service running?";
      }
    } finally {
      this.inFlight = false;
      this.els.submit.disabled = false;
    }
  }

  renderHistory(): void {
    const pair = this.history.selectedPair();
    if (pair) {
      this.renderCompare(pair[0], pair[1]);
      return;
    }
    this.els.compareSection.hidden = true;
    this.els.historySection.hidden = false;
    this.els.compareHint.hidden = !this.history.canCompare();
    this.els.historyList.textContent = "";
    for (const entry of this.history.entries) {
      this.els.historyList.appendChild(
        entryCard(this.doc, entry, this.history, () => this.renderHistory()),
      );
    }
  }

  private renderCompare(a: SessionEntry, b: SessionEntry): void {
    this.els.historySection.hidden = true;
    this.els.compareSection.hidden = false;
    this.els.compareDelta.textContent = `tag delta ${Math.abs(a.requestedTag - b.requestedTag)}`;
    this.els.compareLeft.textContent = "";
    this.els.compareRight.textContent = "";
    this.els.compareLeft.appendChild(comparePanel(this.doc, a));
    this.els.compareRight.appendChild(comparePanel(this.doc, b));
  }
}

export function initApp(
  doc: Document,
  api: ApiClient = new ApiClient(),
  history?: SessionHistory,
): PlaygroundApp {
  const sessionHistory =
    history ?? new SessionHistory(new LocalEntryStore(doc.defaultView!.localStorage));
  return new PlaygroundApp(doc, api, sessionHistory);
}

declare global {
  interface Window {
    __faithctlPlayground?: PlaygroundApp;
  }
}

if (typeof document !== "undefined" && document.getElementById("control-form")) {
  window.__faithctlPlayground = initApp(document);
}
