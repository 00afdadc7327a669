import { ApiClient, ApiError } from "./api.js";
import { renderFactorForm } from "./form.js";
import { renderError, renderPrediction, renderRetryBanner, renderWhatIf } from "./results.js";
import { ConsoleState, probabilityDelta } from "./state.js";
import type { Prediction } from "./types.js";

/**
 * Wires the state to the service and the DOM. Single user, single page:
 * at most one prediction request is in flight, and a newer submission
 * aborts and supersedes an older one.
 */
export class Console {
  readonly state = new ConsoleState();
  private inflight: AbortController | null = null;
  private submitSeq = 0;

  private readonly formSlot = document.createElement("div");
  private readonly resultSlot = document.createElement("div");
  private readonly errorSlot = document.createElement("div");
  private readonly modelSelect = document.createElement("select");

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    this.root.replaceChildren();
    try {
      this.state.catalog = await this.api.getSchema();
      const models = await this.api.listModels();
      this.renderChrome(models.map((m) => `${m.id}`));
    } catch {
      this.root.replaceChildren(
        renderRetryBanner("Could not reach the prediction service.", () => void this.start()),
      );
      return;
    }
  }

  async selectModel(id: string): Promise<void> {
    this.clearError();
    try {
      this.state.selectModel(await this.api.getModel(id));
    } catch (e) {
      this.state.selectModel(null);
      this.showError(e);
    }
    this.renderForm();
    this.resultSlot.replaceChildren();
  }

  /**
   * POST the current evidence. The first successful answer after a model
   * change becomes the what-if baseline. Returns null when superseded,
   * aborted, or rejected.
   */
  async submit(): Promise<Prediction | null> {
    const model = this.state.model;
    if (!model) {
      return null;
    }
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const seq = ++this.submitSeq;
    try {
      const answer = await this.api.predict(model.id, this.state.body().evidence, controller.signal);
      if (seq !== this.submitSeq) {
        return null;
      }
      this.clearError();
      this.state.latest = answer;
      this.state.baseline ??= answer;
      this.renderResults();
      return answer;
    } catch (e) {
      if (e instanceof DOMException && e.name === "AbortError") {
        return null;
      }
      if (seq === this.submitSeq) {
        this.showError(e);
      }
      return null;
    } finally {
      if (this.inflight === controller) {
        this.inflight = null;
      }
    }
  }

  /** Flip or set one factor, re-query, and log the signed change. */
  async whatIfToggle(factor: string): Promise<void> {
    const baseline = this.state.baseline;
    if (!baseline) {
      return;
    }
    const from = this.state.value(factor);
    const to = this.state.toggleTarget(factor);
    this.state.set(factor, to);
    this.renderForm();
    const answer = await this.submit();
    if (answer) {
      this.state.recordToggle({ factor, from, to, delta: probabilityDelta(baseline, answer) });
      this.renderResults();
    }
  }

  renderForm(): void {
    if (!this.state.catalog || !this.state.model) {
      this.formSlot.replaceChildren();
      return;
    }
    this.formSlot.replaceChildren(
      renderFactorForm(this.state, { onEvidenceChange: () => void this.submit() }),
    );
  }

  renderResults(): void {
    const { latest, baseline } = this.state;
    if (!latest) {
      this.resultSlot.replaceChildren();
      return;
    }
    const panels = [renderPrediction(latest, this.api.graphUrl(latest.model.id))];
    if (baseline && latest !== baseline) {
      panels.push(renderWhatIf(baseline, latest, this.state.history));
    }
    this.resultSlot.replaceChildren(...panels);
  }

  private renderChrome(modelIds: string[]): void {
    const banner = document.createElement("p");
    banner.className = "edu-banner";
    banner.textContent = "Educational training tool. Not for clinical use.";

    const picker = document.createElement("label");
    picker.className = "model-picker";
    picker.textContent = "Model:";
    this.modelSelect.replaceChildren();
    const placeholder = document.createElement("option");
    placeholder.value = "";
    placeholder.textContent = "(choose a model)";
    this.modelSelect.appendChild(placeholder);
    for (const id of modelIds) {
      const option = document.createElement("option");
      option.value = id;
      option.textContent = id;
      this.modelSelect.appendChild(option);
    }
    this.modelSelect.addEventListener("change", () => {
      if (this.modelSelect.value !== "") {
        void this.selectModel(this.modelSelect.value);
      }
    });
    picker.appendChild(this.modelSelect);

    this.root.replaceChildren(banner, picker, this.errorSlot, this.formSlot, this.resultSlot);
  }

  private showError(e: unknown): void {
    const err = e instanceof ApiError ? e : new ApiError(0, "error", String(e));
    this.errorSlot.replaceChildren(renderError(err));
  }

  private clearError(): void {
    this.errorSlot.replaceChildren();
  }
}
