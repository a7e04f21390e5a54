import { ApiClient, ItemView, isItem } from "./api.js";

export type FlowState =
  | { kind: "idle" }
  | { kind: "item"; item: ItemView; displayedAt: number }
  | { kind: "training" }
  | { kind: "selecting" }
  | { kind: "done" };

export interface Submission {
  itemToken: string;
  finalLabel: number;
  accepted: boolean;
  elapsedMs: number;
}

type Clock = () => number;

/**
 * One-item-at-a-time labeling flow.
 *
 * The decision timer starts on an explicit "Start Labeling" action for the
 * first item and automatically when each subsequent item is displayed, so
 * client_elapsed_ms always spans display-to-submission. Exactly one item is
 * active at a time; submissions are strictly sequential.
 */
export class LabelFlow {
  state: FlowState = { kind: "idle" };
  readonly submissions: Submission[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
    private readonly clock: Clock = () => Date.now(),
  ) {}

  /** Explicit user action that fetches and times the first item. */
  async startLabeling(): Promise<FlowState> {
    if (this.state.kind !== "idle") {
      throw new Error("labeling already started");
    }
    return this.advance();
  }

  /** Submit the pre-filled suggestion unchanged (Enter / accept button). */
  async accept(): Promise<FlowState> {
    if (this.state.kind !== "item") throw new Error("no active item");
    return this.submit(this.state.item.suggested_label, true);
  }

  /** Submit a label picked from the corrected drop-down. */
  async correct(finalLabel: number): Promise<FlowState> {
    if (this.state.kind !== "item") throw new Error("no active item");
    if (finalLabel < 0 || finalLabel >= this.state.item.class_names.length) {
      throw new Error(`label ${finalLabel} outside class list`);
    }
    return this.submit(finalLabel, false);
  }

  /** Poll again after a "training" phase; the server resumes with a new batch. */
  async resume(): Promise<FlowState> {
    if (this.state.kind !== "training" && this.state.kind !== "selecting") {
      throw new Error(`cannot resume from ${this.state.kind}`);
    }
    return this.advance();
  }

  private async submit(finalLabel: number, accepted: boolean): Promise<FlowState> {
    const current = this.state as Extract<FlowState, { kind: "item" }>;
    const elapsedMs = this.clock() - current.displayedAt;
    await this.api.submitLabel(
      this.sessionId,
      current.item.item_token,
      finalLabel,
      elapsedMs,
    );
    this.submissions.push({
      itemToken: current.item.item_token,
      finalLabel,
      accepted,
      elapsedMs,
    });
    return this.advance();
  }

  private async advance(): Promise<FlowState> {
    const next = await this.api.next(this.sessionId);
    if (isItem(next)) {
      // timer auto-starts the moment the item is displayed
      this.state = { kind: "item", item: next, displayedAt: this.clock() };
    } else if (next.phase === "done") {
      this.state = { kind: "done" };
    } else if (next.phase === "training") {
      this.state = { kind: "training" };
    } else {
      this.state = { kind: "selecting" };
    }
    return this.state;
  }
}
