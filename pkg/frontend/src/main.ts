import { ApiClient } from "./api.js";
import { costCurve, ratiosView, tierBars } from "./dashboard.js";
import { filterClasses } from "./filter.js";
import { LabelFlow } from "./labeler.js";
import { featureSparkline } from "./sparkline.js";
import type { Metrics } from "./api.js";

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const startBtn = el<HTMLButtonElement>("start");
const acceptBtn = el<HTMLButtonElement>("accept");
const nextBtn = el<HTMLButtonElement>("submit-correction");
const content = el<HTMLDivElement>("item-content");
const tierLabel = el<HTMLSpanElement>("item-tier");
const classFilter = el<HTMLInputElement>("class-filter");
const classSelect = el<HTMLSelectElement>("class-select");
const phaseLabel = el<HTMLDivElement>("phase");
const metricsBox = el<HTMLDivElement>("metrics");
const ratiosBox = el<HTMLDivElement>("ratios");

let flow: LabelFlow | null = null;
const metricsHistory: Metrics[] = [];

function renderState(): void {
  if (!flow) return;
  const state = flow.state;
  phaseLabel.textContent = state.kind;
  const active = state.kind === "item";
  acceptBtn.disabled = !active;
  nextBtn.disabled = !active;
  classFilter.disabled = !active;
  classSelect.disabled = !active;
  if (state.kind !== "item") {
    content.textContent = state.kind === "done" ? "session complete" : "";
    if (state.kind === "training" || state.kind === "selecting") {
      content.textContent = "training model, next batch shortly";
      void flow.resume().then(renderState);
    }
    return;
  }
  const item = state.item;
  content.textContent = item.thumbnail ?? featureSparkline(item.features);
  tierLabel.textContent = item.tier;
  classFilter.value = "";
  renderOptions(item.class_names, item.suggested_label);
}

function renderOptions(classNames: string[], suggested: number): void {
  const visible = filterClasses(classNames, classFilter.value);
  classSelect.innerHTML = "";
  for (const name of visible) {
    const option = document.createElement("option");
    option.value = String(classNames.indexOf(name));
    option.textContent = name;
    // suggestion pre-selected so verifying is a single keypress
    option.selected = classNames.indexOf(name) === suggested;
    classSelect.appendChild(option);
  }
}

async function refreshDashboard(): Promise<void> {
  if (!flow) return;
  const sid = sessionId;
  const metrics = await api.metrics(sid);
  if (
    metricsHistory.length === 0 ||
    metricsHistory[metricsHistory.length - 1]!.round !== metrics.round
  ) {
    metricsHistory.push(metrics);
  } else {
    metricsHistory[metricsHistory.length - 1] = metrics;
  }
  const curve = costCurve(metricsHistory);
  const bars = tierBars(metrics);
  metricsBox.textContent = [
    `round ${metrics.round}, accuracy ${metrics.test_accuracy.toFixed(3)}, ` +
      `cost ${metrics.cost_cumulative}`,
    ...curve.map((p) => `r${p.round}: cost ${p.cost} acc ${p.accuracy.toFixed(3)}`),
    ...bars.map((b) =>
      b.accuracy === null
        ? `${b.tier}: no selections yet`
        : `${b.tier}: ${(b.accuracy * 100).toFixed(0)}% of ${b.selected}`,
    ),
  ].join("\n");
  const view = ratiosView(await api.ratios(sid));
  ratiosBox.textContent = view.placeholder
    ? "ratios appear once both timing categories have records"
    : `mean ratio ${view.meanRatio!.toFixed(2)}, ` +
      `median ratio ${view.medianRatio!.toFixed(2)}`;
}

let sessionId = "";

startBtn.addEventListener("click", async () => {
  if (!flow) {
    sessionId = await api.createSession();
    flow = new LabelFlow(api, sessionId);
    await flow.startLabeling();
  }
  startBtn.disabled = true;
  renderState();
  await refreshDashboard();
});

acceptBtn.addEventListener("click", async () => {
  if (!flow) return;
  await flow.accept();
  renderState();
  await refreshDashboard();
});

nextBtn.addEventListener("click", async () => {
  if (!flow) return;
  await flow.correct(Number(classSelect.value));
  renderState();
  await refreshDashboard();
});

classFilter.addEventListener("input", () => {
  if (flow && flow.state.kind === "item") {
    renderOptions(flow.state.item.class_names, flow.state.item.suggested_label);
  }
});

// keyboard-only path: Enter accepts the pre-filled suggestion
document.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter" && flow && flow.state.kind === "item") {
    if (document.activeElement === classSelect) {
      nextBtn.click();
    } else {
      acceptBtn.click();
    }
  }
});
