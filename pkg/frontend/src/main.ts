/** Bootstrap: wire the API client, reducer, and renderers together. */

import { ApiClient, ApiConflictError } from "./api.js";
import { nearestPoint } from "./markers.js";
import {
  activePoints,
  allowedActions,
  INITIAL_STATE,
  reduce,
  type LayerName,
  type StateAction,
  type ViewState,
} from "./state.js";
import type { ChoiceRequest, StepManifest } from "./types.js";
import {
  populateLayerSelect,
  renderCanvas,
  renderChips,
  renderControls,
  renderPointList,
  renderStatus,
  renderTimeline,
} from "./view.js";

const api = new ApiClient("");
let state: ViewState = INITIAL_STATE;
let manifest: StepManifest | null = null;
let unsubscribe: (() => void) | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const ui = {
  canvas: el<HTMLCanvasElement>("viewer"),
  layerSelect: el<HTMLSelectElement>("layer"),
  sceneSelect: el<HTMLSelectElement>("scene"),
  newSession: el<HTMLButtonElement>("new-session"),
  pointList: el("points"),
  chipStrip: el("chips"),
  timeline: el("timeline"),
  statusBadge: el("status"),
  banner: el("banner"),
  controls: el("controls"),
  markerToggle: el<HTMLInputElement>("show-markers"),
  boxToggle: el<HTMLInputElement>("show-boxes"),
  zoomInput: el<HTMLInputElement>("zoom-factor"),
};

async function dispatch(action: StateAction): Promise<void> {
  const before = state;
  state = reduce(state, action);
  if (state === before) return;
  if (
    state.sessionId &&
    state.activeStep !== null &&
    (before.activeStep !== state.activeStep || before.steps.length !== state.steps.length)
  ) {
    manifest = await api.getManifest(state.sessionId, state.activeStep).catch(() => null);
  }
  await render();
}

async function render(): Promise<void> {
  renderStatus(state, ui.statusBadge, ui.banner);
  renderTimeline(state, ui.timeline, (index) => void dispatch({ kind: "select_step", index }));
  renderPointList(state, ui.pointList, (rank) => void dispatch({ kind: "select_rank", rank }));
  renderChips(state, api, ui.chipStrip);
  renderControls(state, ui.controls);
  await renderCanvas(state, manifest, api, ui.canvas);
}

async function refreshSteps(): Promise<void> {
  if (!state.sessionId) return;
  const steps = await api.getSteps(state.sessionId);
  await dispatch({ kind: "steps_loaded", steps });
}

async function startSession(): Promise<void> {
  const scene = ui.sceneSelect.value;
  if (!scene) return;
  unsubscribe?.();
  const projection = await api.createSession(scene, { mode: "interactive" });
  manifest = null;
  await dispatch({ kind: "session_created", projection });
  unsubscribe = api.openEvents(projection.id, 0, (event) => {
    void (async () => {
      await dispatch({ kind: "event", event });
      if (event.event === "step_committed") await refreshSteps();
    })();
  });
}

async function steer(choice: ChoiceRequest): Promise<void> {
  if (!state.sessionId) return;
  if (!allowedActions(state).includes(choice.action)) return; // state-driven UI: cannot occur
  await dispatch({ kind: "choice_submitted", choice });
  try {
    await api.submitChoice(state.sessionId, choice);
  } catch (error) {
    const message =
      error instanceof ApiConflictError
        ? `service refused the ${choice.action}: ${error.message}`
        : `submitting ${choice.action} failed: ${String(error)}`;
    await dispatch({ kind: "choice_conflict", message });
    await refreshSteps();
  }
}

function wireControls(): void {
  ui.controls.querySelectorAll<HTMLButtonElement>("button[data-action]").forEach((button) => {
    button.addEventListener("click", () => {
      const action = button.dataset["action"];
      if (action === "approach" && state.selectedRank !== null) {
        void steer({ action: "approach", rank: state.selectedRank, chooser: "human" });
      } else if (action === "zoom") {
        void steer({ action: "zoom", factor: Number(ui.zoomInput.value), chooser: "human" });
      } else if (action === "rescan" || action === "stop") {
        void steer({ action, chooser: "human" });
      }
    });
  });
  ui.canvas.addEventListener("click", (mouse) => {
    const rect = ui.canvas.getBoundingClientRect();
    const scaleX = ui.canvas.width / rect.width / 4;
    const scaleY = ui.canvas.height / rect.height / 4;
    const x = (mouse.clientX - rect.left) * scaleX;
    const y = (mouse.clientY - rect.top) * scaleY;
    const hit = nearestPoint(activePoints(state), x, y, 12);
    void dispatch({ kind: "select_rank", rank: hit ? hit.rank : null });
  });
  ui.layerSelect.addEventListener("change", () => {
    void dispatch({ kind: "select_layer", layer: ui.layerSelect.value as LayerName });
  });
  ui.markerToggle.addEventListener("change", () => void dispatch({ kind: "toggle_markers" }));
  ui.boxToggle.addEventListener("change", () => void dispatch({ kind: "toggle_boxes" }));
  ui.newSession.addEventListener("click", () => void startSession());
}

async function boot(): Promise<void> {
  populateLayerSelect(ui.layerSelect);
  wireControls();
  const scenes = await api.listScenes().catch(() => []);
  ui.sceneSelect.innerHTML = "";
  for (const scene of scenes) {
    const option = document.createElement("option");
    option.value = scene.id;
    option.textContent = scene.name;
    ui.sceneSelect.appendChild(option);
  }
  await render();
}

void boot();
