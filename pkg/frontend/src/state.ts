/** Pure view-state reducer: the UI is a function of events + fetched artifacts.
 *
 * Events apply idempotently by sequence number, so replays after a reconnect
 * (or a full refresh followed by an `after=0` replay) converge on the same
 * state. Input locks while a choice is in flight and unlocks on the next
 * awaiting_choice / session_done event.
 */

import type {
  ChoiceAction,
  ChoiceRequest,
  SessionEvent,
  SessionProjection,
  StepSummary,
} from "./types.js";

export const LAYERS = [
  "mosaic",
  "seg_h",
  "seg_s",
  "seg_i",
  "uncommon_h",
  "uncommon_s",
  "uncommon_i",
  "interest_raw",
  "interest_blur",
  "mask",
] as const;

export type LayerName = (typeof LAYERS)[number];

/** Artifact file backing each layer (the mosaic layer shows the intensity plane). */
export function layerArtifact(layer: LayerName): string {
  return layer === "mosaic" ? "mosaic_i.png" : `${layer}.png`;
}

export interface ViewState {
  sessionId: string | null;
  status: "idle" | "running" | "awaiting_choice" | "done";
  doneReason: string | null;
  steps: StepSummary[];
  activeStep: number | null;
  layer: LayerName;
  showMarkers: boolean;
  showBoxes: boolean;
  selectedRank: number | null;
  pendingAction: ChoiceRequest | null;
  lastSeq: number;
  banner: string | null;
}

export const INITIAL_STATE: ViewState = {
  sessionId: null,
  status: "idle",
  doneReason: null,
  steps: [],
  activeStep: null,
  layer: "mosaic",
  showMarkers: true,
  showBoxes: true,
  selectedRank: null,
  pendingAction: null,
  lastSeq: 0,
  banner: null,
};

export type StateAction =
  | { kind: "session_created"; projection: SessionProjection }
  | { kind: "event"; event: SessionEvent }
  | { kind: "steps_loaded"; steps: StepSummary[] }
  | { kind: "select_step"; index: number }
  | { kind: "select_layer"; layer: LayerName }
  | { kind: "toggle_markers" }
  | { kind: "toggle_boxes" }
  | { kind: "select_rank"; rank: number | null }
  | { kind: "choice_submitted"; choice: ChoiceRequest }
  | { kind: "choice_conflict"; message: string };

export function reduce(state: ViewState, action: StateAction): ViewState {
  switch (action.kind) {
    case "session_created":
      return {
        ...INITIAL_STATE,
        sessionId: action.projection.id,
        status: action.projection.status,
        layer: state.layer,
      };
    case "event":
      return applyEvent(state, action.event);
    case "steps_loaded": {
      const active =
        state.activeStep ?? (action.steps.length > 0 ? action.steps.length - 1 : null);
      return { ...state, steps: action.steps, activeStep: active };
    }
    case "select_step":
      if (action.index < 0 || action.index >= state.steps.length) return state;
      return { ...state, activeStep: action.index, selectedRank: null };
    case "select_layer":
      return { ...state, layer: action.layer };
    case "toggle_markers":
      return { ...state, showMarkers: !state.showMarkers };
    case "toggle_boxes":
      return { ...state, showBoxes: !state.showBoxes };
    case "select_rank":
      return { ...state, selectedRank: action.rank };
    case "choice_submitted":
      return { ...state, pendingAction: action.choice, banner: null };
    case "choice_conflict":
      // a race the service rejected: unlock and surface it, nothing destructive
      return { ...state, pendingAction: null, banner: action.message };
  }
}

function applyEvent(state: ViewState, event: SessionEvent): ViewState {
  if (event.seq <= state.lastSeq) return state; // idempotent replay
  const next: ViewState = { ...state, lastSeq: event.seq };
  switch (event.event) {
    case "step_started":
      return { ...next, status: "running" };
    case "step_committed": {
      const index = event.payload["index"] as number;
      return { ...next, activeStep: index, selectedRank: null };
    }
    case "awaiting_choice":
      return { ...next, status: "awaiting_choice", pendingAction: null };
    case "choice_recorded":
      return next;
    case "session_done":
      return {
        ...next,
        status: "done",
        doneReason: (event.payload["reason"] as string) ?? null,
        pendingAction: null,
        banner: null,
      };
  }
}

/** The actions the service would accept right now; the UI renders only these. */
export function allowedActions(state: ViewState): ChoiceAction[] {
  if (state.status !== "awaiting_choice" || state.pendingAction !== null) return [];
  const actions: ChoiceAction[] = ["zoom", "rescan", "stop"];
  const step = state.activeStep !== null ? state.steps[state.activeStep] : undefined;
  if (step && step.points.length > 0) actions.unshift("approach");
  return actions;
}

export function activePoints(state: ViewState) {
  const step = state.activeStep !== null ? state.steps[state.activeStep] : undefined;
  return step ? step.points : [];
}
