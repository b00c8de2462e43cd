/** Wire types for the session API. */

export interface SceneInfo {
  id: string;
  name: string;
  physical_width_m: number | null;
}

export interface PointDto {
  x: number;
  y: number;
  rank: number;
  score: number;
  color: string;
}

export type SessionStatus = "running" | "awaiting_choice" | "done";

export interface SessionProjection {
  id: string;
  status: SessionStatus;
  busy: boolean;
  mode: "autonomous" | "interactive";
  step_count: number;
  current_distance: number;
  done_reason: string | null;
  error: string | null;
  pending_points: PointDto[];
}

export interface StepSummary {
  index: number;
  distance: number;
  points: PointDto[];
  chosen: Record<string, unknown> | null;
}

export interface SessionEvent {
  seq: number;
  step: number | null;
  event:
    | "step_started"
    | "step_committed"
    | "awaiting_choice"
    | "choice_recorded"
    | "session_done";
  payload: Record<string, unknown>;
  timestamp: number;
}

export type ChoiceAction = "approach" | "zoom" | "rescan" | "stop";

export interface ChoiceRequest {
  action: ChoiceAction;
  rank?: number;
  point?: [number, number];
  factor?: number;
  chooser: "human";
}

export interface StepManifest {
  step: number;
  files: Record<string, string>;
  parameters: {
    mosaic_cols: number;
    mosaic_rows: number;
    sub_width: number;
    sub_height: number;
    blur_width: number;
    [key: string]: unknown;
  };
}
