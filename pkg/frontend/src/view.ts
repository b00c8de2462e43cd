/** Canvas + DOM rendering; all decisions come from the reducer state. */

import { chipBox, markerColor } from "./markers.js";
import { activePoints, allowedActions, layerArtifact, LAYERS, type ViewState } from "./state.js";
import type { ApiClient } from "./api.js";
import type { PointDto, StepManifest } from "./types.js";

const SCALE = 4; // mosaic pixels to canvas pixels

export interface ViewElements {
  canvas: HTMLCanvasElement;
  layerSelect: HTMLSelectElement;
  pointList: HTMLElement;
  chipStrip: HTMLElement;
  timeline: HTMLElement;
  statusBadge: HTMLElement;
  banner: HTMLElement;
  controls: HTMLElement;
}

const imageCache = new Map<string, Promise<HTMLImageElement>>();

function loadImage(url: string): Promise<HTMLImageElement> {
  let cached = imageCache.get(url);
  if (!cached) {
    cached = new Promise((resolve, reject) => {
      const img = new Image();
      img.onload = () => resolve(img);
      img.onerror = () => reject(new Error(`failed to load ${url}`));
      img.src = url;
    });
    imageCache.set(url, cached);
  }
  return cached;
}

export function populateLayerSelect(select: HTMLSelectElement): void {
  select.innerHTML = "";
  for (const layer of LAYERS) {
    const option = document.createElement("option");
    option.value = layer;
    option.textContent = layer.replace("_", " ");
    select.appendChild(option);
  }
}

export async function renderCanvas(
  state: ViewState,
  manifest: StepManifest | null,
  api: ApiClient,
  canvas: HTMLCanvasElement,
): Promise<void> {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  if (state.sessionId === null || state.activeStep === null) {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    return;
  }
  const name = layerArtifact(state.layer);
  if (manifest && !(name in manifest.files)) {
    drawPlaceholder(ctx, canvas, `${name} not available for this step`);
    return;
  }
  let image: HTMLImageElement;
  try {
    image = await loadImage(api.artifactUrl(state.sessionId, state.activeStep, name));
  } catch {
    drawPlaceholder(ctx, canvas, `loading ${name} failed (retry by switching layers)`);
    return;
  }
  canvas.width = image.naturalWidth * SCALE;
  canvas.height = image.naturalHeight * SCALE;
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(image, 0, 0, canvas.width, canvas.height);

  const points = activePoints(state);
  if (state.showBoxes && manifest) {
    const { sub_width, sub_height } = manifest.parameters;
    for (const p of points) {
      const box = chipBox(p, sub_width, sub_height, image.naturalWidth, image.naturalHeight);
      ctx.strokeStyle = markerColor(p.rank);
      ctx.lineWidth = 2;
      ctx.strokeRect(box.x * SCALE, box.y * SCALE, box.w * SCALE, box.h * SCALE);
    }
  }
  if (state.showMarkers) {
    for (const p of points) {
      drawMarker(ctx, p, p.rank === state.selectedRank);
    }
  }
}

function drawMarker(ctx: CanvasRenderingContext2D, p: PointDto, selected: boolean): void {
  const x = (p.x + 0.5) * SCALE;
  const y = (p.y + 0.5) * SCALE;
  ctx.beginPath();
  ctx.arc(x, y, selected ? 10 : 7, 0, Math.PI * 2);
  ctx.fillStyle = markerColor(p.rank);
  ctx.fill();
  ctx.strokeStyle = "black";
  ctx.lineWidth = 1.5;
  ctx.stroke();
  ctx.fillStyle = "white";
  ctx.font = "bold 10px sans-serif";
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  ctx.fillText(String(p.rank), x, y);
}

function drawPlaceholder(
  ctx: CanvasRenderingContext2D,
  canvas: HTMLCanvasElement,
  message: string,
): void {
  ctx.fillStyle = "#222";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#ddd";
  ctx.font = "14px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText(message, canvas.width / 2, canvas.height / 2);
}

export function renderPointList(
  state: ViewState,
  container: HTMLElement,
  onSelect: (rank: number) => void,
): void {
  container.innerHTML = "";
  const points = activePoints(state);
  if (points.length === 0) {
    const empty = document.createElement("div");
    empty.className = "empty";
    empty.textContent = "no interest points";
    container.appendChild(empty);
    return;
  }
  for (const p of points) {
    const row = document.createElement("button");
    row.className = "point-row" + (p.rank === state.selectedRank ? " selected" : "");
    row.dataset["rank"] = String(p.rank);
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = markerColor(p.rank);
    row.appendChild(swatch);
    const label = document.createElement("span");
    label.textContent = ` rank ${p.rank} at (${p.x}, ${p.y})  score ${p.score.toFixed(2)}`;
    row.appendChild(label);
    row.addEventListener("click", () => onSelect(p.rank));
    container.appendChild(row);
  }
}

export function renderChips(state: ViewState, api: ApiClient, strip: HTMLElement): void {
  strip.innerHTML = "";
  if (state.sessionId === null || state.activeStep === null) return;
  for (const p of activePoints(state)) {
    const figure = document.createElement("figure");
    const img = document.createElement("img");
    img.src = api.artifactUrl(state.sessionId, state.activeStep, `chips/chip${p.rank}.png`);
    img.alt = `chip rank ${p.rank}`;
    img.style.borderColor = markerColor(p.rank);
    const caption = document.createElement("figcaption");
    caption.textContent = `rank ${p.rank}`;
    figure.appendChild(img);
    figure.appendChild(caption);
    strip.appendChild(figure);
  }
}

export function renderTimeline(
  state: ViewState,
  container: HTMLElement,
  onSelect: (index: number) => void,
): void {
  container.innerHTML = "";
  for (const step of state.steps) {
    const button = document.createElement("button");
    button.className = "step" + (step.index === state.activeStep ? " active" : "");
    button.textContent = `step ${step.index} @ ${step.distance} m`;
    button.addEventListener("click", () => onSelect(step.index));
    container.appendChild(button);
  }
}

export function renderStatus(state: ViewState, badge: HTMLElement, banner: HTMLElement): void {
  badge.textContent = state.sessionId
    ? `${state.sessionId.slice(0, 8)} · ${state.status}${state.doneReason ? ` (${state.doneReason})` : ""}`
    : "no session";
  badge.dataset["status"] = state.status;
  banner.textContent = state.banner ?? "";
  banner.hidden = state.banner === null;
}

export function renderControls(state: ViewState, controls: HTMLElement): void {
  const allowed = new Set(allowedActions(state));
  controls.querySelectorAll<HTMLButtonElement>("button[data-action]").forEach((button) => {
    const action = button.dataset["action"] ?? "";
    const needsSelection = action === "approach";
    button.disabled =
      !allowed.has(action as never) || (needsSelection && state.selectedRank === null);
  });
  const zoom = controls.querySelector<HTMLInputElement>("input[name=zoom]");
  if (zoom) zoom.disabled = !allowed.has("zoom");
}
