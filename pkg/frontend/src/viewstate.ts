/** View model and reducer. Rendering is a pure function of this state; all
 * socket messages and key events funnel through `reduce`. */

import { ScenarioInfo, ServerMessage, Snapshot } from "./protocol.js";

export interface Camera {
  scale: number; // pixels per meter
  offsetX: number; // screen x of world origin
  offsetY: number; // screen y of world origin
}

export interface Overlays {
  rays: boolean;
  goals: boolean;
}

export interface ViewState {
  scenario: ScenarioInfo | null;
  controlledIds: number[];
  snapshot: Snapshot | null;
  paused: boolean;
  recording: boolean;
  overlays: Overlays;
  banner: string | null;
  connected: boolean;
}

export function initialViewState(): ViewState {
  return {
    scenario: null,
    controlledIds: [],
    snapshot: null,
    paused: false,
    recording: false,
    overlays: { rays: true, goals: true },
    banner: null,
    connected: false,
  };
}

/** World->screen with y flipped (canvas y grows downward). */
export function worldToScreen(cam: Camera, x: number, y: number): [number, number] {
  return [cam.offsetX + x * cam.scale, cam.offsetY - y * cam.scale];
}

export function screenToWorld(cam: Camera, sx: number, sy: number): [number, number] {
  return [(sx - cam.offsetX) / cam.scale, (cam.offsetY - sy) / cam.scale];
}

/** Fit the arena bounds into the viewport with a margin. */
export function fitCamera(
  bounds: [number, number, number, number],
  width: number,
  height: number,
  margin = 24,
): Camera {
  const [xMin, yMin, xMax, yMax] = bounds;
  const scale = Math.min(
    (width - 2 * margin) / (xMax - xMin),
    (height - 2 * margin) / (yMax - yMin),
  );
  // center the arena
  const cx = (xMin + xMax) / 2;
  const cy = (yMin + yMax) / 2;
  return {
    scale,
    offsetX: width / 2 - cx * scale,
    offsetY: height / 2 + cy * scale,
  };
}

export function reduce(state: ViewState, msg: ServerMessage): ViewState {
  switch (msg.type) {
    case "init":
      return {
        ...state,
        scenario: msg.scenario,
        controlledIds: msg.controlled_ids,
        paused: !msg.running,
        connected: true,
        banner: null,
      };
    case "snapshot": {
      const prev = state.snapshot;
      // discard stale frames from the same episode
      if (prev && msg.episode === prev.episode && msg.t < prev.t) {
        return state;
      }
      return {
        ...state,
        snapshot: msg,
        paused: !msg.running,
        recording: msg.recording,
      };
    }
    case "error":
      return { ...state, banner: msg.message };
    case "ack":
      return state;
    default:
      return state;
  }
}

export function disconnected(state: ViewState): ViewState {
  return { ...state, connected: false, banner: "connection lost" };
}
