/** Keyboard mapping: digits toggle controlled robots, space drives the
 * transport, "r" starts/stops recording. */

import { ClientCommand } from "./protocol.js";

export interface KeyContext {
  controlledIds: number[];
  paused: boolean;
  recording: boolean;
  recordPath: string;
}

export interface KeyResult {
  command?: ClientCommand;
  warning?: string;
}

export function handleKey(key: string, ctx: KeyContext): KeyResult {
  if (key >= "1" && key <= "9") {
    const slot = key.charCodeAt(0) - "1".charCodeAt(0);
    if (slot >= ctx.controlledIds.length) {
      return { warning: `no controlled robot on key ${key}` };
    }
    return { command: { type: "toggle", id: ctx.controlledIds[slot] } };
  }
  if (key === " ") {
    return { command: { type: "control", action: ctx.paused ? "resume" : "pause" } };
  }
  if (key === "s") {
    return { command: { type: "control", action: "step" } };
  }
  if (key === "r") {
    return ctx.recording
      ? { command: { type: "record", action: "stop" } }
      : { command: { type: "record", action: "start", path: ctx.recordPath } };
  }
  if (key === "0") {
    return { command: { type: "control", action: "reset" } };
  }
  return {};
}
