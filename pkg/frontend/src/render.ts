/** Immediate-mode canvas rendering of the latest snapshot.
 *
 * Drawn against a minimal structural 2D-context interface so the drawing
 * logic is testable without a real canvas. Mode colors are a
 * color-blind-safe pair; controlled robots get their hotkey as a badge so
 * identity never relies on color alone. */

import { ViewState, Camera, fitCamera, worldToScreen } from "./viewstate.js";

export interface Ctx2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  font: string;
  textAlign: string;
  globalAlpha: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
}

export const MODE_COLORS = {
  apf: "#0072B2", // blue
  wf: "#E69F00", // orange
};
export const COLLIDED_COLOR = "#d11141";
export const GOAL_COLOR = "#f4a6c6";
export const OBSTACLE_COLOR = "#6a4e9c";

export function render(ctx: Ctx2D, width: number, height: number, state: ViewState): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#fafafa";
  ctx.fillRect(0, 0, width, height);
  if (!state.scenario) {
    ctx.fillStyle = "#333333";
    ctx.font = "14px sans-serif";
    ctx.fillText(state.banner ?? "waiting for scenario...", 16, 24);
    return;
  }
  const cam = fitCamera(state.scenario.world.bounds, width, height);
  drawArena(ctx, cam, state);
  if (state.overlays.goals) drawGoals(ctx, cam, state);
  drawRobots(ctx, cam, state);
  drawStatus(ctx, state, height);
}

function drawArena(ctx: Ctx2D, cam: Camera, state: ViewState): void {
  const [xMin, yMin, xMax, yMax] = state.scenario!.world.bounds;
  const [sx, sy] = worldToScreen(cam, xMin, yMax);
  const [ex, ey] = worldToScreen(cam, xMax, yMin);
  ctx.strokeStyle = "#444444";
  ctx.lineWidth = 2;
  ctx.strokeRect(sx, sy, ex - sx, ey - sy);
  ctx.fillStyle = OBSTACLE_COLOR;
  for (const poly of state.scenario!.world.polygons) {
    ctx.beginPath();
    poly.forEach(([x, y], i) => {
      const [px, py] = worldToScreen(cam, x, y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.closePath();
    ctx.fill();
  }
}

function drawGoals(ctx: Ctx2D, cam: Camera, state: ViewState): void {
  ctx.fillStyle = GOAL_COLOR;
  for (const robot of state.scenario!.robots) {
    const [gx, gy] = worldToScreen(cam, robot.goal[0], robot.goal[1]);
    ctx.beginPath();
    ctx.arc(gx, gy, 5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function drawRobots(ctx: Ctx2D, cam: Camera, state: ViewState): void {
  if (!state.snapshot) return;
  const radiusM = (state.scenario!.params["robot_radius"] as number) ?? 0.17;
  const r = Math.max(3, radiusM * cam.scale);
  for (const robot of state.snapshot.robots) {
    const [x, y] = worldToScreen(cam, robot.x, robot.y);
    if (state.overlays.rays && robot.rays) {
      ctx.strokeStyle = "#bbbbbb";
      ctx.lineWidth = 0.5;
      ctx.globalAlpha = 0.5;
      ctx.beginPath();
      for (const [rx, ry] of robot.rays) {
        const [ex, ey] = worldToScreen(cam, rx, ry);
        ctx.moveTo(x, y);
        ctx.lineTo(ex, ey);
      }
      ctx.stroke();
      ctx.globalAlpha = 1.0;
    }
    ctx.fillStyle = robot.collided
      ? COLLIDED_COLOR
      : robot.mode === 1
        ? MODE_COLORS.wf
        : MODE_COLORS.apf;
    ctx.beginPath();
    ctx.arc(x, y, r, 0, 2 * Math.PI);
    ctx.fill();
    // heading tick
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(x, y);
    ctx.lineTo(x + r * Math.cos(robot.psi), y - r * Math.sin(robot.psi));
    ctx.stroke();
    if (robot.controlled) {
      const slot = state.controlledIds.indexOf(robot.id);
      ctx.fillStyle = "#111111";
      ctx.font = "bold 12px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText(String(slot + 1), x, y - r - 4);
    }
    if (robot.arrived) {
      ctx.strokeStyle = "#2a9d2a";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(x, y, r + 3, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }
}

function drawStatus(ctx: Ctx2D, state: ViewState, height: number): void {
  ctx.fillStyle = "#222222";
  ctx.font = "13px monospace";
  ctx.textAlign = "left";
  const t = state.snapshot?.t ?? 0;
  const parts = [
    `t=${t}`,
    state.paused ? "PAUSED" : "RUNNING",
    state.recording ? "REC" : "",
    state.connected ? "" : "DISCONNECTED",
  ].filter(Boolean);
  ctx.fillText(parts.join("  "), 12, height - 12);
  if (state.banner) {
    ctx.fillStyle = COLLIDED_COLOR;
    ctx.fillText(state.banner, 12, height - 30);
  }
}
