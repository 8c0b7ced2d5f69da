/** Cockpit entry point: one canvas, one socket, one reducer. */

import { connect, SocketHandle } from "./client.js";
import { handleKey } from "./keys.js";
import { render } from "./render.js";
import { disconnected, initialViewState, reduce, ViewState } from "./viewstate.js";

function wsUrl(): string {
  const params = new URLSearchParams(window.location.search);
  const host = params.get("host") ?? window.location.hostname ?? "127.0.0.1";
  const port = params.get("port") ?? (window.location.port || "8000");
  return `ws://${host}:${port}/ws`;
}

function recordPath(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("record") ?? "demonstrations.jsonl";
}

function main(): void {
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  let state: ViewState = initialViewState();
  let socket: SocketHandle | null = null;

  const repaint = () =>
    render(ctx as unknown as import("./render.js").Ctx2D, canvas.width, canvas.height, state);

  const resize = () => {
    canvas.width = window.innerWidth;
    canvas.height = window.innerHeight;
    repaint();
  };
  window.addEventListener("resize", resize);
  resize();

  socket = connect(
    wsUrl(),
    (msg) => {
      state = reduce(state, msg);
      repaint();
    },
    () => {
      state = disconnected(state);
      repaint();
    },
  );

  window.addEventListener("keydown", (event: KeyboardEvent) => {
    const result = handleKey(event.key, {
      controlledIds: state.controlledIds,
      paused: state.paused,
      recording: state.recording,
      recordPath: recordPath(),
    });
    if (result.warning) {
      state = { ...state, banner: result.warning };
      repaint();
      setTimeout(() => {
        state = { ...state, banner: null };
        repaint();
      }, 1500);
    }
    if (result.command) {
      if (!socket || !socket.send(result.command)) {
        state = { ...state, banner: "not connected: command dropped" };
        repaint();
      }
      event.preventDefault();
    }
  });
}

main();
