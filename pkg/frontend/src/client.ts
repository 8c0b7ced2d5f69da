/** Thin WebSocket wrapper: JSON frames in, JSON frames out. */

import { ClientCommand, ServerMessage } from "./protocol.js";

export interface SocketHandle {
  send(cmd: ClientCommand): boolean;
  close(): void;
}

export function connect(
  url: string,
  onMessage: (msg: ServerMessage) => void,
  onClose: () => void,
): SocketHandle {
  const ws = new WebSocket(url);
  ws.onmessage = (event: MessageEvent) => {
    try {
      onMessage(JSON.parse(event.data as string) as ServerMessage);
    } catch {
      // ignore malformed frames
    }
  };
  ws.onclose = onClose;
  ws.onerror = onClose;
  return {
    send(cmd: ClientCommand): boolean {
      if (ws.readyState !== WebSocket.OPEN) {
        return false;
      }
      ws.send(JSON.stringify(cmd));
      return true;
    },
    close() {
      ws.close();
    },
  };
}
