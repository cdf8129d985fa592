import { ClientMessage, parseServerMessage, ServerMessage } from "./protocol.js";
import { ConnState } from "./view.js";

export interface ConnectionHandlers {
  onMessage: (message: ServerMessage) => void;
  onState: (state: ConnState) => void;
}

// One duplex connection with auto-reconnect. Every (re)connect gets a fresh
// snapshot from the server, so there is nothing to replay client-side.
export class PanelConnection {
  private ws: WebSocket | null = null;
  private retryMs = 500;
  private closed = false;

  constructor(
    private url: string,
    private handlers: ConnectionHandlers,
  ) {}

  connect(): void {
    if (this.closed) return;
    this.handlers.onState("connecting");
    const ws = new WebSocket(this.url);
    this.ws = ws;

    ws.onopen = () => {
      this.retryMs = 500;
      this.handlers.onState("open");
    };
    ws.onmessage = (frame: MessageEvent) => {
      const message = parseServerMessage(String(frame.data));
      if (message) this.handlers.onMessage(message);
    };
    ws.onclose = () => {
      this.ws = null;
      if (this.closed) return;
      this.handlers.onState("lost");
      setTimeout(() => this.connect(), this.retryMs);
      this.retryMs = Math.min(this.retryMs * 2, 8000);
    };
    ws.onerror = () => ws.close();
  }

  send(message: ClientMessage): boolean {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(message));
      return true;
    }
    return false;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
