// Session client: command drafting (last-wins), fixed-rate sending with a
// zero-input heartbeat, monotone sequence numbers that survive reconnects,
// and reconnection with backoff.  Socket construction is injectable so the
// logic is testable without a browser.

import {
  CommandMessage,
  CommandToggles,
  ServerMessage,
  StateMessage,
  WelcomeMessage,
  helloMessage,
  parseServerMessage,
} from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface CommandDraft {
  lean: number;
  cop: number | null;
  com_disp: number | null;
  arms: { l: number[]; r: number[] };
  toggles: CommandToggles;
}

export function zeroDraft(): CommandDraft {
  return {
    lean: 0,
    cop: null,
    com_disp: null,
    arms: { l: [0, 0, 0, 0], r: [0, 0, 0, 0] },
    toggles: { spring: true, haptics: true },
  };
}

export const LEAN_LIMIT = 0.35; // rad, hard input limit

/** Last-wins command draft with monotone sequence numbers. */
export class CommandSampler {
  private draft: CommandDraft = zeroDraft();
  private seq: number;

  constructor(startSeq = 0) {
    this.seq = startSeq;
  }

  get lastSeq(): number {
    return this.seq;
  }

  /** Merge an input change; repeated calls within a tick keep the latest. */
  update(change: Partial<CommandDraft>): void {
    const merged = { ...this.draft, ...change };
    merged.lean = Math.max(-LEAN_LIMIT, Math.min(LEAN_LIMIT, merged.lean));
    this.draft = merged;
  }

  current(): CommandDraft {
    return this.draft;
  }

  /** Emit the next command message (heartbeats repeat unchanged values). */
  sample(tClient: number): CommandMessage {
    this.seq += 1;
    const d = this.draft;
    return {
      type: "command",
      seq: this.seq,
      t_client: tClient,
      lean: d.lean,
      cop: d.cop,
      com_disp: d.com_disp,
      arms: { l: [...d.arms.l], r: [...d.arms.r] },
      toggles: { ...d.toggles },
    };
  }
}

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface ClientEvents {
  onState?: (msg: StateMessage) => void;
  onWelcome?: (msg: WelcomeMessage) => void;
  onError?: (code: string, detail: string) => void;
  onStatus?: (status: ConnectionStatus) => void;
}

export class TeleopClient {
  readonly sampler = new CommandSampler();
  role: "pilot" | "observer" | null = null;
  rttMs: number | null = null;
  lastState: StateMessage | null = null;
  status: ConnectionStatus = "closed";

  private socket: SocketLike | null = null;
  private events: ClientEvents;
  private url: string;
  private makeSocket: SocketFactory;
  private now: () => number;
  private pingSent = new Map<string, number>();
  private nonce = 0;

  constructor(
    url: string,
    events: ClientEvents = {},
    makeSocket: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
    now: () => number = () => performance.now(),
  ) {
    this.url = url;
    this.events = events;
    this.makeSocket = makeSocket;
    this.now = now;
  }

  connect(role: "pilot" | "observer" = "pilot"): void {
    this.setStatus("connecting");
    const ws = this.makeSocket(this.url);
    this.socket = ws;
    ws.onopen = () => {
      ws.send(helloMessage(role));
      this.setStatus("open");
    };
    ws.onmessage = (ev) => this.handleMessage(ev.data);
    ws.onclose = () => {
      this.socket = null;
      this.role = null;
      this.setStatus("closed");
    };
    ws.onerror = () => undefined;
  }

  close(): void {
    this.socket?.close();
  }

  get connected(): boolean {
    return this.status === "open";
  }

  /** Send the current draft; buffered-drop when the socket is down. */
  tick(): boolean {
    if (!this.socket || this.status !== "open" || this.role !== "pilot") {
      return false;
    }
    const msg = this.sampler.sample(this.now() / 1000);
    try {
      this.socket.send(JSON.stringify(msg));
      return true;
    } catch {
      return false;
    }
  }

  ping(): void {
    if (!this.socket || this.status !== "open") return;
    const nonce = `p${this.nonce++}`;
    this.pingSent.set(nonce, this.now());
    this.socket.send(JSON.stringify({ type: "ping", nonce }));
  }

  private setStatus(status: ConnectionStatus): void {
    this.status = status;
    this.events.onStatus?.(status);
  }

  private handleMessage(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) {
      this.events.onError?.("bad_server_message", "unparseable frame");
      return;
    }
    switch (msg.type) {
      case "welcome":
        this.role = msg.role;
        this.events.onWelcome?.(msg);
        break;
      case "state":
        this.lastState = msg;
        this.events.onState?.(msg);
        break;
      case "error":
        this.events.onError?.(msg.code, msg.detail);
        break;
      case "pong": {
        const sent = this.pingSent.get(String(msg.nonce));
        if (sent !== undefined) {
          this.rttMs = this.now() - sent;
          this.pingSent.delete(String(msg.nonce));
        }
        break;
      }
    }
  }
}
