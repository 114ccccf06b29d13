// Wire protocol v1 (JSON text frames over a WebSocket).
// The console is a pure protocol client: it renders what the server
// streams and sends commands; no control math lives here.

export const PROTO_VERSION = 1;

export interface CommandToggles {
  spring: boolean;
  haptics: boolean;
}

export interface CommandMessage {
  type: "command";
  seq: number;
  t_client: number;
  lean: number;
  cop: number | null;
  com_disp: number | null;
  arms: { l: number[]; r: number[] };
  toggles: CommandToggles;
}

export interface TelemetryFrame {
  t: number;
  theta_h: number;
  xi_h: number;
  cop: number;
  x_w: number;
  x_w_dot: number;
  theta_r: number;
  xi_r: number;
  box_x: number;
  box_v: number;
  box_contact: boolean;
  hand_x: number;
  target_x: number;
  f_r: number;
  f_hmi: number;
  f_s: number;
  f_ext: number;
  f_ext_scaled: number;
  wheel_effort: number;
  saturated: boolean;
  cop_clamped: boolean;
  singular: boolean;
  linear_regime_violated: boolean;
  balanced: boolean;
  l_q0: number;
  l_q3: number;
  r_q0: number;
  r_q3: number;
  [key: string]: number | boolean;
}

export interface StateMessage {
  type: "state";
  proto: number;
  seq: number;
  t_sim: number;
  frame: TelemetryFrame;
  achieved_rate: number;
}

export interface WelcomeMessage {
  type: "welcome";
  proto: number;
  role: "pilot" | "observer";
  session: string;
  scenario: string;
  config: Record<string, unknown>;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail: string;
}

export interface PongMessage {
  type: "pong";
  nonce: unknown;
  t_server: number;
}

export type ServerMessage = StateMessage | WelcomeMessage | ErrorMessage | PongMessage;

export function helloMessage(role: "pilot" | "observer"): string {
  return JSON.stringify({ type: "hello", proto: PROTO_VERSION, role });
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  const type = (msg as { type?: unknown }).type;
  if (type === "state") {
    const st = msg as StateMessage;
    if (typeof st.seq !== "number" || typeof st.frame !== "object" || st.frame === null) {
      return null;
    }
    return st;
  }
  if (type === "welcome" || type === "error" || type === "pong") {
    return msg as ServerMessage;
  }
  return null;
}
