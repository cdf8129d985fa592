// Message types for the wire protocol. The authoritative contract is
// docs/wire-schema.json at the repository root; the test suite validates
// everything this module can emit against it.

export interface ExecutionEvent {
  t_ms: number;
  seq: number;
  kind: string;
  detail: string;
}

export interface RobotState {
  bowl_contents: string[];
  variables_grounded: Record<string, number>;
  variables_native: Record<string, number>;
  arm_phase: string;
  spoon_attached: boolean;
  exec_status: "idle" | "running" | "paused" | "stopped";
}

export interface Clip {
  stmt_index: number;
  var: string;
  raw_value: number;
  clipped_value: number;
}

export interface Insertion {
  position: number;
  seconds: number;
}

export interface Rejection {
  line: number;
  token: string;
  reason: string;
}

export interface SafetyReport {
  clips: Clip[];
  insertions: Insertion[];
  rejections: Rejection[];
}

export interface Exchange {
  user_command: string;
  generated_code: string;
}

export interface ReportMessage {
  type: "report";
  command: string;
  code: string | null;
  report: SafetyReport;
  accepted: boolean;
}

export interface SnapshotMessage {
  type: "snapshot";
  phase: string;
  robot: RobotState;
  history: Exchange[];
  last_report: ReportMessage | null;
  pause_delay_s: number;
  cheat_sheet: string[];
}

export interface EventMessage {
  type: "event";
  event: ExecutionEvent;
}

export interface ErrorMessage {
  type: "error";
  reason: string;
}

export type ServerMessage =
  | SnapshotMessage
  | EventMessage
  | ReportMessage
  | ErrorMessage;

export type InterruptKind = "stop" | "pause" | "resume";

export function commandMessage(text: string) {
  return { type: "command", text } as const;
}

export function interruptMessage(kind: InterruptKind) {
  return { type: "interrupt", kind } as const;
}

export function configSetMessage(key: "pause_delay_s", value: number) {
  return { type: "config_set", key, value } as const;
}

export type ClientMessage =
  | ReturnType<typeof commandMessage>
  | ReturnType<typeof interruptMessage>
  | ReturnType<typeof configSetMessage>;

const SERVER_TYPES = new Set(["snapshot", "event", "report", "error"]);

// Parse one frame; anything that isn't a known server message returns null
// rather than throwing, so one bad frame can't kill the stream handler.
export function parseServerMessage(data: string): ServerMessage | null {
  let value: unknown;
  try {
    value = JSON.parse(data);
  } catch {
    return null;
  }
  if (typeof value !== "object" || value === null) return null;
  const type = (value as { type?: unknown }).type;
  if (typeof type !== "string" || !SERVER_TYPES.has(type)) return null;
  return value as ServerMessage;
}
