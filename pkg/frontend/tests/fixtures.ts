import { ReportMessage, SnapshotMessage } from "../src/protocol.js";

export function makeSnapshot(overrides: Partial<SnapshotMessage> = {}): SnapshotMessage {
  return {
    type: "snapshot",
    phase: "awaiting_wake",
    robot: {
      bowl_contents: ["blueberries", "granola", "yogurt", "empty"],
      variables_grounded: { speed: 2.5, acceleration: 2.5, scoop_depth: 2.5 },
      variables_native: { speed: 0.6, acceleration: 0.6, scoop_depth: 30.0 },
      arm_phase: "home",
      spoon_attached: true,
      exec_status: "idle",
    },
    history: [],
    last_report: null,
    pause_delay_s: 4.0,
    cheat_sheet: ["Feed me a bite of bowl 1", "Stop"],
    ...overrides,
  };
}

export function runningSnapshot(): SnapshotMessage {
  const snapshot = makeSnapshot({ phase: "executing" });
  snapshot.robot.exec_status = "running";
  return snapshot;
}

export function pausedSnapshot(): SnapshotMessage {
  const snapshot = makeSnapshot({ phase: "paused" });
  snapshot.robot.exec_status = "paused";
  return snapshot;
}

export function clippedReport(): ReportMessage {
  return {
    type: "report",
    command: "set the speed to 9",
    code: "obi.speed = 5",
    report: {
      clips: [{ stmt_index: 0, var: "speed", raw_value: 9.0, clipped_value: 5.0 }],
      insertions: [],
      rejections: [],
    },
    accepted: true,
  };
}

export function rejectedReport(): ReportMessage {
  return {
    type: "report",
    command: "run diagnostics",
    code: "import os",
    report: {
      clips: [],
      insertions: [],
      rejections: [{ line: 1, token: "import", reason: "imports are not allowed" }],
    },
    accepted: false,
  };
}
