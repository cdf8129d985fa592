import { beforeEach, describe, expect, it } from "vitest";

import { buildControls } from "../src/main.js";
import { ClientMessage, EventMessage, ReportMessage } from "../src/protocol.js";
import { PanelView } from "../src/view.js";
import { clippedReport, makeSnapshot, pausedSnapshot, rejectedReport, runningSnapshot } from "./fixtures.js";
import { assertWireValid } from "./schema.js";

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "";
  root = document.createElement("div");
  document.body.append(root);
});

function event(kind: string, detail = "", t_ms = 0, seq = 1): EventMessage {
  return { type: "event", event: { t_ms, seq, kind, detail } };
}

function texts(selector: string): string[] {
  return [...root.querySelectorAll(selector)].map((node) => node.textContent ?? "");
}

function setup() {
  const view = new PanelView(root);
  const sent: ClientMessage[] = [];
  const controls = buildControls(root, view, (message) => {
    sent.push(message);
    return true;
  });
  return { view, sent, controls };
}

describe("snapshot rendering", () => {
  it("renders the four bowl labels with their contents", () => {
    const view = new PanelView(root);
    view.apply(makeSnapshot());

    expect(texts("#bowl-grid .bowl-index")).toEqual(["Bowl 0", "Bowl 1", "Bowl 2", "Bowl 3"]);
    expect(texts("#bowl-grid .bowl-content")).toEqual(["blueberries", "granola", "yogurt", "empty"]);
    const empties = [...root.querySelectorAll("#bowl-grid .bowl")].map((cell) =>
      cell.classList.contains("empty"),
    );
    expect(empties).toEqual([false, false, false, true]);
  });

  it("shows grounded and native variable values side by side", () => {
    const view = new PanelView(root);
    view.apply(makeSnapshot());

    const speed = root.querySelector('.dial[data-var="speed"]');
    expect(speed?.querySelector(".dial-value")?.textContent).toBe("2.5 (0.600)");
    const meter = speed?.querySelector("progress") as HTMLProgressElement;
    expect(meter.max).toBe(5);
    expect(meter.value).toBe(2.5);
  });

  it("renders history and the cheat sheet", () => {
    const view = new PanelView(root);
    view.apply(
      makeSnapshot({
        history: [{ user_command: "feed me a bite of bowl 1", generated_code: "obi.feed_bite(1)" }],
      }),
    );

    expect(texts("#history .exchange-command")).toEqual(["feed me a bite of bowl 1"]);
    expect(texts("#history .exchange-code")).toEqual(["obi.feed_bite(1)"]);
    expect(texts("#cheat-sheet li")).toEqual(["Feed me a bite of bowl 1", "Stop"]);
  });

  it("restores the last report on reconnect snapshots", () => {
    const view = new PanelView(root);
    view.apply(makeSnapshot({ last_report: clippedReport() }));

    const pane = root.querySelector("#code-pane") as HTMLElement;
    expect(pane.dataset.accepted).toBe("true");
    expect(pane.textContent).toContain("obi.speed = 5");
  });
});

describe("phase badge", () => {
  const badge = () => root.querySelector("#phase-badge") as HTMLElement;

  it("tracks the snapshot phase", () => {
    const view = new PanelView(root);
    view.apply(makeSnapshot());
    expect(badge().textContent).toBe("awaiting_wake");
    view.apply(runningSnapshot());
    expect(badge().textContent).toBe("executing");
  });

  it("flips on stopped events without waiting for a snapshot", () => {
    const view = new PanelView(root);
    view.apply(runningSnapshot());
    view.apply(event("stopped", "interrupt"));
    expect(badge().textContent).toBe("stopped");
    expect(badge().dataset.phase).toBe("stopped");
  });

  it("follows pause and resume events", () => {
    const view = new PanelView(root);
    view.apply(runningSnapshot());
    view.apply(event("paused", "interrupt remaining_ms=1667"));
    expect(badge().textContent).toBe("paused");
    view.apply(event("resumed", ""));
    expect(badge().textContent).toBe("executing");
  });
});

describe("controls", () => {
  it("keeps STOP live in every state, gates PAUSE and RESUME", () => {
    const { view, controls } = setup();

    // before any snapshot
    expect(controls.stopButton.disabled).toBe(false);
    expect(controls.pauseButton.disabled).toBe(true);
    expect(controls.resumeButton.disabled).toBe(true);

    view.apply(runningSnapshot());
    expect(controls.stopButton.disabled).toBe(false);
    expect(controls.pauseButton.disabled).toBe(false);
    expect(controls.resumeButton.disabled).toBe(true);

    view.apply(pausedSnapshot());
    expect(controls.stopButton.disabled).toBe(false);
    expect(controls.pauseButton.disabled).toBe(true);
    expect(controls.resumeButton.disabled).toBe(false);
  });

  it("emits schema-valid messages for every control", () => {
    const { view, sent, controls } = setup();

    view.apply(runningSnapshot());
    controls.stopButton.click();
    controls.pauseButton.click();
    view.apply(pausedSnapshot());
    controls.resumeButton.click();
    controls.commandInput.value = "feed me a bite of bowl 2";
    controls.sendButton.click();
    controls.delaySlider.value = "7.5";
    controls.delaySlider.dispatchEvent(new Event("change"));

    expect(sent.map((m) => m.type)).toEqual([
      "interrupt",
      "interrupt",
      "interrupt",
      "command",
      "config_set",
    ]);
    for (const message of sent) assertWireValid(message);
    expect(sent[0]).toEqual({ type: "interrupt", kind: "stop" });
    expect(sent[1]).toEqual({ type: "interrupt", kind: "pause" });
    expect(sent[2]).toEqual({ type: "interrupt", kind: "resume" });
    expect(sent[3]).toEqual({ type: "command", text: "feed me a bite of bowl 2" });
    expect(sent[4]).toEqual({ type: "config_set", key: "pause_delay_s", value: 7.5 });
  });

  it("submits on Enter and clears the input only when the send succeeds", () => {
    const { controls, sent } = setup();

    controls.commandInput.value = "  stop  ";
    controls.commandInput.dispatchEvent(new KeyboardEvent("keydown", { key: "Enter" }));
    expect(sent).toEqual([{ type: "command", text: "stop" }]);
    expect(controls.commandInput.value).toBe("");

    controls.commandInput.value = "   ";
    controls.sendButton.click();
    expect(sent).toHaveLength(1); // blank input never hits the wire
  });

  it("keeps the typed command when the connection is down", () => {
    const view = new PanelView(root);
    const controls = buildControls(root, view, () => false);

    controls.commandInput.value = "feed me";
    controls.sendButton.click();
    expect(controls.commandInput.value).toBe("feed me");

    controls.stopButton.click();
    expect(controls.stopButton.classList.contains("pending")).toBe(false);
  });

  it("marks STOP pending until a stopped snapshot arrives", () => {
    const { view, controls } = setup();

    view.apply(runningSnapshot());
    controls.stopButton.click();
    expect(controls.stopButton.classList.contains("pending")).toBe(true);

    const snapshot = makeSnapshot({ phase: "awaiting_wake" });
    snapshot.robot.exec_status = "stopped";
    view.apply(snapshot);
    expect(controls.stopButton.classList.contains("pending")).toBe(false);
  });

  it("syncs the delay slider from snapshots", () => {
    const { view, controls } = setup();

    const snapshot = makeSnapshot({ pause_delay_s: 2.5 });
    view.apply(snapshot);
    expect(controls.delaySlider.value).toBe("2.5");
    expect(controls.delayLabel.textContent).toBe("inter-bite pause: 2.5 s");
  });
});

describe("event log", () => {
  it("preserves server order", () => {
    const view = new PanelView(root);
    const kinds = ["announce", "segment_start", "sleep_start", "sleep_end", "segment_end"];
    kinds.forEach((kind, i) => view.apply(event(kind, `detail ${i}`, i * 100, i + 1)));

    expect(texts("#event-log li .event-kind")).toEqual(kinds);
    expect(texts("#event-log li .event-t")).toEqual(["0 ms", "100 ms", "200 ms", "300 ms", "400 ms"]);
  });

  it("toasts busy and error cues but not routine announces", () => {
    const view = new PanelView(root);
    const toast = root.querySelector("#toast") as HTMLElement;

    view.apply(event("announce", "[beep]"));
    expect(toast.classList.contains("hidden")).toBe(true);

    view.apply(event("announce", "Busy executing, say stop or pause"));
    expect(toast.classList.contains("hidden")).toBe(false);
    expect(toast.textContent).toBe("Busy executing, say stop or pause");

    view.apply({ type: "error", reason: "schema: unknown interrupt kind" });
    expect(toast.textContent).toBe("schema: unknown interrupt kind");
  });
});

describe("safety report pane", () => {
  const pane = () => root.querySelector("#code-pane") as HTMLElement;

  it("highlights clipped lines with the raw and clipped values", () => {
    const view = new PanelView(root);
    view.apply(clippedReport());

    expect(pane().dataset.accepted).toBe("true");
    expect(pane().querySelector(".verdict")?.textContent).toBe("accepted");
    const line = pane().querySelector(".code-line.clip") as HTMLElement;
    expect(line.textContent).toBe("obi.speed = 5");
    expect(line.title).toBe("speed: 9 clipped to 5");
  });

  it("marks inserted pause lines", () => {
    const view = new PanelView(root);
    const report: ReportMessage = {
      type: "report",
      command: "feed me two bites of bowl 0",
      code: "obi.feed_bite(0)\ntime.sleep(4)\nobi.feed_bite(0)",
      report: { clips: [], insertions: [{ position: 1, seconds: 4.0 }], rejections: [] },
      accepted: true,
    };
    view.apply(report);

    const lines = [...pane().querySelectorAll(".code-line")];
    expect(lines).toHaveLength(3);
    expect(lines[1].classList.contains("inserted")).toBe(true);
    expect(lines[0].classList.contains("inserted")).toBe(false);
  });

  it("lists rejections for a refused command", () => {
    const view = new PanelView(root);
    view.apply(rejectedReport());

    expect(pane().dataset.accepted).toBe("false");
    expect(pane().querySelector(".verdict")?.textContent).toBe("rejected");
    expect(texts("#code-pane .rejection")).toEqual(["line 1: imports are not allowed (import)"]);
    expect(pane().querySelector(".code-line")).toBeNull(); // rejected code is never shown
  });
});
