// DOM view. Everything rendered here derives from server messages; there is
// no client-side robot model to drift out of sync.

import {
  EventMessage,
  ReportMessage,
  ServerMessage,
  SnapshotMessage,
} from "./protocol.js";

export type ConnState = "connecting" | "open" | "lost";

const DIAL_VARS = ["speed", "acceleration", "scoop_depth"];
const GROUNDED_MAX = 5;

// announce cues that deserve a toast, not just a log line
const TOAST_PREFIXES = ["Busy executing", "Sorry,", "Nothing is running"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class PanelView {
  readonly root: HTMLElement;
  snapshot: SnapshotMessage | null = null;

  private phaseBadge: HTMLElement;
  private connBanner: HTMLElement;
  private bowlGrid: HTMLElement;
  private dials: HTMLElement;
  private codePane: HTMLElement;
  private eventLog: HTMLElement;
  private historyList: HTMLElement;
  private cheatSheet: HTMLElement;
  private toastBox: HTMLElement;
  private onPhaseChange: (() => void) | null = null;

  constructor(root: HTMLElement) {
    this.root = root;

    const header = el("header", "panel-header");
    this.phaseBadge = el("span", "phase-badge", "connecting");
    this.phaseBadge.id = "phase-badge";
    this.connBanner = el("div", "conn-banner hidden", "connection lost, retrying...");
    this.connBanner.id = "conn-banner";
    header.append(el("h1", "", "voicepilot"), this.phaseBadge);

    this.bowlGrid = el("div", "bowl-grid");
    this.bowlGrid.id = "bowl-grid";
    this.dials = el("div", "dials");
    this.dials.id = "dials";
    this.codePane = el("div", "code-pane");
    this.codePane.id = "code-pane";
    this.eventLog = el("ul", "event-log");
    this.eventLog.id = "event-log";
    this.historyList = el("ul", "history");
    this.historyList.id = "history";
    this.cheatSheet = el("ul", "cheat-sheet");
    this.cheatSheet.id = "cheat-sheet";
    this.toastBox = el("div", "toast hidden");
    this.toastBox.id = "toast";

    const main = el("div", "panel-main");
    const left = el("div", "panel-col");
    left.append(
      section("Bowls", this.bowlGrid),
      section("Variables", this.dials),
      section("Last program", this.codePane),
    );
    const middle = el("div", "panel-col");
    middle.append(section("Events", this.eventLog), section("History", this.historyList));
    const right = el("div", "panel-col");
    right.append(section("Try saying", this.cheatSheet));
    main.append(left, middle, right);

    root.append(header, this.connBanner, main, this.toastBox);
  }

  // main.ts hooks this to refresh button enablement after each message
  setPhaseListener(fn: () => void): void {
    this.onPhaseChange = fn;
  }

  setConnectionState(state: ConnState): void {
    this.connBanner.classList.toggle("hidden", state === "open");
    if (state !== "open") this.setBadge(state);
    this.onPhaseChange?.();
  }

  apply(message: ServerMessage): void {
    switch (message.type) {
      case "snapshot":
        this.applySnapshot(message);
        break;
      case "event":
        this.applyEvent(message);
        break;
      case "report":
        this.renderReport(message);
        break;
      case "error":
        this.showToast(message.reason);
        break;
    }
    this.onPhaseChange?.();
  }

  get execStatus(): string {
    return this.snapshot?.robot.exec_status ?? "idle";
  }

  private setBadge(text: string): void {
    this.phaseBadge.textContent = text;
    this.phaseBadge.dataset.phase = text;
  }

  private applySnapshot(snapshot: SnapshotMessage): void {
    this.snapshot = snapshot;
    this.setBadge(snapshot.phase);

    this.bowlGrid.replaceChildren(
      ...snapshot.robot.bowl_contents.map((content, i) => {
        const cell = el("div", "bowl");
        cell.append(el("div", "bowl-index", `Bowl ${i}`), el("div", "bowl-content", content));
        if (content.trim().toLowerCase() === "empty") cell.classList.add("empty");
        return cell;
      }),
    );

    this.dials.replaceChildren(
      ...DIAL_VARS.filter((name) => name in snapshot.robot.variables_grounded).map((name) => {
        const grounded = snapshot.robot.variables_grounded[name];
        const native = snapshot.robot.variables_native[name];
        const row = el("div", "dial");
        row.dataset.var = name;
        const meter = el("progress") as HTMLProgressElement;
        meter.max = GROUNDED_MAX;
        meter.value = grounded;
        row.append(
          el("span", "dial-name", name),
          meter,
          el("span", "dial-value", `${grounded} (${native.toFixed(3)})`),
        );
        return row;
      }),
    );

    this.historyList.replaceChildren(
      ...snapshot.history.map((exchange) => {
        const item = el("li", "exchange");
        item.append(
          el("div", "exchange-command", exchange.user_command),
          el("pre", "exchange-code", exchange.generated_code),
        );
        return item;
      }),
    );

    this.cheatSheet.replaceChildren(
      ...snapshot.cheat_sheet.map((line) => el("li", "", line)),
    );

    if (snapshot.last_report) this.renderReport(snapshot.last_report);
  }

  private applyEvent(message: EventMessage): void {
    const event = message.event;
    const item = el("li", `event kind-${event.kind}`);
    item.append(
      el("span", "event-t", `${event.t_ms} ms`),
      el("span", "event-kind", event.kind),
      el("span", "event-detail", event.detail),
    );
    this.eventLog.append(item); // append-only: server order is the log order
    item.scrollIntoView?.({ block: "nearest" });

    // between snapshots, execution events move the badge so STOP feedback
    // is immediate
    if (event.kind === "stopped") this.setBadge("stopped");
    else if (event.kind === "paused") this.setBadge("paused");
    else if (event.kind === "resumed") this.setBadge("executing");

    if (event.kind === "announce" && TOAST_PREFIXES.some((p) => event.detail.startsWith(p))) {
      this.showToast(event.detail);
    }
  }

  private renderReport(report: ReportMessage): void {
    this.codePane.replaceChildren();
    this.codePane.dataset.accepted = String(report.accepted);
    this.codePane.append(el("div", "report-command", `"${report.command}"`));

    if (!report.accepted) {
      const box = el("div", "rejections");
      for (const rejection of report.report.rejections) {
        box.append(
          el(
            "div",
            "rejection",
            `line ${rejection.line}: ${rejection.reason} (${rejection.token})`,
          ),
        );
      }
      this.codePane.append(el("div", "verdict rejected", "rejected"), box);
      return;
    }

    const clipped = new Map(report.report.clips.map((c) => [c.stmt_index, c]));
    const inserted = new Set(report.report.insertions.map((i) => i.position));
    const pre = el("pre", "code");
    const lines = (report.code ?? "").split("\n");
    lines.forEach((line, i) => {
      const span = el("span", "code-line", line);
      if (clipped.has(i)) {
        const clip = clipped.get(i)!;
        span.classList.add("clip");
        span.title = `${clip.var}: ${clip.raw_value} clipped to ${clip.clipped_value}`;
      }
      if (inserted.has(i)) span.classList.add("inserted");
      pre.append(span, document.createTextNode("\n"));
    });
    this.codePane.append(el("div", "verdict accepted", "accepted"), pre);
  }

  showToast(text: string): void {
    this.toastBox.textContent = text;
    this.toastBox.classList.remove("hidden");
    setTimeout(() => this.toastBox.classList.add("hidden"), 4000);
  }
}

function section(title: string, body: HTMLElement): HTMLElement {
  const wrap = el("section", "panel-section");
  wrap.append(el("h2", "", title), body);
  return wrap;
}
