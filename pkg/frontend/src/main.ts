import { PanelConnection } from "./connection.js";
import { commandMessage, configSetMessage, InterruptKind, interruptMessage } from "./protocol.js";
import { PanelView } from "./view.js";

// Controls live here rather than in PanelView so the view stays a pure
// function of server messages and the tests can drive it directly.

export interface Controls {
  stopButton: HTMLButtonElement;
  pauseButton: HTMLButtonElement;
  resumeButton: HTMLButtonElement;
  commandInput: HTMLInputElement;
  sendButton: HTMLButtonElement;
  delaySlider: HTMLInputElement;
  delayLabel: HTMLElement;
}

export function buildControls(
  root: HTMLElement,
  view: PanelView,
  send: (message: ReturnType<typeof commandMessage> | ReturnType<typeof interruptMessage> | ReturnType<typeof configSetMessage>) => boolean,
): Controls {
  const bar = document.createElement("div");
  bar.className = "controls";
  bar.id = "controls";

  const stopButton = button("STOP", "btn-stop");
  const pauseButton = button("PAUSE", "btn-pause");
  const resumeButton = button("RESUME", "btn-resume");

  const commandInput = document.createElement("input");
  commandInput.id = "command-input";
  commandInput.placeholder = "type a command, e.g. feed me a bite of bowl 1";
  const sendButton = button("Send", "btn-send");

  const delaySlider = document.createElement("input");
  delaySlider.type = "range";
  delaySlider.id = "delay-slider";
  delaySlider.min = "0";
  delaySlider.max = "15";
  delaySlider.step = "0.5";
  const delayLabel = document.createElement("span");
  delayLabel.id = "delay-label";

  const interrupt = (kind: InterruptKind) => () => {
    if (send(interruptMessage(kind)) && kind === "stop") {
      stopButton.classList.add("pending"); // cleared when the stopped event lands
    }
  };
  stopButton.onclick = interrupt("stop");
  pauseButton.onclick = interrupt("pause");
  resumeButton.onclick = interrupt("resume");

  const submit = () => {
    const text = commandInput.value.trim();
    if (text && send(commandMessage(text))) commandInput.value = "";
  };
  sendButton.onclick = submit;
  commandInput.onkeydown = (event) => {
    if (event.key === "Enter") submit();
  };

  delaySlider.onchange = () => {
    send(configSetMessage("pause_delay_s", Number(delaySlider.value)));
  };

  const refresh = () => {
    const status = view.execStatus;
    // STOP stays live in every phase: worst case the server answers with
    // an error message, best case it halts the arm within a tick.
    stopButton.disabled = false;
    pauseButton.disabled = status !== "running";
    resumeButton.disabled = status !== "paused";
    if (view.snapshot) {
      delaySlider.value = String(view.snapshot.pause_delay_s);
      delayLabel.textContent = `inter-bite pause: ${view.snapshot.pause_delay_s} s`;
    }
    if (status === "stopped" || status === "idle") stopButton.classList.remove("pending");
  };
  view.setPhaseListener(refresh);
  refresh();

  const delayWrap = document.createElement("label");
  delayWrap.className = "delay-control";
  delayWrap.append(delayLabel, delaySlider);

  bar.append(stopButton, pauseButton, resumeButton, commandInput, sendButton, delayWrap);
  root.prepend(bar);
  return { stopButton, pauseButton, resumeButton, commandInput, sendButton, delaySlider, delayLabel };
}

function button(label: string, id: string): HTMLButtonElement {
  const node = document.createElement("button");
  node.textContent = label;
  node.id = id;
  return node;
}

export function boot(root: HTMLElement): void {
  const view = new PanelView(root);
  const url = `ws://${location.host}/`;
  const connection = new PanelConnection(url, {
    onMessage: (message) => view.apply(message),
    onState: (state) => view.setConnectionState(state),
  });
  buildControls(root, view, (message) => {
    const sent = connection.send(message);
    if (!sent) view.showToast("not connected");
    return sent;
  });
  connection.connect();
}

// in the browser the bundle boots itself; tests import the pieces instead
if (typeof document !== "undefined" && document.getElementById("app")) {
  boot(document.getElementById("app")!);
}
