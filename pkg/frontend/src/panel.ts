import { FieldErrors, PatchFields, SnapshotMessage } from "./protocol";
import { SessionClient } from "./session";

// Parameter panel: numeric fields for the patchable swarm parameters plus
// transport controls. Validation errors from SessionClient.sendPatch land
// next to their field; the panel never writes to the socket directly.

function numberInput(id: string, label: string, step: string): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "field";
  wrap.htmlFor = id;
  const span = document.createElement("span");
  span.textContent = label;
  const input = document.createElement("input");
  input.type = "number";
  input.id = id;
  input.step = step;
  const err = document.createElement("small");
  err.className = "error";
  err.id = `${id}-error`;
  wrap.append(span, input, err);
  return wrap;
}

export class Panel {
  readonly root: HTMLElement;
  private applied: HTMLElement;

  constructor(private session: SessionClient, readOnly: boolean) {
    this.root = document.createElement("aside");
    this.root.className = "panel";
    this.applied = document.createElement("p");
    this.applied.className = "applied";

    if (readOnly) {
      const note = document.createElement("p");
      note.textContent = "read-only session";
      this.root.append(note);
      this.buildTransport(true);
      return;
    }

    const form = document.createElement("form");
    form.append(
      numberInput("v_ref", "preferred speed (m/s)", "0.1"),
      numberInput("d_ref", "preferred spacing (m)", "0.5"),
      numberInput("mig_heading", "migration heading (deg)", "1"),
      numberInput("mig_speed", "migration speed (m/s)", "0.1"),
    );
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "apply patch";
    form.append(submit, this.applied);
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      this.submit();
    });
    this.root.append(form);
    this.buildTransport(false);
  }

  /** Prefill the form from the session snapshot. */
  fill(snap: SnapshotMessage): void {
    const sw = snap.config.swarm;
    this.setValue("v_ref", sw.v_ref);
    this.setValue("d_ref", sw.d_ref);
    const [n, e] = sw.u_mig;
    this.setValue("mig_heading", Math.round((Math.atan2(e, n) * 180) / Math.PI));
    this.setValue("mig_speed", Math.hypot(n, e, sw.u_mig[2]));
  }

  private setValue(id: string, v: number): void {
    const el = this.root.querySelector<HTMLInputElement>(`#${id}`);
    if (el && document.activeElement !== el) el.value = String(v);
  }

  private readValue(id: string): number | undefined {
    const el = this.root.querySelector<HTMLInputElement>(`#${id}`);
    if (!el || el.value.trim() === "") return undefined;
    return Number(el.value);
  }

  private submit(): void {
    const patch: PatchFields = {};
    const vRef = this.readValue("v_ref");
    const dRef = this.readValue("d_ref");
    if (vRef !== undefined) patch.v_ref = vRef;
    if (dRef !== undefined) patch.d_ref = dRef;
    const heading = this.readValue("mig_heading");
    const speed = this.readValue("mig_speed");
    if (heading !== undefined && speed !== undefined) {
      const rad = (heading * Math.PI) / 180;
      patch.u_mig = [speed * Math.cos(rad), speed * Math.sin(rad), 0];
    }
    const errors = this.session.sendPatch(patch);
    this.showErrors(errors);
    if (Object.keys(errors).length === 0) {
      this.applied.textContent = "sent, waiting for ack";
    }
  }

  showErrors(errors: FieldErrors): void {
    for (const el of this.root.querySelectorAll<HTMLElement>(".error")) {
      el.textContent = "";
    }
    for (const [field, msg] of Object.entries(errors)) {
      const slot =
        this.root.querySelector<HTMLElement>(`#${field.replace(".", "-")}-error`);
      if (slot) slot.textContent = msg;
      else this.applied.textContent = `${field || "patch"}: ${msg}`;
    }
  }

  showAck(applyTick: number): void {
    this.applied.textContent = `applied at tick ${applyTick}`;
  }

  showRejection(reason: string): void {
    this.applied.textContent = `rejected: ${reason}`;
  }

  private buildTransport(readOnly: boolean): void {
    const bar = document.createElement("div");
    bar.className = "transport";
    const mk = (label: string, fn: () => void) => {
      const b = document.createElement("button");
      b.type = "button";
      b.textContent = label;
      b.addEventListener("click", fn);
      bar.append(b);
      return b;
    };
    mk("pause", () => this.session.pause());
    mk("resume", () => this.session.resume());
    if (!readOnly) {
      const rate = document.createElement("input");
      rate.type = "number";
      rate.value = "100";
      rate.title = "ticks per second";
      bar.append(rate);
      mk("set rate", () => this.session.setRate(Number(rate.value)));
      mk("reset", () => this.session.reset());
    }
    this.root.append(bar);
  }
}
