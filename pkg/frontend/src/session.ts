import {
  AckMessage,
  ErrorMessage,
  FieldErrors,
  FrameMessage,
  PatchFields,
  ServerMessage,
  SnapshotMessage,
  validatePatch,
} from "./protocol";

/** The part of a WebSocket the session uses; `ws` in node satisfies it too. */
export interface SocketLike {
  send(data: string): void;
  readyState: number;
}

const OPEN = 1;

export interface SessionEvents {
  onSnapshot?: (snap: SnapshotMessage) => void;
  onAck?: (ack: AckMessage) => void;
  onError?: (err: ErrorMessage) => void;
}

/**
 * Client-side session state fed by raw socket messages.
 *
 * Frames land in a single-slot mailbox: the render loop takes the newest one
 * and anything older is overwritten, never queued. A frame whose tick is not
 * beyond the last accepted one is discarded (reconnects and reordering).
 * Patches are validated before anything is put on the wire; a patch that
 * fails validation is returned to the caller and the socket is not touched.
 */
export class SessionClient {
  snapshot: SnapshotMessage | null = null;
  status = "connecting";
  lastTick = -1;
  framesSeen = 0;
  framesDiscarded = 0;
  lastApplyTick: number | null = null;
  lastServerError: string | null = null;

  private mailbox: FrameMessage | null = null;
  private events: SessionEvents;

  constructor(private socket: SocketLike, events: SessionEvents = {}) {
    this.events = events;
  }

  /** Feed one raw message from the socket. Unknown types are ignored. */
  feed(data: string): void {
    let msg: ServerMessage;
    try {
      msg = JSON.parse(data);
    } catch {
      return;
    }
    if (typeof msg !== "object" || msg === null) return;
    if (msg.type === "snapshot") {
      // a snapshot restarts the tick sequence (initial connect or reset)
      this.snapshot = msg;
      this.status = msg.status;
      this.lastTick = msg.tick;
      this.mailbox = null;
      this.events.onSnapshot?.(msg);
      return;
    }
    if (msg.type === "frame") {
      this.framesSeen += 1;
      if (msg.tick <= this.lastTick) {
        this.framesDiscarded += 1;
        return;
      }
      this.lastTick = msg.tick;
      this.status = msg.status;
      this.mailbox = msg;
      return;
    }
    if (msg.type === "ack") {
      if (msg.cmd === "param_patch" && typeof msg.apply_tick === "number") {
        this.lastApplyTick = msg.apply_tick;
      }
      if (typeof msg.status === "string") this.status = msg.status;
      this.events.onAck?.(msg);
      return;
    }
    if (msg.type === "error") {
      this.lastServerError = msg.reason;
      this.events.onError?.(msg);
    }
  }

  /** Newest pending frame, or null; taking it empties the slot. */
  takeFrame(): FrameMessage | null {
    const f = this.mailbox;
    this.mailbox = null;
    return f;
  }

  get paused(): boolean {
    return this.status === "paused";
  }

  get finished(): boolean {
    return this.status === "finished" || this.status === "aborted";
  }

  private sendControl(msg: Record<string, unknown>): boolean {
    if (this.socket.readyState !== OPEN) return false;
    this.socket.send(JSON.stringify(msg));
    return true;
  }

  /**
   * Validate and submit a parameter patch. Returns the field errors; the
   * message is only sent when the result is empty. Without a snapshot the
   * swarm document is unknown and the patch is refused outright.
   */
  sendPatch(patch: PatchFields): FieldErrors {
    if (!this.snapshot) return { "": "no snapshot received yet" };
    const errors = validatePatch(this.snapshot.config.swarm, patch);
    if (Object.keys(errors).length === 0) {
      if (!this.sendControl({ type: "param_patch", ...patch })) {
        return { "": "socket not open" };
      }
    }
    return errors;
  }

  pause(): boolean {
    return this.sendControl({ type: "pause" });
  }

  resume(): boolean {
    return this.sendControl({ type: "resume" });
  }

  setRate(ticksPerSecond: number): boolean {
    return this.sendControl({ type: "set_rate", ticks_per_second: ticksPerSecond });
  }

  reset(seed?: number): boolean {
    const msg: Record<string, unknown> = { type: "reset" };
    if (seed !== undefined) msg.seed = seed;
    return this.sendControl(msg);
  }
}
