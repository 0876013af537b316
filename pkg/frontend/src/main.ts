import "./style.css";
import { Panel } from "./panel";
import { MetricsRow } from "./protocol";
import { SessionClient } from "./session";
import { Series, sparklinePath } from "./sparkline";
import { TrailStore } from "./trails";
import { Camera, drawScene, fitCamera } from "./view";

const TRAIL_POINTS = 300;

function sparklineBox(title: string): { root: HTMLElement; path: SVGPathElement; value: HTMLElement } {
  const root = document.createElement("div");
  root.className = "spark";
  const label = document.createElement("span");
  label.textContent = title;
  const value = document.createElement("b");
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", "0 0 160 36");
  const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
  svg.append(path);
  root.append(label, value, svg);
  return { root, path, value };
}

function main() {
  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const sidebar = document.getElementById("sidebar")!;

  const params = new URLSearchParams(location.search);
  const readOnly = params.get("readonly") === "1";

  const url = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
  const socket = new WebSocket(url);

  const orderSeries = new Series();
  const connSeries = new Series();
  const trails = new TrailStore(TRAIL_POINTS);
  const orderBox = sparklineBox("order");
  const connBox = sparklineBox("connectivity");

  let panel: Panel | null = null;
  let camera: Camera | null = null;

  const session = new SessionClient(socket, {
    onSnapshot: (snap) => {
      trails.clear();
      if (!panel) {
        panel = new Panel(session, readOnly);
        sidebar.append(panel.root, orderBox.root, connBox.root);
      }
      panel.fill(snap);
      document.title = `swarmsim live (${snap.config.swarm.n_agents} agents)`;
    },
    onAck: (ack) => {
      if (ack.cmd === "param_patch" && typeof ack.apply_tick === "number") {
        panel?.showAck(ack.apply_tick);
      }
    },
    onError: (err) => {
      panel?.showRejection(err.reason);
    },
  });

  socket.addEventListener("message", (ev) => session.feed(String(ev.data)));
  socket.addEventListener("close", () => {
    document.getElementById("status")!.textContent = "disconnected";
  });

  function pushMetrics(m: MetricsRow | null) {
    if (!m) return;
    orderSeries.push(m.phi_order);
    connSeries.push(m.phi_connectivity);
    orderBox.value.textContent = m.phi_order.toFixed(3);
    connBox.value.textContent = m.phi_connectivity.toFixed(3);
    orderBox.path.setAttribute("d", sparklinePath(orderSeries.toArray(), 160, 36));
    connBox.path.setAttribute("d", sparklinePath(connSeries.toArray(), 160, 36));
  }

  function resize() {
    canvas.width = canvas.clientWidth * devicePixelRatio;
    canvas.height = canvas.clientHeight * devicePixelRatio;
  }
  resize();
  addEventListener("resize", resize);

  let lastDrawn = -1;
  function render() {
    const frame = session.takeFrame();
    const snap = session.snapshot;
    if (frame && snap) {
      trails.push(frame.agents);
      pushMetrics(frame.metrics);
      camera = fitCamera(frame.agents, snap.map, canvas.width, canvas.height, camera);
      drawScene(ctx, {
        agents: frame.agents,
        map: snap.map,
        trails,
        paused: session.paused,
        status: frame.status,
        tick: frame.tick,
        t: frame.t,
      }, camera);
      lastDrawn = frame.tick;
    } else if (snap && lastDrawn < 0) {
      // nothing streamed yet: draw the snapshot once
      trails.push(snap.agents);
      pushMetrics(snap.metrics);
      camera = fitCamera(snap.agents, snap.map, canvas.width, canvas.height, camera);
      drawScene(ctx, {
        agents: snap.agents,
        map: snap.map,
        trails,
        paused: session.paused,
        status: snap.status,
        tick: snap.tick,
        t: snap.t,
      }, camera);
      lastDrawn = snap.tick;
    }
    requestAnimationFrame(render);
  }
  requestAnimationFrame(render);
}

addEventListener("load", main);
