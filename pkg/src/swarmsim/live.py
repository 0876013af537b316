"""Live-steering server: stream frames to browsers, accept control messages.

One simulation task owns the world and paces it against the wall clock
(default: real time).  Each connected client gets a one-slot mailbox;
when a client lags, old frames are replaced, never queued, so a slow
consumer cannot stall the tick loop.

Protocol (text JSON over one websocket per client):

  server -> client
    snapshot  full session state on connect and after reset: schema,
              config echo, obstacle map with digest, agent states,
              latest metrics, status
    frame     tick, t, per-agent [pn,pe,pd,vn,ve,vd], metrics row for
              exactly that tick (or null between metric strides), status
    ack       reply to an accepted control message
    error     reply to a rejected or malformed message

  client -> server
    {"type": "param_patch", "v_ref"?, "d_ref"?, "u_mig"?, "gains_olfati_saber"?,
     "gains_vasarhelyi"?}          applied at the next tick boundary
    {"type": "pause"} {"type": "resume"}
    {"type": "reset", "seed"?}     rebuild the world, optionally reseeded
    {"type": "set_rate", "ticks_per_second": float}

Applied patches are logged with their actual tick, so replaying them
through engine.run reproduces the session's metric series exactly.
"""

from __future__ import annotations

import asyncio
import contextlib
import copy
import hashlib
import json
import time
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .config import to_dict
from .core import SimConfig, SwarmParams
from .dynamics import NumericBlowupError, QuadParams
from .engine import ParamPatch, PatchError, World, apply_patch
from .record import metrics_csv_text

PROTOCOL_VERSION = 1

_PLACEHOLDER = """<!doctype html>
<html><head><title>swarmsim live</title></head>
<body style="font-family: sans-serif; margin: 3em;">
<h2>swarmsim live server</h2>
<p>The browser UI bundle is not built. Endpoints that work right now:</p>
<ul>
<li><code>/ws</code> &mdash; websocket frame stream and controls</li>
<li><code>/api/session</code> &mdash; session status and config echo</li>
<li><code>/api/metrics</code> &mdash; metric series as CSV</li>
<li><code>/api/patches</code> &mdash; applied parameter patches</li>
</ul>
<p>Build the UI with <code>npm run build</code> in <code>frontend/</code>
and restart, or pass <code>--ui-dir</code>.</p>
</body></html>
"""


def _map_payload(world: World) -> Optional[dict]:
    if world.omap is None:
        return None
    rows = [[o.center_n, o.center_e, o.r_obs] for o in world.omap.obstacles]
    digest = hashlib.sha256(json.dumps(rows).encode()).hexdigest()[:12]
    return {"obstacles": rows, "digest": digest}


class LiveSession:
    """Owns the world, the pacing loop, and the client mailboxes."""

    def __init__(self, cfg: SimConfig, sp: SwarmParams,
                 qp: Optional[QuadParams] = None, frame_rate: float = 30.0):
        self._cfg0 = copy.deepcopy(cfg)
        self._sp0 = copy.deepcopy(sp)
        self._qp0 = copy.deepcopy(qp) if qp is not None else QuadParams()
        self.frame_rate = max(0.1, frame_rate)
        self.ticks_per_second = 1.0 / cfg.dt        # real-time pacing
        self.paused = False
        self.aborted: Optional[dict] = None
        self.world = World(self._cfg0, self._sp0, self._qp0)
        self.total_ticks = self.world.cfg.n_ticks()
        self.finished = False
        self._clients: dict[int, asyncio.Queue] = {}
        self._next_client = 0
        self._map_payload = _map_payload(self.world)

    # -- client registry ----------------------------------------------------

    def register(self) -> tuple[int, asyncio.Queue]:
        cid = self._next_client
        self._next_client += 1
        q: asyncio.Queue = asyncio.Queue(maxsize=1)
        self._clients[cid] = q
        return cid, q

    def unregister(self, cid: int) -> None:
        self._clients.pop(cid, None)

    def _broadcast(self, text: str) -> None:
        for q in self._clients.values():
            if q.full():
                with contextlib.suppress(asyncio.QueueEmpty):
                    q.get_nowait()
            with contextlib.suppress(asyncio.QueueFull):
                q.put_nowait(text)

    # -- message builders ---------------------------------------------------

    def status(self) -> str:
        if self.aborted:
            return "aborted"
        if self.finished:
            return "finished"
        return "paused" if self.paused else "running"

    def _agents(self) -> list:
        return np.hstack([self.world.positions, self.world.velocities]).tolist()

    def _metrics_for_tick(self, tick: int) -> Optional[dict]:
        frames = self.world.metrics
        if not frames:
            return None
        t = tick * self.world.cfg.dt
        last = frames[-1]
        if abs(last.t - t) > 1e-12:
            return None
        return dict(zip(last.header(), last.as_row()))

    def snapshot_message(self) -> dict:
        tick = self.world.tick_index
        return {
            "type": "snapshot",
            "schema": PROTOCOL_VERSION,
            "tick": tick,
            "t": tick * self.world.cfg.dt,
            "total_ticks": self.total_ticks,
            "status": self.status(),
            "frame_rate": self.frame_rate,
            "config": to_dict(self.world.cfg, self.world.sp, self.world.qp),
            "map": self._map_payload,
            "agents": self._agents(),
            "metrics": self._metrics_for_tick(tick),
        }

    def _frame_message(self, tick: int, agents: list) -> dict:
        return {
            "type": "frame",
            "schema": PROTOCOL_VERSION,
            "tick": tick,
            "t": tick * self.world.cfg.dt,
            "status": self.status(),
            "agents": agents,
            "metrics": self._metrics_for_tick(tick),
        }

    # -- controls -----------------------------------------------------------

    def handle_control(self, text: str) -> dict:
        try:
            msg = json.loads(text)
        except json.JSONDecodeError as exc:
            return {"type": "error", "reason": f"not valid JSON: {exc}"}
        if not isinstance(msg, dict) or "type" not in msg:
            return {"type": "error", "reason": "message must be an object with a 'type'"}
        kind = msg["type"]

        if kind == "param_patch":
            try:
                patch = ParamPatch.from_dict(
                    {k: v for k, v in msg.items() if k != "type"})
                patch.apply_tick = self.world.tick_index + 1
                apply_patch(self.world.sp, patch)   # dry run, validates
            except (PatchError, TypeError, ValueError) as exc:
                return {"type": "error", "cmd": "param_patch", "reason": str(exc)}
            self.world.submit_patch(patch)
            return {"type": "ack", "cmd": "param_patch",
                    "apply_tick": patch.apply_tick}

        if kind == "pause":
            self.paused = True
            return {"type": "ack", "cmd": "pause", "status": self.status()}

        if kind == "resume":
            self.paused = False
            return {"type": "ack", "cmd": "resume", "status": self.status()}

        if kind == "set_rate":
            try:
                rate = float(msg["ticks_per_second"])
            except (KeyError, TypeError, ValueError):
                return {"type": "error", "cmd": "set_rate",
                        "reason": "needs a numeric 'ticks_per_second'"}
            if not rate > 0:
                return {"type": "error", "cmd": "set_rate",
                        "reason": "ticks_per_second must be > 0"}
            self.ticks_per_second = rate
            return {"type": "ack", "cmd": "set_rate",
                    "ticks_per_second": rate}

        if kind == "reset":
            seed = msg.get("seed")
            try:
                self.reset(None if seed is None else int(seed))
            except (TypeError, ValueError) as exc:
                return {"type": "error", "cmd": "reset", "reason": str(exc)}
            return {"type": "ack", "cmd": "reset",
                    "seed": self.world.cfg.rng_seed}

        return {"type": "error", "reason": f"unknown message type {kind!r}"}

    def reset(self, seed: Optional[int] = None) -> None:
        cfg = copy.deepcopy(self._cfg0)
        if seed is not None:
            cfg.rng_seed = seed
        self.world = World(cfg, self._sp0, self._qp0)
        self.total_ticks = self.world.cfg.n_ticks()
        self.finished = False
        self.aborted = None
        self.paused = False
        self._map_payload = _map_payload(self.world)
        self._broadcast(json.dumps(self.snapshot_message()))

    # -- pacing loop --------------------------------------------------------

    def _frame_stride(self) -> int:
        return max(1, round(self.ticks_per_second / self.frame_rate))

    def _advance_one(self) -> None:
        tick = self.world.tick_index
        send = tick % self._frame_stride() == 0
        agents = self._agents() if send else None
        try:
            self.world.tick()
        except NumericBlowupError as exc:
            self.aborted = {"tick": self.world.tick_index, "reason": str(exc)}
            self._broadcast(json.dumps(
                {"type": "frame", "schema": PROTOCOL_VERSION,
                 "tick": self.world.tick_index,
                 "t": self.world.t, "status": "aborted",
                 "agents": self._agents(), "metrics": None}))
            return
        if send:
            self._broadcast(json.dumps(self._frame_message(tick, agents)))
        if self.world.tick_index >= self.total_ticks:
            self.world.close_series()
            self.finished = True
            self._broadcast(json.dumps(self._frame_message(
                self.world.tick_index, self._agents())))

    async def run_loop(self) -> None:
        origin = time.perf_counter()
        origin_tick = self.world.tick_index
        while True:
            if self.paused or self.finished or self.aborted:
                await asyncio.sleep(0.02)
                origin = time.perf_counter()
                origin_tick = self.world.tick_index
                continue
            elapsed = time.perf_counter() - origin
            due = int(elapsed * self.ticks_per_second) - (
                self.world.tick_index - origin_tick)
            if due <= 0:
                await asyncio.sleep(min(0.02, 1.0 / self.ticks_per_second))
                continue
            for _ in range(min(due, 1000)):
                if self.finished or self.aborted:
                    break
                self._advance_one()
            await asyncio.sleep(0)


def create_app(cfg: SimConfig, sp: SwarmParams, qp: Optional[QuadParams] = None,
               frame_rate: float = 30.0, ui_dir=None) -> FastAPI:
    """Assemble the FastAPI app around one LiveSession."""
    session = LiveSession(cfg, sp, qp, frame_rate=frame_rate)

    @contextlib.asynccontextmanager
    async def lifespan(app):
        task = asyncio.create_task(session.run_loop())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(lifespan=lifespan)
    app.state.session = session

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        cid, q = session.register()
        await websocket.send_text(json.dumps(session.snapshot_message()))

        async def pump():
            while True:
                await websocket.send_text(await q.get())

        sender = asyncio.create_task(pump())
        try:
            while True:
                text = await websocket.receive_text()
                await websocket.send_text(json.dumps(session.handle_control(text)))
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sender
            session.unregister(cid)

    @app.get("/api/session")
    async def api_session():
        return JSONResponse({
            "schema": PROTOCOL_VERSION,
            "tick": session.world.tick_index,
            "t": session.world.t,
            "total_ticks": session.total_ticks,
            "status": session.status(),
            "config": to_dict(session.world.cfg, session.world.sp,
                              session.world.qp),
            "map": session._map_payload,
        })

    @app.get("/api/metrics")
    async def api_metrics():
        return PlainTextResponse(metrics_csv_text(list(session.world.metrics)),
                                 media_type="text/csv")

    @app.get("/api/patches")
    async def api_patches():
        return JSONResponse({
            "applied": list(session.world.applied_patches),
            "rejected": list(session.world.rejected_patches),
        })

    ui = Path(ui_dir) if ui_dir else Path("frontend") / "dist"
    if ui.is_dir():
        app.mount("/ui", StaticFiles(directory=ui, html=True), name="ui")

        @app.get("/")
        async def root_redirect():
            return HTMLResponse(
                '<meta http-equiv="refresh" content="0; url=/ui/">')
    else:
        @app.get("/")
        async def root_placeholder():
            return HTMLResponse(_PLACEHOLDER)

    return app
