"""Real-time teleoperation server.

One asyncio task owns the world and steps it at wall-clock rate in bursts
of ``steps_per_tick`` (500 Hz simulation advanced at the 50 Hz stream
cadence); network I/O communicates with it only through last-wins
mailboxes, so a slow client can never stall the loop.  The newest command
is zero-order held between arrivals.  One pilot drives at a time; later
connections become read-only observers until the pilot leaves.

State frames go out at the stream rate through per-client queues of depth
one (latest wins).  With ``record`` set, every applied command and every
telemetry row is logged for deterministic replay.
"""

from __future__ import annotations

import asyncio
import logging
import mimetypes
import os
import time
import uuid
from http import HTTPStatus
from pathlib import Path

from websockets.asyncio.server import serve
from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Response

from ..config import Config
from ..sim.engine import SimEngine
from ..sim.scenario import ScenarioConfig
from ..sim.world import SimulationDiverged
from . import protocol
from .record import SessionRecorder
from .session import resolve_command

log = logging.getLogger("telesim.service")


def _configure_logging() -> None:
    level = os.environ.get("TELESIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


class TeleopServer:
    def __init__(
        self,
        config: Config,
        scenario: ScenarioConfig,
        host: str = "127.0.0.1",
        port: int = 8765,
        record_path: str | None = None,
        static_dir: str | Path | None = None,
        stream_hz: float = 50.0,
    ):
        self.config = config
        self.scenario = scenario
        self.host = host
        self.port = port
        self.static_dir = Path(static_dir) if static_dir else None
        self.engine = SimEngine(
            config.human, config.robot, config.support_polygon,
            config.retarget, scenario,
        )
        self.world = self.engine.initial_world()
        self.steps_per_tick = max(1, int(round(1.0 / (stream_hz * scenario.dt))))
        self.tick = self.steps_per_tick * scenario.dt
        self._recorder = None
        if record_path:
            self._recorder = SessionRecorder(
                record_path, config, scenario, self.engine.kernel.KERNEL_NAME
            )
        self._clients: dict = {}
        self._pilot = None
        self._incoming: dict | None = None
        self._applied: dict | None = None
        self._f_hmi = 0.0
        self._state_seq = 0
        self._achieved_rate = 0.0
        self._running = False
        self._server = None
        self._sim_task = None
        self.session_id = uuid.uuid4().hex[:12]

    # -- lifecycle ----------------------------------------------------------

    async def start(self) -> None:
        _configure_logging()
        self._running = True
        self._server = await serve(
            self._handler, self.host, self.port,
            process_request=self._process_request,
        )
        sock = next(iter(self._server.sockets))
        self.port = sock.getsockname()[1]
        self._sim_task = asyncio.get_running_loop().create_task(self._sim_loop())
        log.info("serving on %s:%d (scenario %s)", self.host, self.port, self.scenario.kind)

    async def stop(self) -> None:
        self._running = False
        if self._sim_task:
            self._sim_task.cancel()
            try:
                await self._sim_task
            except asyncio.CancelledError:
                pass
        if self._server:
            self._server.close()
            await self._server.wait_closed()
        if self._recorder:
            self._recorder.close()

    async def serve_forever(self) -> None:
        await self.start()
        try:
            await asyncio.Future()
        finally:
            await self.stop()

    # -- static assets (console) ---------------------------------------------

    def _process_request(self, connection, request):
        if request.headers.get("Upgrade", "").lower() == "websocket":
            return None
        if self.static_dir is None:
            return connection.respond(HTTPStatus.NOT_FOUND, "no static assets configured\n")
        rel = request.path.split("?", 1)[0].lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        try:
            target.relative_to(self.static_dir.resolve())
        except ValueError:
            return connection.respond(HTTPStatus.FORBIDDEN, "forbidden\n")
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            return connection.respond(HTTPStatus.NOT_FOUND, "not found\n")
        body = target.read_bytes()
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        headers = Headers(
            [("Content-Type", ctype), ("Content-Length", str(len(body)))]
        )
        return Response(HTTPStatus.OK, "OK", headers, body)

    # -- networking -----------------------------------------------------------

    async def _handler(self, ws) -> None:
        try:
            raw = await ws.recv()
            hello = protocol.parse_message(raw)
            if hello.get("type") != "hello":
                raise protocol.ProtocolError("expected_hello", "first message must be hello")
            wanted = protocol.validate_hello(hello)["role"]
        except protocol.ProtocolError as exc:
            await ws.send(protocol.encode(protocol.error_message(exc.code, exc.detail)))
            await ws.close()
            return
        except ConnectionClosed:
            return

        role = protocol.ROLE_OBSERVER
        if wanted == protocol.ROLE_PILOT and self._pilot is None:
            role = protocol.ROLE_PILOT
            self._pilot = ws
        queue: asyncio.Queue = asyncio.Queue(maxsize=1)
        self._clients[ws] = {"role": role, "queue": queue, "last_seq": -1}
        sender = asyncio.get_running_loop().create_task(self._send_loop(ws, queue))
        try:
            await ws.send(
                protocol.encode(
                    protocol.welcome_message(
                        role, self.session_id, self.config.as_dict(), self.scenario.kind
                    )
                )
            )
            async for raw in ws:
                await self._on_message(ws, raw)
        except ConnectionClosed:
            pass
        finally:
            sender.cancel()
            self._clients.pop(ws, None)
            if self._pilot is ws:
                self._pilot = None

    async def _on_message(self, ws, raw) -> None:
        meta = self._clients[ws]
        try:
            msg = protocol.parse_message(raw)
            kind = msg["type"]
            if kind == "ping":
                await ws.send(
                    protocol.encode(protocol.pong_message(msg.get("nonce"), time.time()))
                )
                return
            if kind == "command":
                if meta["role"] != protocol.ROLE_PILOT:
                    raise protocol.ProtocolError(
                        "observer_readonly", "observers cannot send commands"
                    )
                cmd = protocol.validate_command(msg)
                if cmd["seq"] <= meta["last_seq"]:
                    return  # stale, silently dropped
                meta["last_seq"] = cmd["seq"]
                self._incoming = cmd
                return
            raise protocol.ProtocolError("unknown_type", f"unknown message type {kind!r}")
        except protocol.ProtocolError as exc:
            try:
                await ws.send(protocol.encode(protocol.error_message(exc.code, exc.detail)))
            except ConnectionClosed:
                pass

    async def _send_loop(self, ws, queue: asyncio.Queue) -> None:
        try:
            while True:
                payload = await queue.get()
                await ws.send(payload)
        except (ConnectionClosed, asyncio.CancelledError):
            pass

    def _broadcast(self, payload: str) -> None:
        for meta in self._clients.values():
            queue = meta["queue"]
            if queue.full():
                try:
                    queue.get_nowait()  # latest wins
                except asyncio.QueueEmpty:
                    pass
            queue.put_nowait(payload)

    # -- simulation ------------------------------------------------------------

    async def _sim_loop(self) -> None:
        loop = asyncio.get_running_loop()
        next_t = loop.time()
        rate_window: list[tuple[float, int]] = []
        frame = None
        while self._running:
            if self._incoming is not None:
                self._applied = self._incoming
                self._incoming = None
                if self._recorder:
                    self._recorder.log_command(self.world.t, self._applied)
            for _ in range(self.steps_per_tick):
                pin = resolve_command(
                    self._applied, self.config.human, self.config.support_polygon,
                    self.scenario.pilot, self.world.human, self._f_hmi,
                )
                try:
                    self.world, frame = self.engine.step(self.world, pin)
                except SimulationDiverged as exc:
                    log.warning("diverged (%s); resetting world", exc.field_name)
                    self._broadcast(
                        protocol.encode(protocol.error_message("diverged", str(exc)))
                    )
                    self.world = self.engine.initial_world()
                    self._f_hmi = 0.0
                    break
                self._f_hmi = frame.f_hmi
                if self._recorder:
                    self._recorder.log_frame(frame.row())
            now = loop.time()
            rate_window.append((now, self.steps_per_tick))
            while rate_window and rate_window[0][0] < now - 1.0:
                rate_window.pop(0)
            span = now - rate_window[0][0] if len(rate_window) > 1 else self.tick
            self._achieved_rate = sum(n for _, n in rate_window[1:]) / span if span > 0 else 0.0
            if frame is not None:
                self._state_seq += 1
                self._broadcast(
                    protocol.encode(
                        protocol.state_message(
                            self._state_seq, self.world.t, frame.as_dict(),
                            round(self._achieved_rate, 1),
                        )
                    )
                )
            next_t += self.tick
            delay = next_t - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_t = loop.time()
                await asyncio.sleep(0)
