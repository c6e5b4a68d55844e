"""WebSocket telemetry/command bridge.

One text message per frame, each a JSON object with a `type` field:
outbound pose/scan/thermal/vss/event, inbound teleop/relay/mode.  The
server fans frames out to every connected client and forwards parsed
inbound commands to a callback (the simulation inbox).  A client that
has been driving and disconnects gets a synthetic deadman-release so
the robot never keeps a dead operator's setpoint.
"""

from __future__ import annotations

import json
import os
import threading
from typing import Callable, Iterable

from websockets.sync.server import serve

from .pipeline import RunLogWriter, RunRecord
from .runner import RunConfig, RunResult, Simulation

DEFAULT_PORT = 8473
INBOUND_TYPES = ("teleop", "relay", "mode")

# Log record kinds that map onto wire frame types.
_WIRE_KIND_TO_TYPE = {
    "pose": "pose",
    "lidar": "scan",
    "thermal": "thermal",
    "vss": "vss",
    "event": "event",
}


def resolve_port(port: int | None) -> int:
    if port is not None:
        return port
    env = os.environ.get("TIBA_SIM_PORT")
    return int(env) if env else DEFAULT_PORT


class TelemetryServer:
    """Threaded WebSocket endpoint: broadcast out, command callback in."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int | None = None,
        on_message: Callable[[dict], None] | None = None,
    ) -> None:
        self._on_message = on_message
        self._clients: set = set()
        self._lock = threading.Lock()
        self._server = serve(self._handler, host, resolve_port(port))
        self._thread = threading.Thread(
            target=self._server.serve_forever, name="tiba-sim-ws", daemon=True
        )
        self._started = False

    @property
    def port(self) -> int:
        return self._server.socket.getsockname()[1]

    def start(self) -> None:
        if not self._started:
            self._thread.start()
            self._started = True

    def stop(self) -> None:
        self._server.shutdown()
        if self._started:
            self._thread.join(timeout=5.0)
        with self._lock:
            self._clients.clear()

    def __enter__(self) -> "TelemetryServer":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()

    def broadcast(self, frame: dict) -> None:
        data = json.dumps(frame)
        with self._lock:
            clients = list(self._clients)
        for conn in clients:
            try:
                conn.send(data)
            except Exception:
                with self._lock:
                    self._clients.discard(conn)

    def _handler(self, conn) -> None:
        with self._lock:
            self._clients.add(conn)
        drove = False
        try:
            for raw in conn:
                try:
                    msg = json.loads(raw)
                except (ValueError, TypeError):
                    continue
                if not isinstance(msg, dict) or msg.get("type") not in INBOUND_TYPES:
                    continue
                if msg["type"] == "teleop":
                    drove = True
                if self._on_message is not None:
                    self._on_message(msg)
        except Exception:
            pass
        finally:
            with self._lock:
                self._clients.discard(conn)
            if drove and self._on_message is not None:
                # Dead operator: release the deadman immediately.
                self._on_message(
                    {
                        "type": "teleop",
                        "axis_forward": 0.0,
                        "axis_turn": 0.0,
                        "deadman": False,
                    }
                )


def serve_run(
    cfg: RunConfig,
    log: RunLogWriter | None = None,
    host: str = "127.0.0.1",
    port: int | None = None,
    rate: float = 1.0,
    on_ready: Callable[[TelemetryServer, Simulation], None] | None = None,
) -> RunResult:
    """Run one simulation wall-clock paced with the service attached."""
    server = TelemetryServer(host, port, on_message=lambda m: sim.submit(m))
    sim = Simulation(cfg, log=log, telemetry_sink=server.broadcast)
    with server:
        if on_ready is not None:
            on_ready(server, sim)
        return sim.run(realtime=True, rate=rate)


def serve_log(
    records: Iterable[RunRecord],
    host: str = "127.0.0.1",
    port: int | None = None,
    rate: float = 1.0,
    on_ready: Callable[[TelemetryServer], None] | None = None,
) -> int:
    """Stream a recorded log once over the wire, paced by its timestamps."""
    import time

    sent = 0
    with TelemetryServer(host, port) as server:
        if on_ready is not None:
            on_ready(server)
        wall0 = time.monotonic()
        t0: float | None = None
        for rec in records:
            frame_type = _WIRE_KIND_TO_TYPE.get(rec.kind)
            if frame_type is None:
                continue
            if t0 is None:
                t0 = rec.timestamp
            delay = wall0 + (rec.timestamp - t0) / max(rate, 1e-6) - time.monotonic()
            if delay > 0.0:
                time.sleep(delay)
            server.broadcast({"type": frame_type, "t": rec.timestamp, **rec.payload})
            sent += 1
    return sent
