"""Live update loop: execute/export/pin requests in, ordered profile pushes
out.

``SyncEngine`` is transport-agnostic and synchronous: it consumes one client
message dict at a time and returns replies for the sender plus broadcasts for
every subscriber. Profiles are cached per table fingerprint, so each changed
table is profiled exactly once per epoch, and nothing at all is profiled while
no subscriber is attached (the work is deferred until the next snapshot).

The FastAPI app in ``create_app`` carries the same messages over a WebSocket
(one JSON object per message) and exposes the snapshot payload at
``GET /snapshot``.
"""

import asyncio
import json
from dataclasses import dataclass, field
from typing import Optional

from .exports import ExportError, handle_export_request
from .profiler import profile_table, to_canonical_json
from .session import SessionState

RECENCY = "recency"
ALPHABETICAL = "alphabetical"


@dataclass
class OrderingPolicy:
    mode: str = RECENCY
    pinned: set[str] = field(default_factory=set)


def order_names(items: list[tuple[str, int]], policy: OrderingPolicy) -> list[str]:
    """Stable total order: pinned first; within groups recency desc with name
    ascending tie-break, or plain name ascending."""

    def key(item):
        name, last_epoch = item
        pin_rank = 0 if name in policy.pinned else 1
        if policy.mode == ALPHABETICAL:
            return (pin_rank, name)
        return (pin_rank, -last_epoch, name)

    return [name for name, _ in sorted(items, key=key)]


class SyncEngine:
    def __init__(self, session: SessionState, order_mode: str = RECENCY):
        self.session = session
        self.order_mode = order_mode
        self.subscribers: set[str] = set()
        # name -> (fingerprint hash, profile dict); invalid entries recomputed
        self._cache: dict[str, tuple[int, dict]] = {}
        self.profile_calls = 0  # instrumentation for the laziness contract

    # -- profiling ----------------------------------------------------------

    def _profile_for(self, name: str, entry) -> dict:
        cached = self._cache.get(name)
        if cached is not None and cached[0] == entry.fingerprint.hash:
            return cached[1]
        self.profile_calls += 1
        prof = profile_table(
            entry.table,
            entry.fingerprint,
            epoch=entry.last_epoch,
            temporary=name == self.session.temp_name,
            name=name,
        ).to_dict()
        self._cache[name] = (entry.fingerprint.hash, prof)
        return prof

    def ordered_profiles(self) -> list[dict]:
        entries = dict(self.session.live_entries())
        for name in list(self._cache):
            if name not in entries:
                del self._cache[name]
        policy = OrderingPolicy(self.order_mode, set(self.session.pinned))
        order = order_names(
            [(name, e.last_epoch) for name, e in entries.items()], policy
        )
        return [self._profile_for(name, entries[name]) for name in order]

    def snapshot_payload(self) -> dict:
        return {"epoch": self.session.epoch, "profiles": self.ordered_profiles()}

    def snapshot_json(self) -> str:
        return to_canonical_json(self.snapshot_payload())

    # -- message handling ---------------------------------------------------

    def handle(self, client_id: str, msg: dict) -> tuple[list[dict], list[dict]]:
        """Returns (replies to the sender, broadcasts to all subscribers)."""
        mid = msg.get("id")
        mtype = msg.get("type")
        if mtype == "exec":
            return self._handle_exec(mid, msg.get("source", ""))
        if mtype == "subscribe":
            self.subscribers.add(client_id)
            return [dict(type="profiles", id=mid, **self.snapshot_payload())], []
        if mtype == "unsubscribe":
            self.subscribers.discard(client_id)
            return [{"type": "exec_result", "id": mid, "ok": True}], []
        if mtype == "export":
            try:
                snip = handle_export_request(self.session, msg.get("request", {}))
            except ExportError as e:
                return [
                    {"type": "error", "id": mid, "kind": e.kind, "message": str(e)}
                ], []
            return [
                {"type": "snippet", "id": mid, "text": snip.text, "new_name": snip.new_name}
            ], []
        if mtype == "pin":
            name = msg.get("table", "")
            if msg.get("pinned", True):
                self.session.pinned.add(name)
            else:
                self.session.pinned.discard(name)
            return self._reorder_reply(mid)
        if mtype == "sort":
            mode = msg.get("mode", RECENCY)
            if mode not in (RECENCY, ALPHABETICAL):
                return [
                    {
                        "type": "error",
                        "id": mid,
                        "kind": "InvalidRange",
                        "message": f"unknown sort mode {mode!r}",
                    }
                ], []
            self.order_mode = mode
            return self._reorder_reply(mid)
        if mtype == "reset":
            names = self.session.reset()
            self._cache.clear()
            replies = [{"type": "exec_result", "id": mid, "ok": True}]
            broadcasts = []
            if self.subscribers:
                if names:
                    broadcasts.append(
                        {"type": "removed", "epoch": self.session.epoch, "names": names}
                    )
                broadcasts.append(
                    {"type": "profiles", "epoch": self.session.epoch, "profiles": []}
                )
            return replies, broadcasts
        return [
            {
                "type": "error",
                "id": mid,
                "kind": "ProtocolError",
                "message": f"unknown message type {mtype!r}",
            }
        ], []

    def _reorder_reply(self, mid):
        replies = [{"type": "exec_result", "id": mid, "ok": True}]
        broadcasts = []
        if self.subscribers:
            broadcasts.append(
                dict(type="profiles", **self.snapshot_payload())
            )
        return replies, broadcasts

    def _handle_exec(self, mid, source: str):
        res = self.session.execute(source)
        reply = {"type": "exec_result", "id": mid, "ok": res.ok}
        if res.error is not None:
            reply["error"] = res.error.to_dict()
        if res.plots:
            reply["plots"] = [
                {"table": t, "column": c, "kind": k} for t, c, k in res.plots
            ]
        broadcasts = []
        if self.subscribers:
            if res.removed:
                broadcasts.append(
                    {"type": "removed", "epoch": self.session.epoch, "names": res.removed}
                )
            broadcasts.append(dict(type="profiles", **self.snapshot_payload()))
        # with no subscriber the cache simply goes stale; the next snapshot
        # recomputes whatever changed in the meantime
        return [reply], broadcasts


def create_app(engine: Optional[SyncEngine] = None, static_dir: Optional[str] = None):
    """FastAPI app serving the WebSocket protocol, /snapshot, and UI assets."""
    from fastapi import FastAPI, WebSocket, WebSocketDisconnect
    from fastapi.responses import FileResponse, Response

    if engine is None:
        engine = SyncEngine(SessionState())
    app = FastAPI()
    app.state.engine = engine
    lock = asyncio.Lock()  # FIFO execution: one in-flight message at a time
    sockets: dict[str, WebSocket] = {}

    @app.get("/snapshot")
    async def snapshot():
        async with lock:
            body = engine.snapshot_json()
        return Response(content=body, media_type="application/json")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        client_id = f"c{id(ws)}"
        sockets[client_id] = ws
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_text(
                        json.dumps(
                            {
                                "type": "error",
                                "id": None,
                                "kind": "ProtocolError",
                                "message": "invalid JSON",
                            }
                        )
                    )
                    continue
                async with lock:
                    replies, broadcasts = engine.handle(client_id, msg)
                    for r in replies:
                        await ws.send_text(to_canonical_json(r))
                    for b in broadcasts:
                        for cid in list(engine.subscribers):
                            sock = sockets.get(cid)
                            if sock is not None:
                                await sock.send_text(to_canonical_json(b))
        except WebSocketDisconnect:
            pass
        finally:
            sockets.pop(client_id, None)
            engine.subscribers.discard(client_id)

    if static_dir is not None:
        import os

        @app.get("/")
        async def index():
            return FileResponse(os.path.join(static_dir, "index.html"))

        from fastapi.staticfiles import StaticFiles

        app.mount("/static", StaticFiles(directory=static_dir), name="static")

    return app
