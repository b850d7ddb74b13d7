"""Line-delimited JSON control server for the lab.

Every message is one JSON object on one line, UTF-8, over plain TCP. A
client starts with a hello naming its role; the server answers with a
snapshot of device states and pending entry requests so late joiners and
reconnects resync in one round trip. After that the server guarantees one
typed reply (or an error) per client message, plus fan-out broadcasts:

  device_command -> device_state reply; device_state to everyone else
  entry_request  -> ack; the request forwarded to everyone else
  entry_decision -> ack; on the winning decision, entry_decision to everyone
                    else and the door's device_state to everyone
  motion_alert   -> ack; forwarded to everyone else
  gesture_event  -> ack; forwarded to everyone else

Entry timeouts behave like a decision by the operator "timeout": the
broadcast is an entry_decision with allow=false, so observers never need a
separate message shape for expiry.
"""

from __future__ import annotations

import asyncio
import base64
import binascii
import json
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .devices import DeviceError, DeviceRegistry
from .entry import APPLIED, EntryError, EntryMachine
from .grammar import Command, CommandGrammar, GrammarError, default_grammar

SENDER = "sender"
OTHERS = "others"
EVERYONE = "everyone"

ROLES = ("operator", "sensor", "device", "dashboard")


@dataclass
class Peer:
    name: str
    role: str = "unknown"
    writer: Optional[asyncio.StreamWriter] = None
    outbox: list = field(default_factory=list)  # used by tests without sockets


def _error(code: str, detail: str) -> dict:
    return {"type": "error", "code": code, "detail": detail}


class LabServer:
    def __init__(self, grammar: Optional[CommandGrammar] = None,
                 registry: Optional[DeviceRegistry] = None,
                 door_id: str = "door1",
                 unlock_ttl: float = 10.0, expiry: float = 60.0,
                 clock: Callable[[], float] = time.monotonic,
                 tick_interval: float = 0.25):
        self.grammar = grammar or default_grammar()
        self.registry = registry or DeviceRegistry()
        self.machine = EntryMachine(self.registry, door_id=door_id, clock=clock,
                                    unlock_ttl=unlock_ttl, expiry=expiry)
        self.door_id = door_id
        self.tick_interval = tick_interval
        self.peers: list[Peer] = []
        self._peer_counter = 0
        self._server: Optional[asyncio.base_events.Server] = None
        self._tick_task: Optional[asyncio.Task] = None

    # -- message handling (synchronous, socket-free) -----------------------

    def handle_line(self, peer: Peer, line: str) -> list[tuple[str, dict]]:
        try:
            message = json.loads(line)
        except json.JSONDecodeError as err:
            return [(SENDER, _error("bad_json", str(err)))]
        if not isinstance(message, dict) or not isinstance(message.get("type"), str):
            return [(SENDER, _error("bad_message", "expected an object with a type field"))]
        return self.handle_message(peer, message)

    def handle_message(self, peer: Peer, message: dict) -> list[tuple[str, dict]]:
        handler = getattr(self, f"_on_{message['type']}", None)
        if handler is None:
            return [(SENDER, _error("unknown_type", f"no such message type {message['type']!r}"))]
        try:
            return handler(peer, message)
        except KeyError as err:
            return [(SENDER, _error("bad_message", f"missing field {err.args[0]!r}"))]
        except (TypeError, ValueError) as err:
            return [(SENDER, _error("bad_message", str(err)))]

    def _device_state(self, device_id: str, changed: bool = True) -> dict:
        return {
            "type": "device_state",
            "device_id": device_id,
            "kind": self.registry.kind(device_id),
            "state": self.registry.state(device_id),
            "changed": changed,
        }

    def _on_hello(self, peer: Peer, message: dict) -> list[tuple[str, dict]]:
        role = message.get("role", "unknown")
        if role not in ROLES:
            return [(SENDER, _error("bad_role", f"role must be one of {', '.join(ROLES)}"))]
        peer.role = role
        reply = {
            "type": "hello",
            "role": "server",
            "peer": peer.name,
            "devices": self.registry.snapshot(),
            "pending": [
                {"id": s.session_id, "image_b64": s.image_b64, "ts": s.ts}
                for s in self.machine.pending()
            ],
        }
        return [(SENDER, reply)]

    def _on_device_command(self, peer: Peer, message: dict) -> list[tuple[str, dict]]:
        try:
            if "text" in message:
                command = self.grammar.parse(message["text"])
            else:
                command = Command(str(message["device_id"]), str(message["action"]))
            ack = self.registry.apply_command(command)
        except GrammarError as err:
            return [(SENDER, _error("unknown_command", str(err)))]
        except DeviceError as err:
            return [(SENDER, _error("device_refused", str(err)))]
        state = self._device_state(ack.device_id, ack.changed)
        out = [(SENDER, state)]
        if ack.changed:
            out.append((OTHERS, state))
        return out

    def _on_entry_request(self, peer: Peer, message: dict) -> list[tuple[str, dict]]:
        session_id = str(message["id"])
        image_b64 = str(message["image_b64"])
        try:
            base64.b64decode(image_b64, validate=True)
        except (binascii.Error, ValueError) as err:
            return [(SENDER, _error("bad_image", f"image_b64 does not decode: {err}"))]
        try:
            session, is_new = self.machine.request(session_id, image_b64, message.get("ts"))
        except EntryError as err:
            return [(SENDER, _error("bad_request", str(err)))]
        ack = {"type": "ack", "of": "entry_request", "id": session.session_id,
               "status": "pending" if is_new else "duplicate"}
        out = [(SENDER, ack)]
        if is_new:
            out.append((OTHERS, {
                "type": "entry_request",
                "id": session.session_id,
                "image_b64": session.image_b64,
                "ts": session.ts,
            }))
        return out

    def _on_entry_decision(self, peer: Peer, message: dict) -> list[tuple[str, dict]]:
        session_id = str(message["id"])
        allow = bool(message["allow"])
        operator = peer.name if peer.role == "unknown" else f"{peer.role}:{peer.name}"
        try:
            outcome = self.machine.decide(session_id, allow, operator=operator)
        except EntryError as err:
            return [(SENDER, _error("unknown_session", str(err)))]
        session = self.machine.session(session_id)
        ack = {"type": "ack", "of": "entry_decision", "id": session_id,
               "outcome": outcome, "allow": session.resolved_allow,
               "decided_by": session.decided_by}
        out: list[tuple[str, dict]] = [(SENDER, ack)]
        if outcome == APPLIED:
            out.append((OTHERS, {"type": "entry_decision", "id": session_id,
                                 "allow": allow, "decided_by": session.decided_by}))
            if allow:
                out.append((EVERYONE, self._device_state(self.door_id)))
        return out

    def _on_motion_alert(self, peer: Peer, message: dict) -> list[tuple[str, dict]]:
        forward = {"type": "motion_alert", "changed": int(message["changed"]),
                   "frame": int(message["frame"])}
        ack = {"type": "ack", "of": "motion_alert", "frame": forward["frame"]}
        return [(SENDER, ack), (OTHERS, forward)]

    def _on_gesture_event(self, peer: Peer, message: dict) -> list[tuple[str, dict]]:
        forward = {"type": "gesture_event", "g": int(message["g"]),
                   "frame": int(message["frame"])}
        ack = {"type": "ack", "of": "gesture_event", "frame": forward["frame"]}
        return [(SENDER, ack), (OTHERS, forward)]

    def tick(self) -> list[tuple[str, dict]]:
        """Advance time-driven state; returns broadcasts for everyone."""
        out: list[tuple[str, dict]] = []
        for event in self.machine.tick():
            if event.kind == "expired":
                out.append((EVERYONE, {"type": "entry_decision", "id": event.session_id,
                                       "allow": False, "decided_by": "timeout"}))
            elif event.kind == "relocked":
                out.append((EVERYONE, self._device_state(self.door_id)))
        return out

    # -- asyncio shell ------------------------------------------------------

    @property
    def port(self) -> int:
        return self._server.sockets[0].getsockname()[1]

    async def start(self, host: str = "127.0.0.1", port: int = 0) -> None:
        self._server = await asyncio.start_server(self._client_connected, host, port)
        self._tick_task = asyncio.create_task(self._tick_loop())

    async def close(self) -> None:
        if self._tick_task is not None:
            self._tick_task.cancel()
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        for peer in list(self.peers):
            if peer.writer is not None:
                peer.writer.close()

    async def serve_forever(self) -> None:
        async with self._server:
            await self._server.serve_forever()

    def _send(self, peer: Peer, message: dict) -> None:
        if peer.writer is None:
            peer.outbox.append(message)
            return
        try:
            peer.writer.write(json.dumps(message, separators=(",", ":")).encode() + b"\n")
        except ConnectionError:
            pass

    def dispatch(self, sender: Optional[Peer], routed: list[tuple[str, dict]]) -> None:
        for audience, message in routed:
            if audience == SENDER:
                if sender is not None:
                    self._send(sender, message)
            elif audience == OTHERS:
                for peer in self.peers:
                    if peer is not sender:
                        self._send(peer, message)
            else:
                for peer in self.peers:
                    self._send(peer, message)

    async def _client_connected(self, reader: asyncio.StreamReader,
                                writer: asyncio.StreamWriter) -> None:
        self._peer_counter += 1
        peer = Peer(name=f"peer-{self._peer_counter}", writer=writer)
        self.peers.append(peer)
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                if not line.strip():
                    continue
                self.dispatch(peer, self.handle_line(peer, line.decode("utf-8", "replace")))
                await writer.drain()
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            self.peers.remove(peer)
            writer.close()

    async def _tick_loop(self) -> None:
        while True:
            await asyncio.sleep(self.tick_interval)
            self.dispatch(None, self.tick())
