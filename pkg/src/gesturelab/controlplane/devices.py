"""Device registry with an append-only state log.

Commands are idempotent: re-applying the current state acknowledges without
producing a new log entry, so retrying clients cannot duplicate effects.
The full registry state can be rebuilt from the log alone (replay), which
is what the acceptance checks lean on.

The door is special. It never answers to the command path; only the entry
control flow (see entry.py) may lock or unlock it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .grammar import Command


class DeviceError(ValueError):
    """Unknown device, illegal state, or a command the device refuses."""


#: kind -> (legal states, initial state)
KINDS: Mapping[str, tuple[tuple[str, ...], str]] = {
    "fan": (("on", "off"), "off"),
    "light": (("on", "off"), "off"),
    "door": (("locked", "unlocked"), "locked"),
}

DEFAULT_DEVICES: Mapping[str, str] = {"fan1": "fan", "light1": "light", "door1": "door"}


@dataclass(frozen=True)
class StateEvent:
    seq: int
    device_id: str
    state: str


@dataclass(frozen=True)
class Ack:
    device_id: str
    state: str
    changed: bool


class DeviceRegistry:
    def __init__(self, devices: Optional[Mapping[str, str]] = None):
        self._kinds: dict[str, str] = {}
        self._states: dict[str, str] = {}
        self._events: list[StateEvent] = []
        for device_id, kind in (devices or DEFAULT_DEVICES).items():
            if kind not in KINDS:
                raise DeviceError(f"unknown device kind {kind!r}")
            self._kinds[device_id] = kind
            self._states[device_id] = KINDS[kind][1]

    def kind(self, device_id: str) -> str:
        self._require(device_id)
        return self._kinds[device_id]

    def state(self, device_id: str) -> str:
        self._require(device_id)
        return self._states[device_id]

    def snapshot(self) -> dict[str, dict[str, str]]:
        return {
            device_id: {"kind": self._kinds[device_id], "state": state}
            for device_id, state in sorted(self._states.items())
        }

    def events(self) -> tuple[StateEvent, ...]:
        return tuple(self._events)

    def _require(self, device_id: str) -> None:
        if device_id not in self._states:
            raise DeviceError(f"unknown device {device_id!r}")

    def set_state(self, device_id: str, state: str) -> Ack:
        """Direct state write; validates but does not gate. Idempotent."""
        self._require(device_id)
        legal = KINDS[self._kinds[device_id]][0]
        if state not in legal:
            raise DeviceError(
                f"{device_id}: illegal state {state!r} (one of {', '.join(legal)})")
        if self._states[device_id] == state:
            return Ack(device_id=device_id, state=state, changed=False)
        self._states[device_id] = state
        self._events.append(StateEvent(seq=len(self._events), device_id=device_id, state=state))
        return Ack(device_id=device_id, state=state, changed=True)

    def apply_command(self, command: Command) -> Ack:
        """Run a parsed command. Doors refuse this path outright."""
        self._require(command.device_id)
        if self._kinds[command.device_id] == "door":
            raise DeviceError(
                f"{command.device_id}: door state changes only through entry control")
        return self.set_state(command.device_id, command.action)

    @classmethod
    def replay(cls, events, devices: Optional[Mapping[str, str]] = None) -> "DeviceRegistry":
        """Rebuild a registry by applying a recorded event log in order."""
        registry = cls(devices)
        for event in events:
            registry.set_state(event.device_id, event.state)
        return registry
