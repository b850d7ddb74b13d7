"""Entry control: pending requests, operator decisions, timed relock.

A doorbell camera posts an entry request with a snapshot. Operators answer
with allow or deny. The rules are strict so that concurrent operators and
retrying networks cannot wedge the door:

  - the first decision on a session wins, permanently
  - repeating the winning decision is acknowledged as a duplicate (safe retries)
  - contradicting it reports "stale" and changes nothing
  - a session nobody answers expires after `expiry` seconds, counting as a
    deny decided by "timeout"
  - an allowed session unlocks the door for `unlock_ttl` seconds; the door
    relocks on the next tick after the deadline

The clock is injected so tests can drive time by hand.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .devices import DeviceRegistry

PENDING = "pending"
PERMITTED = "permitted"
DENIED = "denied"
EXPIRED = "expired"

#: decide() outcomes
APPLIED = "applied"
DUPLICATE = "duplicate"
STALE = "stale-decision"


class EntryError(ValueError):
    """Unknown session or malformed request."""


@dataclass
class EntrySession:
    session_id: str
    image_b64: str
    ts: float
    created: float
    state: str = PENDING
    decided_by: Optional[str] = None
    decided_at: Optional[float] = None

    @property
    def resolved_allow(self) -> Optional[bool]:
        if self.state == PERMITTED:
            return True
        if self.state in (DENIED, EXPIRED):
            return False
        return None


@dataclass(frozen=True)
class TickEvent:
    """State change produced by the clock: an expiry or the door relocking."""

    kind: str  # "expired" | "relocked"
    session_id: Optional[str] = None


class EntryMachine:
    def __init__(self, registry: DeviceRegistry, door_id: str = "door1",
                 clock: Callable[[], float] = time.monotonic,
                 unlock_ttl: float = 10.0, expiry: float = 60.0):
        if unlock_ttl <= 0 or expiry <= 0:
            raise ValueError("unlock_ttl and expiry must be positive")
        self.registry = registry
        self.door_id = door_id
        self.clock = clock
        self.unlock_ttl = unlock_ttl
        self.expiry = expiry
        self._sessions: dict[str, EntrySession] = {}
        self._relock_at: Optional[float] = None

    # -- queries ---------------------------------------------------------

    def session(self, session_id: str) -> EntrySession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise EntryError(f"unknown session {session_id!r}") from None

    def pending(self) -> list[EntrySession]:
        return [s for s in self._sessions.values() if s.state == PENDING]

    @property
    def relock_at(self) -> Optional[float]:
        return self._relock_at

    # -- transitions -------------------------------------------------------

    def request(self, session_id: str, image_b64: str, ts: Optional[float] = None
                ) -> tuple[EntrySession, bool]:
        """Register a request; returns (session, is_new). Repeats are no-ops."""
        if not session_id:
            raise EntryError("session id must be non-empty")
        existing = self._sessions.get(session_id)
        if existing is not None:
            return existing, False
        now = self.clock()
        session = EntrySession(
            session_id=session_id,
            image_b64=image_b64,
            ts=now if ts is None else ts,
            created=now,
        )
        self._sessions[session_id] = session
        return session, True

    def decide(self, session_id: str, allow: bool, operator: str = "operator") -> str:
        """Apply an operator decision; returns APPLIED, DUPLICATE, or STALE."""
        session = self.session(session_id)
        if session.state == PENDING:
            now = self.clock()
            session.state = PERMITTED if allow else DENIED
            session.decided_by = operator
            session.decided_at = now
            if allow:
                self.registry.set_state(self.door_id, "unlocked")
                self._relock_at = now + self.unlock_ttl
            return APPLIED
        if session.resolved_allow == allow:
            return DUPLICATE
        return STALE

    def tick(self) -> list[TickEvent]:
        """Apply the passage of time: expire stale requests, relock the door."""
        now = self.clock()
        fired: list[TickEvent] = []
        for session in self._sessions.values():
            if session.state == PENDING and now - session.created >= self.expiry:
                session.state = EXPIRED
                session.decided_by = "timeout"
                session.decided_at = now
                fired.append(TickEvent(kind="expired", session_id=session.session_id))
        if self._relock_at is not None and now >= self._relock_at:
            self._relock_at = None
            if self.registry.state(self.door_id) == "unlocked":
                self.registry.set_state(self.door_id, "locked")
                fired.append(TickEvent(kind="relocked"))
        return fired
