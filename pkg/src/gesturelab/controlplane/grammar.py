"""Spoken-style command phrases mapped onto device actions.

Phrases are matched after normalization (case folded, runs of whitespace
collapsed), so "Fan  ON" and "fan on" are the same command. A grammar whose
entries collide after normalization is a configuration mistake and refuses
to load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Optional


class GrammarError(ValueError):
    """Bad grammar definition or unparseable command text."""


@dataclass(frozen=True)
class Command:
    device_id: str
    action: str


def normalize(text: str) -> str:
    return " ".join(text.lower().split())


class CommandGrammar:
    def __init__(self, entries: Mapping[str, tuple[str, str]]):
        self._entries: dict[str, Command] = {}
        for phrase, (device_id, action) in entries.items():
            key = normalize(phrase)
            if not key:
                raise GrammarError(f"blank phrase {phrase!r}")
            if key in self._entries:
                raise GrammarError(f"duplicate phrase after normalization: {key!r}")
            self._entries[key] = Command(device_id=device_id, action=action)

    def __len__(self) -> int:
        return len(self._entries)

    def phrases(self) -> tuple[str, ...]:
        return tuple(self._entries)

    def parse(self, text: str) -> Command:
        key = normalize(text)
        command = self._entries.get(key)
        if command is None:
            raise GrammarError(f"unknown command {key!r}")
        return command

    def try_parse(self, text: str) -> Optional[Command]:
        return self._entries.get(normalize(text))

    @classmethod
    def from_json(cls, path: str) -> "CommandGrammar":
        """Load {"phrase": ["device_id", "action"], ...} from a JSON file."""
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise GrammarError(f"{path}: grammar file must hold a JSON object")
        entries = {}
        for phrase, target in doc.items():
            if (not isinstance(target, (list, tuple)) or len(target) != 2
                    or not all(isinstance(part, str) for part in target)):
                raise GrammarError(f"{path}: entry {phrase!r} must map to [device_id, action]")
            entries[phrase] = (target[0], target[1])
        return cls(entries)


def default_grammar() -> CommandGrammar:
    return CommandGrammar({
        "fan on": ("fan1", "on"),
        "fan off": ("fan1", "off"),
        "turn on the fan": ("fan1", "on"),
        "turn off the fan": ("fan1", "off"),
        "light on": ("light1", "on"),
        "light off": ("light1", "off"),
        "turn on the light": ("light1", "on"),
        "turn off the light": ("light1", "off"),
    })
