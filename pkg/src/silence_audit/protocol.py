"""Parsing of ASVspoof-style logical-access CM protocol files.

Each non-blank line has five whitespace-separated fields::

    SPEAKER_ID UTTERANCE_ID - ATTACK_ID KEY

``ATTACK_ID`` is ``-`` for bonafide trials. The third field is a
placeholder and ignored.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

BONAFIDE = "bonafide"
SPOOF = "spoof"
NONE_TOKEN = "-"
KEYS = (BONAFIDE, SPOOF)


class ProtocolError(ValueError):
    """Malformed protocol line."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class DuplicateUtteranceError(ProtocolError):
    pass


@dataclass(frozen=True)
class TrialRecord:
    speaker_id: str
    utterance_id: str
    attack_id: Optional[str]  # None for bonafide
    key: str

    def __post_init__(self):
        if not self.utterance_id:
            raise ProtocolError("empty utterance id")
        if self.key not in KEYS:
            raise ProtocolError(f"unknown key {self.key!r}")
        if (self.key == BONAFIDE) != (self.attack_id is None):
            raise ProtocolError(
                f"key/attack inconsistency for {self.utterance_id}: "
                f"key={self.key} attack={self.attack_id or NONE_TOKEN}"
            )

    @property
    def label(self) -> int:
        """0 for bonafide, 1 for spoof."""
        return int(self.key == SPOOF)

    @property
    def group(self) -> str:
        """Attack id, or ``bonafide`` for genuine trials."""
        return self.attack_id if self.attack_id is not None else BONAFIDE

    def to_line(self) -> str:
        return " ".join(
            (self.speaker_id, self.utterance_id, NONE_TOKEN, self.attack_id or NONE_TOKEN, self.key)
        )


@dataclass(frozen=True)
class SplitSummary:
    counts: dict[str, int] = field(default_factory=dict)
    bonafide_count: int = 0
    spoof_count: int = 0

    @property
    def total(self) -> int:
        return self.bonafide_count + self.spoof_count


def parse_line(line: str, line_number: Optional[int] = None) -> TrialRecord:
    fields = line.split()
    if len(fields) != 5:
        raise ProtocolError(f"expected 5 fields, got {len(fields)}", line_number)
    speaker, utt, _, attack, key = fields
    if key not in KEYS:
        raise ProtocolError(f"unknown key {key!r}", line_number)
    try:
        return TrialRecord(speaker, utt, None if attack == NONE_TOKEN else attack, key)
    except ProtocolError as exc:
        raise ProtocolError(str(exc), line_number) from None


def parse_protocol(text: str) -> list[TrialRecord]:
    """Parse protocol text into records, one per non-blank line.

    Raises:
        ProtocolError: on a malformed line (carries ``line_number``).
        DuplicateUtteranceError: when an utterance id repeats.
    """
    records = []
    seen: dict[str, int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        record = parse_line(line, number)
        if record.utterance_id in seen:
            raise DuplicateUtteranceError(
                f"duplicate utterance id {record.utterance_id!r} "
                f"(first seen on line {seen[record.utterance_id]})",
                number,
            )
        seen[record.utterance_id] = number
        records.append(record)
    return records


def read_protocol(path: str | Path) -> list[TrialRecord]:
    return parse_protocol(Path(path).read_text(encoding="utf-8"))


def format_protocol(records: Iterable[TrialRecord]) -> str:
    return "".join(r.to_line() + "\n" for r in records)


def write_protocol(records: Iterable[TrialRecord], path: str | Path) -> None:
    Path(path).write_text(format_protocol(records), encoding="utf-8")


def summarize(records: Iterable[TrialRecord]) -> SplitSummary:
    counts: Counter[str] = Counter()
    bonafide = spoof = 0
    for r in records:
        if r.attack_id is None:
            bonafide += 1
        else:
            spoof += 1
            counts[r.attack_id] += 1
    return SplitSummary(dict(sorted(counts.items())), bonafide, spoof)
