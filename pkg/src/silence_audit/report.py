"""Per-attack silence statistics and the audit report (CSV + JSON)."""
from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .protocol import BONAFIDE, TrialRecord
from .silence import SilenceProfile

DECIMALS = 6
STATS_FIELDS = ("split", "attack_id", "n", "mean_s", "std_s", "leading_mean_s", "leading_std_s")
PROFILE_FIELDS = ("utterance_id", "attack_id", "key", "leading_s", "trailing_s", "total_s")


class UnmatchedProfileError(ValueError):
    def __init__(self, missing: Sequence[str]):
        self.missing = list(missing)
        shown = ", ".join(self.missing[:10]) + (" ..." if len(self.missing) > 10 else "")
        super().__init__(f"{len(self.missing)} profile(s) without a protocol record: {shown}")


def _r(x: float) -> float:
    return round(float(x), DECIMALS)


def _fmt(x: float) -> str:
    return f"{x:.{DECIMALS}f}"


@dataclass(frozen=True)
class AttackStats:
    """Silence statistics of one attack group (``bonafide`` for genuine trials).

    ``mean_s``/``std_s`` cover leading + trailing silence; the ``leading_*``
    columns cover leading silence alone. Standard deviations are population.
    """

    attack_id: str
    n: int
    mean_s: float
    std_s: float
    leading_mean_s: float
    leading_std_s: float

    def to_dict(self) -> dict:
        return {
            "attack_id": self.attack_id,
            "n": self.n,
            "mean_s": _r(self.mean_s),
            "std_s": _r(self.std_s),
            "leading_mean_s": _r(self.leading_mean_s),
            "leading_std_s": _r(self.leading_std_s),
        }


@dataclass(frozen=True)
class SplitStats:
    attacks: list[AttackStats]
    spoof_mean_s: Optional[float]
    spoof_leading_mean_s: Optional[float]

    def to_dict(self) -> dict:
        return {
            "attacks": [a.to_dict() for a in self.attacks],
            "spoof_mean_s": None if self.spoof_mean_s is None else _r(self.spoof_mean_s),
            "spoof_leading_mean_s": None if self.spoof_leading_mean_s is None else _r(self.spoof_leading_mean_s),
        }


def _group_order(group: str):
    return (group != BONAFIDE, group)


def per_attack_stats(records: Sequence[TrialRecord], profiles: Mapping[str, SilenceProfile]) -> SplitStats:
    """Group profiles by attack id and summarize silence durations.

    Records without a profile (e.g. skipped missing audio) are ignored; a
    profile whose utterance id is not in ``records`` is an error.
    """
    by_id = {r.utterance_id: r for r in records}
    missing = sorted(u for u in profiles if u not in by_id)
    if missing:
        raise UnmatchedProfileError(missing)
    both = defaultdict(list)
    lead = defaultdict(list)
    for r in records:
        p = profiles.get(r.utterance_id)
        if p is None:
            continue
        both[r.group].append(p.leading_s + p.trailing_s)
        lead[r.group].append(p.leading_s)
    stats = []
    for group in sorted(both, key=_group_order):
        b = np.asarray(both[group])
        l = np.asarray(lead[group])
        stats.append(AttackStats(group, b.size, float(b.mean()), float(b.std()), float(l.mean()), float(l.std())))
    spoof_both = [x for g, xs in both.items() if g != BONAFIDE for x in xs]
    spoof_lead = [x for g, xs in lead.items() if g != BONAFIDE for x in xs]
    return SplitStats(
        stats,
        float(np.mean(spoof_both)) if spoof_both else None,
        float(np.mean(spoof_lead)) if spoof_lead else None,
    )


@dataclass(frozen=True)
class ClassifierResult:
    eer: float
    threshold: float
    accuracy: float
    n: int

    def to_dict(self) -> dict:
        return {"eer": _r(self.eer), "threshold": _r(self.threshold), "accuracy": _r(self.accuracy), "n": self.n}


@dataclass
class AuditReport:
    splits: dict[str, SplitStats]
    classifier: Optional[dict[str, ClassifierResult]] = None
    random_baseline: dict[str, ClassifierResult] = field(default_factory=dict)
    final_train_loss: Optional[float] = None
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "splits": {name: s.to_dict() for name, s in self.splits.items()},
            "classifier": None if self.classifier is None else {k: v.to_dict() for k, v in self.classifier.items()},
            "random_baseline": {k: v.to_dict() for k, v in self.random_baseline.items()},
            "final_train_loss": None if self.final_train_loss is None else _r(self.final_train_loss),
        }


def stats_csv(splits: Mapping[str, SplitStats]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(STATS_FIELDS)
    for name, split in splits.items():
        for a in split.attacks:
            writer.writerow([name, a.attack_id, a.n, _fmt(a.mean_s), _fmt(a.std_s),
                             _fmt(a.leading_mean_s), _fmt(a.leading_std_s)])
    return buf.getvalue()


def profiles_csv(records: Sequence[TrialRecord], profiles: Mapping[str, SilenceProfile]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PROFILE_FIELDS)
    for r in records:
        p = profiles.get(r.utterance_id)
        if p is None:
            continue
        writer.writerow([r.utterance_id, r.attack_id or "-", r.key,
                         _fmt(p.leading_s), _fmt(p.trailing_s), _fmt(p.total_s)])
    return buf.getvalue()


def report_json(report: AuditReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def emit(report: AuditReport, out_dir: str | Path, formats: Sequence[str] = ("csv", "json")) -> list[Path]:
    """Write ``report.csv`` and/or ``report.json``; returns the written paths."""
    if not report.splits or any(not s.attacks for s in report.splits.values()):
        raise ValueError("report has a split without attack statistics")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "csv":
            path = out / "report.csv"
            path.write_text(stats_csv(report.splits), encoding="utf-8")
        elif fmt == "json":
            path = out / "report.json"
            path.write_text(report_json(report), encoding="utf-8")
        else:
            raise ValueError(f"unknown report format {fmt!r}")
        written.append(path)
    return written
