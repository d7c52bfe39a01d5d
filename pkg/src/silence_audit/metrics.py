"""EER, accuracy and DET/ROC operating points for spoof scores.

Scores are oriented "higher = more spoof-like". At threshold ``t``:

* FRR(t): fraction of bonafide trials with score >= t (rejected as spoof)
* FAR(t): fraction of spoof trials with score < t (accepted as bonafide)

The sweep visits ``-inf``, every distinct score, and ``+inf``. FRR falls from
1 to 0 along the sweep while FAR rises from 0 to 1; the EER is read off where
the two cross, interpolating linearly between neighbouring sweep points.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .protocol import BONAFIDE, KEYS, SPOOF


@dataclass(frozen=True)
class ScoredTrial:
    utterance_id: str
    score: float
    key: str

    def __post_init__(self):
        object.__setattr__(self, "score", float(self.score))
        if not np.isfinite(self.score):
            raise ValueError(f"non-finite score for {self.utterance_id}")
        if self.key not in KEYS:
            raise ValueError(f"unknown key {self.key!r}")


@dataclass(frozen=True)
class EerResult:
    eer: float
    threshold: float


def _split(trials: Sequence[ScoredTrial]) -> tuple[np.ndarray, np.ndarray]:
    bona = np.sort([t.score for t in trials if t.key == BONAFIDE])
    spoof = np.sort([t.score for t in trials if t.key == SPOOF])
    if bona.size == 0 or spoof.size == 0:
        raise ValueError("need at least one bonafide and one spoof trial")
    return bona.astype(np.float64), spoof.astype(np.float64)


def error_rates(bona: np.ndarray, spoof: np.ndarray, thresholds: np.ndarray):
    """FRR and FAR at each threshold, given sorted per-class scores."""
    frr = (bona.size - np.searchsorted(bona, thresholds, side="left")) / bona.size
    far = np.searchsorted(spoof, thresholds, side="left") / spoof.size
    return frr, far


def sweep(trials: Sequence[ScoredTrial]):
    """Thresholds ``[-inf, unique scores..., +inf]`` with their FRR and FAR."""
    bona, spoof = _split(trials)
    thresholds = np.concatenate(([-np.inf], np.unique(np.concatenate((bona, spoof))), [np.inf]))
    frr, far = error_rates(bona, spoof, thresholds)
    return thresholds, frr, far


def compute_eer(trials: Sequence[ScoredTrial]) -> EerResult:
    thresholds, frr, far = sweep(trials)
    diff = frr - far
    # diff is non-increasing, starts at +1 and ends at -1
    i = int(np.argmax(diff <= 0))
    if diff[i] == 0:
        return EerResult(float(frr[i]), float(thresholds[i]))
    d0, d1 = diff[i - 1], diff[i]
    alpha = d0 / (d0 - d1)
    eer = frr[i - 1] + alpha * (frr[i] - frr[i - 1])
    lo, hi = thresholds[i - 1], thresholds[i]
    if np.isinf(lo):
        threshold = hi
    elif np.isinf(hi):
        threshold = lo
    else:
        threshold = lo + alpha * (hi - lo)
    return EerResult(float(eer), float(threshold))


def accuracy_at(trials: Sequence[ScoredTrial], threshold: float) -> float:
    """Fraction correct under the rule ``score >= threshold`` means spoof."""
    if not trials:
        raise ValueError("no trials")
    correct = sum((t.score >= threshold) == (t.key == SPOOF) for t in trials)
    return correct / len(trials)


def roc_points(trials: Sequence[ScoredTrial]) -> list[tuple[float, float]]:
    """(FAR, FRR) at every distinct score and at +inf.

    The ``-inf`` end of the sweep coincides with the lowest score and is omitted,
    so ``n`` distinct scores yield exactly ``n + 1`` points.
    """
    _, frr, far = sweep(trials)
    return [(float(a), float(r)) for a, r in zip(far[1:], frr[1:])]


def scored_trials(utterance_ids: Iterable[str], scores: Iterable[float], keys: Iterable[str]):
    return [ScoredTrial(u, float(s), k) for u, s, k in zip(utterance_ids, scores, keys, strict=True)]


def write_scores(path: str | Path, trials: Iterable[ScoredTrial]) -> None:
    Path(path).write_text(
        "".join(f"{t.utterance_id} {t.score!r}\n" for t in trials), encoding="utf-8"
    )


def read_scores(path: str | Path) -> dict[str, float]:
    scores = {}
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{number}: expected 'utterance_id score'")
        scores[parts[0]] = float(parts[1])
    return scores
