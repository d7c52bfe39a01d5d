"""Time-wise subselection: a random fixed-duration slice per epoch."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audio import Waveform

DISABLED = -1.0


@dataclass(frozen=True)
class SubselectParams:
    """``t_seconds`` of -1 (or any value <= 0 via ``DISABLED``) turns subselection off."""

    t_seconds: float = DISABLED
    seed: Optional[int] = None

    def __post_init__(self):
        if self.t_seconds != DISABLED and not self.t_seconds > 0:
            raise ValueError(f"t_seconds must be > 0 or {DISABLED}, got {self.t_seconds}")

    @property
    def enabled(self) -> bool:
        return self.t_seconds != DISABLED


def subselect(w: Waveform, p: SubselectParams, epoch_rng: np.random.Generator) -> Waveform:
    """Return a random contiguous slice of ``t_seconds``.

    Inputs shorter than the slice are tiled and cut, so the output length is
    always ``round(t_seconds * sample_rate)``.
    """
    if len(w) == 0:
        raise ValueError("empty waveform")
    if not p.enabled:
        return w
    n = max(1, round(p.t_seconds * w.sample_rate))
    if len(w) >= n:
        start = int(epoch_rng.integers(0, len(w) - n + 1))
        return w.slice(start, start + n)
    reps = -(-n // len(w))
    return Waveform(np.tile(w.samples, reps)[:n], w.sample_rate)
