"""Energy-threshold silence measurement and trimming.

Frames start at every multiple of ``hop_length`` below the signal length and
span ``frame_length`` samples, zero-padded past the end. A frame's level is
its RMS in dB relative to the loudest frame of the same file; frames louder
than ``-top_db`` are active. Leading silence ends at the first active frame's
start, trailing silence begins at the end of the last active frame.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .audio import Waveform

#: Level reported for all-zero frames (stands in for -inf dB).
SILENT_DB = -sys.float_info.max


class SilentAudioError(ValueError):
    """Trimming found no active frame; the result would be empty."""


@dataclass(frozen=True)
class TrimParams:
    top_db: float = 40.0
    frame_length: int = 2048
    hop_length: int = 512

    def __post_init__(self):
        if not self.top_db > 0:
            raise ValueError(f"top_db must be positive, got {self.top_db}")
        if not 0 < self.hop_length <= self.frame_length:
            raise ValueError(
                f"need 0 < hop_length <= frame_length, got {self.hop_length}/{self.frame_length}"
            )


@dataclass(frozen=True)
class SilenceProfile:
    leading_s: float
    trailing_s: float
    nonsilent_start: int
    nonsilent_end: int
    total_samples: int
    sample_rate: int

    @property
    def total_s(self) -> float:
        return self.total_samples / self.sample_rate

    @property
    def silent(self) -> bool:
        return self.nonsilent_start == self.nonsilent_end

    @property
    def leading_plus_trailing_s(self) -> float:
        return self.leading_s + self.trailing_s


def _require_samples(w: Waveform) -> None:
    if len(w) == 0:
        raise ValueError("empty waveform")


def frame_rms(samples: np.ndarray, frame_length: int, hop_length: int) -> np.ndarray:
    n = samples.size
    n_frames = -(-n // hop_length)
    padded = np.zeros((n_frames - 1) * hop_length + frame_length)
    padded[:n] = samples
    frames = sliding_window_view(padded, frame_length)[::hop_length]
    return np.sqrt(np.mean(frames**2, axis=1))


def frame_rms_db(w: Waveform, p: TrimParams = TrimParams()) -> np.ndarray:
    """Per-frame RMS level in dB relative to the loudest frame.

    All-zero frames (and every frame of an all-zero signal) read ``SILENT_DB``.
    """
    _require_samples(w)
    rms = frame_rms(w.samples, p.frame_length, p.hop_length)
    ref = rms.max()
    out = np.full(rms.shape, SILENT_DB)
    if ref > 0:
        nz = rms > 0
        out[nz] = 20.0 * np.log10(rms[nz] / ref)
    return out


def trim_bounds(w: Waveform, p: TrimParams = TrimParams()) -> tuple[int, int]:
    """Sample interval ``[start, end)`` spanning the active frames; ``(0, 0)`` if none."""
    db = frame_rms_db(w, p)
    active = np.flatnonzero(db > -p.top_db)
    if active.size == 0:
        return 0, 0
    start = int(active[0]) * p.hop_length
    end = min(len(w), int(active[-1]) * p.hop_length + p.frame_length)
    return start, end


def silence_profile(w: Waveform, p: TrimParams = TrimParams()) -> SilenceProfile:
    total = len(w)
    start, end = trim_bounds(w, p)
    if start == end:
        # No active frame: count the whole file as leading silence.
        start = end = total
    return SilenceProfile(
        leading_s=start / w.sample_rate,
        trailing_s=(total - end) / w.sample_rate,
        nonsilent_start=start,
        nonsilent_end=end,
        total_samples=total,
        sample_rate=w.sample_rate,
    )


def trim(w: Waveform, p: TrimParams = TrimParams(), leading_only: bool = False) -> Waveform:
    """Cut leading and trailing silence (only leading with ``leading_only``).

    Raises:
        SilentAudioError: if the waveform has no active frame.
    """
    start, end = trim_bounds(w, p)
    if start == end:
        raise SilentAudioError("no active frame above threshold")
    return w.slice(start, len(w) if leading_only else end)
