"""Minimal RIFF/WAVE codec for 16-bit mono linear PCM."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PCM_FORMAT = 1
SCALE = 32768.0


class WavError(ValueError):
    """Raised when a byte stream is not a supported WAV file."""


@dataclass(frozen=True, eq=False)
class Waveform:
    """Mono sample buffer with amplitudes in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"expected 1-D samples, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if samples.size and np.max(np.abs(samples)) > 1.0:
            raise ValueError("samples must lie in [-1, 1]")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValueError(f"invalid sample rate {self.sample_rate!r}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_seconds(self) -> float:
        return self.samples.size / self.sample_rate

    def __eq__(self, other):
        if not isinstance(other, Waveform):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(self.samples, other.samples)

    def slice(self, start: int, end: int) -> "Waveform":
        return Waveform(self.samples[start:end], self.sample_rate)


def _chunks(data: bytes):
    pos = 12
    while pos + 8 <= len(data):
        ident, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise WavError(f"truncated {ident.decode('latin-1')!r} chunk: "
                           f"header says {size} bytes, {len(body)} present")
        yield ident, body
        pos += 8 + size + (size & 1)


def decode_wav(data: bytes) -> Waveform:
    """Decode a 16-bit mono PCM WAV byte string.

    Integer samples are scaled by 1/32768, so the result lies in [-1, 1).
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavError("not a RIFF/WAVE file")
    fmt = None
    payload = None
    for ident, body in _chunks(data):
        if ident == b"fmt ":
            if len(body) < 16:
                raise WavError("truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body)
        elif ident == b"data":
            payload = body
            break
    if fmt is None:
        raise WavError("missing fmt chunk")
    if payload is None:
        raise WavError("missing data chunk")
    audio_format, channels, rate, _, _, bits = fmt
    if audio_format != PCM_FORMAT:
        raise WavError(f"format={audio_format} unsupported (only linear PCM)")
    if channels != 1:
        raise WavError(f"channels={channels} unsupported")
    if bits != 16:
        raise WavError(f"bits_per_sample={bits} unsupported")
    if rate == 0:
        raise WavError("sample rate 0")
    if len(payload) % 2:
        raise WavError("data chunk has odd byte count")
    ints = np.frombuffer(payload, dtype="<i2")
    return Waveform(ints.astype(np.float64) / SCALE, rate)


def encode_wav(w: Waveform) -> bytes:
    """Encode as 16-bit mono PCM; amplitudes are rounded and clipped to int16."""
    if len(w) == 0:
        raise WavError("zero-length audio is not writable")
    ints = np.clip(np.round(w.samples * SCALE), -32768, 32767).astype("<i2")
    payload = ints.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, PCM_FORMAT, 1, w.sample_rate, w.sample_rate * 2, 2, 16,
        b"data", len(payload),
    )
    return header + payload


def read_wav(path: str | Path) -> Waveform:
    try:
        return decode_wav(Path(path).read_bytes())
    except WavError as exc:
        raise WavError(f"{path}: {exc}") from None


def write_wav(w: Waveform, path: str | Path) -> None:
    Path(path).write_bytes(encode_wav(w))


def audio_path(audio_dir: str | Path, utterance_id: str) -> Path:
    return Path(audio_dir) / f"{utterance_id}.wav"
