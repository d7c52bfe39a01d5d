"""Synthetic corpora with controlled per-class silence durations.

Every trial is ``zeros(leading) + speech + zeros(trailing)`` where speech is a
0.5-amplitude tone or uniform noise. Durations are drawn from per-class
Gaussians truncated from below by resampling. Each trial draws from its own
RNG stream keyed on (seed, split, class, index), so output does not depend on
generation order or worker count.
"""
from __future__ import annotations

import csv
import json
import logging
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .audio import Waveform, write_wav
from .protocol import BONAFIDE, NONE_TOKEN, SPOOF, TrialRecord, write_protocol

logger = logging.getLogger(__name__)

SPEECH_AMPLITUDE = 0.5
MIN_SPEECH_S = 0.2
MAX_REDRAWS = 10_000
MANIFEST_FIELDS = ("utterance_id", "attack_id", "key", "leading_s", "trailing_s", "speech_s", "total_s")
PRESETS = ("paper_like", "separable", "null", "dev_eval_gap")


@dataclass(frozen=True)
class Gaussian:
    mean: float
    std: float = 0.0

    def __post_init__(self):
        if self.std < 0:
            raise ValueError(f"std must be >= 0, got {self.std}")

    def draw(self, rng: np.random.Generator, lower: float) -> float:
        if self.std == 0:
            if self.mean < lower:
                raise ValueError(f"constant duration {self.mean} below minimum {lower}")
            return self.mean
        for _ in range(MAX_REDRAWS):
            value = rng.normal(self.mean, self.std)
            if value >= lower:
                return float(value)
        raise ValueError(f"could not draw >= {lower} from N({self.mean}, {self.std})")


@dataclass(frozen=True)
class ClassSpec:
    attack_id: Optional[str]  # None for bonafide
    count: int
    leading_s: Gaussian
    trailing_s: Gaussian
    speech_s: Gaussian = Gaussian(1.0, 0.2)
    speech_kind: str = "tone"
    tone_hz: float = 440.0
    noise_amplitude: float = SPEECH_AMPLITUDE

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("class count must be >= 1")
        if self.speech_kind not in ("tone", "noise"):
            raise ValueError(f"unknown speech kind {self.speech_kind!r}")

    @property
    def key(self) -> str:
        return BONAFIDE if self.attack_id is None else SPOOF

    @property
    def token(self) -> str:
        return self.attack_id or BONAFIDE


@dataclass(frozen=True)
class CorpusSpec:
    sample_rate: int
    classes: tuple[ClassSpec, ...]
    seed: int = 0
    salt: str = ""  # distinguishes splits sharing one seed

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        keys = {c.key for c in self.classes}
        if keys != {BONAFIDE, SPOOF}:
            raise ValueError("corpus needs at least one bonafide and one spoof class")
        tokens = [c.token for c in self.classes]
        if len(set(tokens)) != len(tokens):
            raise ValueError("duplicate class in corpus spec")


@dataclass(frozen=True)
class TrialTruth:
    utterance_id: str
    attack_id: Optional[str]
    key: str
    leading_samples: int
    speech_samples: int
    trailing_samples: int
    sample_rate: int

    @property
    def leading_s(self) -> float:
        return self.leading_samples / self.sample_rate

    @property
    def trailing_s(self) -> float:
        return self.trailing_samples / self.sample_rate

    @property
    def speech_s(self) -> float:
        return self.speech_samples / self.sample_rate

    @property
    def total_s(self) -> float:
        return (self.leading_samples + self.speech_samples + self.trailing_samples) / self.sample_rate


@dataclass
class GeneratedCorpus:
    root: Path
    protocol_path: Path
    audio_dir: Path
    manifest_path: Path
    records: list[TrialRecord] = field(default_factory=list)
    truth: list[TrialTruth] = field(default_factory=list)


def utterance_id(token: str, index: int) -> str:
    return f"SYN_{token}_{index:05d}"


def _rng(spec: CorpusSpec, class_index: int, index: int) -> np.random.Generator:
    return np.random.default_rng([spec.seed, zlib.crc32(spec.salt.encode()), class_index, index])


def synthesize_trial(spec: CorpusSpec, class_index: int, index: int) -> tuple[TrialRecord, Waveform, TrialTruth]:
    """Build one trial in memory."""
    cls = spec.classes[class_index]
    rng = _rng(spec, class_index, index)
    rate = spec.sample_rate
    lead = round(cls.leading_s.draw(rng, 0.0) * rate)
    trail = round(cls.trailing_s.draw(rng, 0.0) * rate)
    n_speech = round(cls.speech_s.draw(rng, MIN_SPEECH_S) * rate)
    if cls.speech_kind == "tone":
        speech = SPEECH_AMPLITUDE * np.sin(2 * np.pi * cls.tone_hz * np.arange(n_speech) / rate)
    else:
        speech = rng.uniform(-cls.noise_amplitude, cls.noise_amplitude, n_speech)
    samples = np.concatenate((np.zeros(lead), speech, np.zeros(trail)))
    utt = utterance_id(cls.token, index)
    record = TrialRecord("SYN", utt, cls.attack_id, cls.key)
    truth = TrialTruth(utt, cls.attack_id, cls.key, lead, n_speech, trail, rate)
    return record, Waveform(samples, rate), truth


def iter_trials(spec: CorpusSpec):
    for ci, cls in enumerate(spec.classes):
        for i in range(cls.count):
            yield ci, i


def generate(spec: CorpusSpec, out_dir: str | Path, workers: int = 1) -> GeneratedCorpus:
    """Write ``protocol.txt``, ``wav/<utt>.wav`` and ``manifest.csv`` under ``out_dir``."""
    root = Path(out_dir)
    audio_dir = root / "wav"
    audio_dir.mkdir(parents=True, exist_ok=True)

    def make(job):
        record, wave, truth = synthesize_trial(spec, *job)
        write_wav(wave, audio_dir / f"{record.utterance_id}.wav")
        return record, truth

    jobs = list(iter_trials(spec))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(make, jobs))
    else:
        results = [make(job) for job in jobs]

    corpus = GeneratedCorpus(root, root / "protocol.txt", audio_dir, root / "manifest.csv")
    corpus.records = [r for r, _ in results]
    corpus.truth = [t for _, t in results]
    write_protocol(corpus.records, corpus.protocol_path)
    write_manifest(corpus.truth, corpus.manifest_path)
    logger.info("wrote %d trials to %s", len(jobs), root)
    return corpus


def generate_splits(specs: dict[str, CorpusSpec], out_dir: str | Path, workers: int = 1) -> dict[str, GeneratedCorpus]:
    """Generate each split into ``out_dir/<split>/``."""
    return {name: generate(spec, Path(out_dir) / name, workers) for name, spec in specs.items()}


def write_manifest(truth: list[TrialTruth], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_FIELDS)
        for t in truth:
            writer.writerow([
                t.utterance_id, t.attack_id or NONE_TOKEN, t.key,
                repr(t.leading_s), repr(t.trailing_s), repr(t.speech_s), repr(t.total_s),
            ])


def read_manifest(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        for k in ("leading_s", "trailing_s", "speech_s", "total_s"):
            row[k] = float(row[k])
    return rows


# --- declarative spec files -------------------------------------------------

def _gaussian(value) -> Gaussian:
    if isinstance(value, (int, float)):
        return Gaussian(float(value), 0.0)
    if isinstance(value, (list, tuple)):
        return Gaussian(*map(float, value))
    return Gaussian(float(value["mean"]), float(value.get("std", 0.0)))


def _class_spec(d: dict) -> ClassSpec:
    attack = d.get("attack_id")
    speech = d.get("speech", {"kind": "tone"})
    return ClassSpec(
        attack_id=None if attack in (None, NONE_TOKEN, BONAFIDE) else str(attack),
        count=int(d["count"]),
        leading_s=_gaussian(d["leading_s"]),
        trailing_s=_gaussian(d["trailing_s"]),
        speech_s=_gaussian(d.get("speech_s", {"mean": 1.0, "std": 0.2})),
        speech_kind=speech.get("kind", "tone"),
        tone_hz=float(speech.get("freq_hz", 440.0)),
        noise_amplitude=float(speech.get("amplitude", SPEECH_AMPLITUDE)),
    )


def specs_from_dict(d: dict, seed: Optional[int] = None) -> dict[str, CorpusSpec]:
    """Parse a spec document into ``{split: CorpusSpec}``.

    A document with a top-level ``classes`` list describes a single corpus and
    maps to the split name ``""`` (written directly into the output directory).
    """
    rate = int(d.get("sample_rate", 16000))
    base_seed = int(d.get("seed", 0) if seed is None else seed)
    if "classes" in d:
        splits = {"": d}
    else:
        splits = d["splits"]
    return {
        name: CorpusSpec(rate, tuple(_class_spec(c) for c in body["classes"]), base_seed, name)
        for name, body in splits.items()
    }


def load_spec(path: str | Path, seed: Optional[int] = None) -> dict[str, CorpusSpec]:
    return specs_from_dict(json.loads(Path(path).read_text(encoding="utf-8")), seed)


def load_preset(name: str, seed: Optional[int] = None) -> dict[str, CorpusSpec]:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("silence_audit").joinpath("presets", f"{name}.json").read_text(encoding="utf-8")
    return specs_from_dict(json.loads(text), seed)


def scale_counts(specs: dict[str, CorpusSpec], factor: float) -> dict[str, CorpusSpec]:
    """Shrink or grow every class count (minimum 1), e.g. for quick smoke runs."""
    return {
        name: replace(s, classes=tuple(replace(c, count=max(1, round(c.count * factor))) for c in s.classes))
        for name, s in specs.items()
    }
