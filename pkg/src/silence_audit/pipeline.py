"""Corpus-level stages shared by the CLI commands."""
from __future__ import annotations

import logging
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from . import features
from .audio import Waveform, audio_path, read_wav
from .augment import SubselectParams, subselect
from .features import DurationFeatureMode, Normalizer
from .metrics import accuracy_at, compute_eer, scored_trials
from .model import FcnnParams, TrainConfig, random_baseline, score, train
from .protocol import TrialRecord, read_protocol
from .report import AuditReport, ClassifierResult, per_attack_stats
from .silence import SilenceProfile, SilentAudioError, TrimParams, silence_profile, trim

logger = logging.getLogger(__name__)


class MissingAudioError(FileNotFoundError):
    pass


@dataclass(frozen=True)
class SplitSource:
    protocol: Path
    audio_dir: Path

    def records(self) -> list[TrialRecord]:
        return read_protocol(self.protocol)


@dataclass(frozen=True)
class Split:
    name: str
    records: list[TrialRecord]
    audio_dir: Path

    @classmethod
    def load(cls, name: str, source: SplitSource) -> "Split":
        return cls(name, source.records(), Path(source.audio_dir))


def load_waveforms(split: Split, skip_missing: bool = False, workers: int = 1) -> dict[str, Waveform]:
    """Decode every trial's audio, keyed by utterance id in protocol order."""
    paths = [(r.utterance_id, audio_path(split.audio_dir, r.utterance_id)) for r in split.records]
    missing = [u for u, p in paths if not p.exists()]
    if missing:
        if not skip_missing:
            raise MissingAudioError(
                f"split {split.name!r}: missing audio for {len(missing)} trial(s), first: {missing[0]}"
            )
        logger.warning("split %r: skipping %d trial(s) without audio, first: %s",
                       split.name, len(missing), missing[0])
        gone = set(missing)
        paths = [(u, p) for u, p in paths if u not in gone]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            waves = list(pool.map(read_wav, (p for _, p in paths)))
    else:
        waves = [read_wav(p) for _, p in paths]
    return {u: w for (u, _), w in zip(paths, waves)}


def trimmed_profile(w: Waveform, params: TrimParams) -> SilenceProfile:
    """Profile of the trimmed waveform; fully silent input keeps its own profile."""
    try:
        return silence_profile(trim(w, params), params)
    except SilentAudioError:
        return silence_profile(w, params)


def profile_split(
    split: Split,
    params: TrimParams = TrimParams(),
    *,
    trim_first: bool = False,
    skip_missing: bool = False,
    workers: int = 1,
) -> dict[str, SilenceProfile]:
    """Silence profiles for every trial (optionally measured after trimming)."""
    waves = load_waveforms(split, skip_missing, workers)
    fn: Callable[[Waveform], SilenceProfile]
    if trim_first:
        fn = lambda w: trimmed_profile(w, params)  # noqa: E731
    else:
        fn = lambda w: silence_profile(w, params)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            profiles = list(pool.map(fn, waves.values()))
    else:
        profiles = [fn(w) for w in waves.values()]
    return dict(zip(waves, profiles))


def feature_table(
    records: Sequence[TrialRecord], profiles: Mapping[str, SilenceProfile], mode: DurationFeatureMode
):
    """Utterance ids, raw features, labels and keys for records that have a profile."""
    rows = [(r, profiles[r.utterance_id]) for r in records if r.utterance_id in profiles]
    ids = [r.utterance_id for r, _ in rows]
    xs = np.array([features.extract(p, mode) for _, p in rows], dtype=np.float64)
    ys = np.array([r.label for r, _ in rows], dtype=np.int64)
    keys = [r.key for r, _ in rows]
    return ids, xs, ys, keys


@dataclass
class DurationClassifier:
    params: FcnnParams
    normalizer: Normalizer
    mode: DurationFeatureMode
    trim: TrimParams
    config: TrainConfig
    history: list[float] = field(default_factory=list)

    def score_features(self, xs) -> np.ndarray:
        return score(self.params, features.apply(self.normalizer, np.asarray(xs, dtype=np.float64)))

    def checkpoint_extra(self) -> dict:
        return {
            "normalizer": self.normalizer.to_dict(),
            "feature": self.mode.value,
            "trim": asdict(self.trim),
            "train_config": asdict(self.config),
            "history": self.history,
        }

    @classmethod
    def from_checkpoint(cls, params: FcnnParams, payload: dict) -> "DurationClassifier":
        return cls(
            params=params,
            normalizer=Normalizer(**payload["normalizer"]),
            mode=DurationFeatureMode.parse(payload["feature"]),
            trim=TrimParams(**payload["trim"]),
            config=TrainConfig(**payload["train_config"]),
            history=list(payload.get("history", [])),
        )


def train_classifier(
    records: Sequence[TrialRecord],
    profiles: Mapping[str, SilenceProfile],
    mode: DurationFeatureMode,
    trim_params: TrimParams,
    cfg: TrainConfig,
    *,
    waveforms: Optional[Mapping[str, Waveform]] = None,
    subselect_params: SubselectParams = SubselectParams(),
) -> DurationClassifier:
    """Fit the normalizer and FCNN on one (training) split.

    With subselection enabled, each epoch re-measures the feature on a fresh
    random slice of every training waveform; the normalizer is still fitted on
    the full-length features.
    """
    ids, xs, ys, _ = feature_table(records, profiles, mode)
    normalizer = features.fit(xs)
    resample = None
    if subselect_params.enabled:
        if waveforms is None:
            raise ValueError("subselection needs the training waveforms")

        def fresh_features(epoch: int) -> np.ndarray:
            rng = np.random.default_rng([cfg.seed, epoch])
            raw = [
                features.extract(silence_profile(subselect(waveforms[u], subselect_params, rng), trim_params), mode)
                for u in ids
            ]
            return features.apply(normalizer, np.asarray(raw))

        resample = fresh_features

    params, history = train(features.apply(normalizer, xs), ys, cfg, resample=resample)
    return DurationClassifier(params, normalizer, mode, trim_params, cfg, history)


def evaluate_scores(ids, scores, keys) -> ClassifierResult:
    trials = scored_trials(ids, scores, keys)
    eer = compute_eer(trials)
    return ClassifierResult(eer.eer, eer.threshold, accuracy_at(trials, eer.threshold), len(trials))


def evaluate_classifier(
    clf: DurationClassifier, records: Sequence[TrialRecord], profiles: Mapping[str, SilenceProfile]
):
    """Score a split; returns the result plus ``(ids, scores, keys)``."""
    ids, xs, _, keys = feature_table(records, profiles, clf.mode)
    scores = clf.score_features(xs)
    return evaluate_scores(ids, scores, keys), (ids, scores, keys)


def split_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


@dataclass(frozen=True)
class AuditConfig:
    trim: TrimParams = TrimParams()
    mode: DurationFeatureMode = DurationFeatureMode.LEADING
    train: TrainConfig = TrainConfig()
    subselect: SubselectParams = SubselectParams()
    train_split: str = "train"
    skip_missing: bool = False
    workers: int = 1

    def echo(self) -> dict:
        return {
            "trim": asdict(self.trim),
            "feature": self.mode.value,
            "train": asdict(self.train),
            "subselect_seconds": self.subselect.t_seconds,
            "train_split": self.train_split,
        }


def run_audit(splits: Sequence[Split], cfg: AuditConfig = AuditConfig()):
    """Profiles, per-attack statistics and duration-only classifier for every split.

    The classifier is trained on ``cfg.train_split`` (when present) and scored
    on every split; the normalizer is never refitted on other splits.
    Returns the report and the per-split profiles.
    """
    profiles = {}
    waveforms = {}
    for s in splits:
        if cfg.subselect.enabled and s.name == cfg.train_split:
            waveforms = load_waveforms(s, cfg.skip_missing, cfg.workers)
            profiles[s.name] = {u: silence_profile(w, cfg.trim) for u, w in waveforms.items()}
        else:
            profiles[s.name] = profile_split(s, cfg.trim, skip_missing=cfg.skip_missing, workers=cfg.workers)
        logger.info("profiled %d trials in split %r", len(profiles[s.name]), s.name)

    stats = {s.name: per_attack_stats(s.records, profiles[s.name]) for s in splits}
    report = AuditReport(stats, config=cfg.echo())

    for s in splits:
        ids, _, _, keys = feature_table(s.records, profiles[s.name], cfg.mode)
        rand = random_baseline(len(ids), split_rng(cfg.train.seed, s.name))
        report.random_baseline[s.name] = evaluate_scores(ids, rand, keys)

    by_name = {s.name: s for s in splits}
    if cfg.train_split in by_name:
        train_split = by_name[cfg.train_split]
        clf = train_classifier(
            train_split.records, profiles[train_split.name], cfg.mode, cfg.trim, cfg.train,
            waveforms=waveforms or None, subselect_params=cfg.subselect,
        )
        report.classifier = {
            s.name: evaluate_classifier(clf, s.records, profiles[s.name])[0] for s in splits
        }
        report.final_train_loss = clf.history[-1]
    else:
        logger.warning("no %r split given; skipping the duration classifier", cfg.train_split)
    return report, profiles
