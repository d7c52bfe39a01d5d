"""Command-line front end: synth, stats, audit, train, eval, trim-export.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

from . import synth
from .audio import WavError, encode_wav
from .augment import DISABLED, SubselectParams
from .features import DurationFeatureMode
from .metrics import write_scores, scored_trials
from .model import TrainConfig, load_checkpoint, save_checkpoint
from .pipeline import (
    AuditConfig, DurationClassifier, MissingAudioError, Split, SplitSource,
    evaluate_classifier, load_waveforms, profile_split, run_audit, train_classifier,
)
from .protocol import ProtocolError, write_protocol
from .report import UnmatchedProfileError, emit, per_attack_stats, profiles_csv, stats_csv
from .silence import SilentAudioError, TrimParams, silence_profile, trim

logger = logging.getLogger("silence_audit")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
DEFAULT_SPLIT = "all"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _trim_flags(p: argparse.ArgumentParser, defaults: bool = True) -> None:
    g = p.add_argument_group("silence detection")
    g.add_argument("--top-db", type=float, default=40.0 if defaults else None,
                   help="threshold below the loudest frame, in dB (default 40)")
    g.add_argument("--frame-length", type=int, default=2048 if defaults else None)
    g.add_argument("--hop-length", type=int, default=512 if defaults else None)


def _corpus_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("corpus")
    g.add_argument("--corpus", type=Path, help="directory laid out as written by `synth`")
    g.add_argument("--protocol", action="append", default=[], metavar="[SPLIT=]PATH",
                   help="CM protocol file; repeat with SPLIT= prefixes for several splits")
    g.add_argument("--audio-dir", action="append", default=[], metavar="[SPLIT=]DIR",
                   help="directory holding <utterance_id>.wav")
    g.add_argument("--split", help="split to use (train/eval default to 'train'/'eval')")
    g.add_argument("--skip-missing", action="store_true",
                   help="warn about and skip trials whose audio is missing")
    g.add_argument("--workers", type=int, default=min(4, os.cpu_count() or 1))


def _train_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("training")
    g.add_argument("--feature", choices=[m.value for m in DurationFeatureMode], default="leading")
    g.add_argument("--subselect-seconds", type=float, default=DISABLED,
                   help="random slice length per epoch; -1 disables (default)")
    g.add_argument("--epochs", type=int, default=50)
    g.add_argument("--lr", type=float, default=0.001)
    g.add_argument("--weight-decay", type=float, default=1e-6)
    g.add_argument("--dropout", type=float, default=0.10)
    g.add_argument("--batch-size", type=int, default=64)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="silence-audit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", type=Path, help="JSON corpus spec")
    src.add_argument("--preset", choices=synth.PRESETS)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--scale", type=float, default=1.0, help="multiply every class count")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("stats", parents=[common], help="silence profiles and per-attack statistics")
    _corpus_flags(p)
    _trim_flags(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("audit", parents=[common], help="statistics plus duration-only classifier report")
    _corpus_flags(p)
    _trim_flags(p)
    _train_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("train", parents=[common], help="fit the duration classifier on one split")
    _corpus_flags(p)
    _trim_flags(p)
    _train_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("eval", parents=[common], help="score a split with a trained checkpoint")
    _corpus_flags(p)
    _trim_flags(p, defaults=False)
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--trim-eval", action="store_true",
                   help="trim silence from the evaluated audio before measuring")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("trim-export", parents=[common], help="write a copy of the corpus with silence trimmed")
    _corpus_flags(p)
    _trim_flags(p)
    p.add_argument("--leading-only", action="store_true", help="remove only leading silence")
    p.add_argument("--out", type=Path, required=True)
    return parser


# --- corpus resolution --------------------------------------------------------

def _named(values: Sequence[str]) -> dict[str, Path]:
    out = {}
    for v in values:
        name, sep, path = v.partition("=")
        if not sep:
            name, path = "", v
        if name in out:
            raise UsageError(f"split {name or '(unnamed)'} given twice")
        out[name] = Path(path)
    return out


def resolve_sources(args) -> dict[str, SplitSource]:
    sources: dict[str, SplitSource] = {}
    if args.corpus is not None:
        root = args.corpus
        if (root / "protocol.txt").exists():
            sources[DEFAULT_SPLIT] = SplitSource(root / "protocol.txt", root / "wav")
        else:
            for d in sorted(p for p in root.iterdir() if (p / "protocol.txt").exists()):
                sources[d.name] = SplitSource(d / "protocol.txt", d / "wav")
        if not sources:
            raise UsageError(f"no protocol.txt found under {root}")
    protocols = _named(args.protocol)
    audio_dirs = _named(args.audio_dir)
    for name, proto in protocols.items():
        audio = audio_dirs.get(name, audio_dirs.get("") if len(protocols) == 1 else None)
        if audio is None:
            raise UsageError(f"--audio-dir missing for protocol {proto}")
        sources[name or args.split or DEFAULT_SPLIT] = SplitSource(proto, audio)
    if not sources:
        raise UsageError("give --corpus or --protocol/--audio-dir")
    return sources


def select_one(sources: dict[str, SplitSource], wanted: Optional[str], default: str) -> tuple[str, SplitSource]:
    name = wanted or default
    if name in sources:
        return name, sources[name]
    if wanted is None and len(sources) == 1:
        return next(iter(sources.items()))
    raise UsageError(f"split {name!r} not found (have: {', '.join(sources)})")


def select_many(sources: dict[str, SplitSource], wanted: Optional[str]) -> dict[str, SplitSource]:
    if wanted is None:
        return sources
    return dict([select_one(sources, wanted, wanted)])


def _trim_params(args) -> TrimParams:
    try:
        return TrimParams(args.top_db, args.frame_length, args.hop_length)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _train_config(args) -> TrainConfig:
    try:
        return TrainConfig(args.epochs, args.lr, args.weight_decay, args.dropout, args.batch_size, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _subselect(args) -> SubselectParams:
    try:
        return SubselectParams(args.subselect_seconds, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# --- commands -------------------------------------------------------------------

def cmd_synth(args) -> None:
    specs = synth.load_spec(args.spec, args.seed) if args.spec else synth.load_preset(args.preset, args.seed)
    if args.scale != 1.0:
        specs = synth.scale_counts(specs, args.scale)
    for name, spec in specs.items():
        synth.generate(spec, args.out / name if name else args.out, args.workers)


def cmd_stats(args) -> None:
    params = _trim_params(args)
    splits = {}
    for name, src in select_many(resolve_sources(args), args.split).items():
        split = Split.load(name, src)
        profiles = profile_split(split, params, skip_missing=args.skip_missing, workers=args.workers)
        _write(args.out / f"profiles_{name}.csv", profiles_csv(split.records, profiles))
        splits[name] = per_attack_stats(split.records, profiles)
    _write(args.out / "stats.csv", stats_csv(splits))


def cmd_audit(args) -> None:
    sources = select_many(resolve_sources(args), args.split)
    splits = [Split.load(n, s) for n, s in sources.items()]
    cfg = AuditConfig(
        trim=_trim_params(args),
        mode=DurationFeatureMode.parse(args.feature),
        train=_train_config(args),
        subselect=_subselect(args),
        train_split="train" if "train" in sources or len(sources) != 1 else next(iter(sources)),
        skip_missing=args.skip_missing,
        workers=args.workers,
    )
    report, profiles = run_audit(splits, cfg)
    for s in splits:
        _write(args.out / f"profiles_{s.name}.csv", profiles_csv(s.records, profiles[s.name]))
    emit(report, args.out)


def cmd_train(args) -> None:
    name, src = select_one(resolve_sources(args), args.split, "train")
    split = Split.load(name, src)
    params = _trim_params(args)
    sub = _subselect(args)
    waves = load_waveforms(split, args.skip_missing, args.workers)
    profiles = {u: silence_profile(w, params) for u, w in waves.items()}
    clf = train_classifier(
        split.records, profiles, DurationFeatureMode.parse(args.feature), params, _train_config(args),
        waveforms=waves if sub.enabled else None, subselect_params=sub,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(args.out / "checkpoint.json", clf.params, split=name,
                    subselect_seconds=sub.t_seconds, **clf.checkpoint_extra())
    logger.info("trained on %d trials of %r; final loss %.6f", len(profiles), name, clf.history[-1])


def cmd_eval(args) -> None:
    params, payload = load_checkpoint(args.checkpoint)
    clf = DurationClassifier.from_checkpoint(params, payload)
    for attr in ("top_db", "frame_length", "hop_length"):
        if getattr(args, attr) is None:
            setattr(args, attr, getattr(clf.trim, attr))
    trim_params = _trim_params(args)
    name, src = select_one(resolve_sources(args), args.split, "eval")
    split = Split.load(name, src)
    profiles = profile_split(split, trim_params, trim_first=args.trim_eval,
                             skip_missing=args.skip_missing, workers=args.workers)
    result, (ids, scores, keys) = evaluate_classifier(clf, split.records, profiles)
    args.out.mkdir(parents=True, exist_ok=True)
    write_scores(args.out / f"scores_{name}.txt", scored_trials(ids, scores, keys))
    summary = {"split": name, "trim_eval": args.trim_eval, "feature": clf.mode.value,
               "trim": asdict(trim_params), **result.to_dict()}
    _write(args.out / f"eval_{name}.json", json.dumps(summary, indent=2) + "\n")
    print(f"{name}: EER {result.eer:.4f}  accuracy {result.accuracy:.4f}  (n={result.n})")


def cmd_trim_export(args) -> None:
    params = _trim_params(args)
    for name, src in select_many(resolve_sources(args), args.split).items():
        split = Split.load(name, src)
        dest = args.out / name
        wav_dir = dest / "wav"
        wav_dir.mkdir(parents=True, exist_ok=True)
        waves = load_waveforms(split, args.skip_missing, args.workers)
        kept, warnings = [], []
        for r in split.records:
            w = waves.get(r.utterance_id)
            if w is None:
                continue
            try:
                out = trim(w, params, leading_only=args.leading_only)
            except SilentAudioError:
                warnings.append((r.utterance_id, "no active frame; file skipped"))
                logger.warning("%s: fully silent, not exported", r.utterance_id)
                continue
            (wav_dir / f"{r.utterance_id}.wav").write_bytes(encode_wav(out))
            kept.append(r)
        write_protocol(kept, dest / "protocol.txt")
        with open(dest / "trim_warnings.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("utterance_id", "warning"))
            writer.writerows(warnings)
        logger.info("split %r: exported %d trimmed files, %d skipped", name, len(kept), len(warnings))


COMMANDS = {
    "synth": cmd_synth,
    "stats": cmd_stats,
    "audit": cmd_audit,
    "train": cmd_train,
    "eval": cmd_eval,
    "trim-export": cmd_trim_export,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProtocolError, WavError, MissingAudioError, UnmatchedProfileError, FileNotFoundError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run())
