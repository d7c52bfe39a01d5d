import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from silence_audit import report, synth
from silence_audit.model import TrainConfig
from silence_audit.pipeline import AuditConfig, Split, run_audit
from silence_audit.protocol import TrialRecord
from silence_audit.report import AttackStats, AuditReport, SplitStats, UnmatchedProfileError
from silence_audit.silence import SilenceProfile

GOLDEN = Path(__file__).parent / "golden"
RATE = 16000


def prof(lead, trail=0.0, total=4.0):
    n = round(total * RATE)
    return SilenceProfile(lead, trail, round(lead * RATE), n - round(trail * RATE), n, RATE)


def rec(utt, attack):
    return TrialRecord("S", utt, attack, "bonafide" if attack is None else "spoof")


def test_single_group_example():
    records = [rec("a", "A01"), rec("b", "A01")]
    stats = report.per_attack_stats(records, {"a": prof(0.5, 0.5), "b": prof(1.0, 2.0)})
    (a,) = stats.attacks
    assert (a.attack_id, a.n, a.mean_s, a.std_s) == ("A01", 2, 2.0, 1.0)
    assert (a.leading_mean_s, a.leading_std_s) == (0.75, 0.25)


def test_pooled_mean_with_one_attack():
    records = [rec("a", None), rec("b", "A05"), rec("c", "A05")]
    stats = report.per_attack_stats(records, {"a": prof(1.0), "b": prof(0.1), "c": prof(0.3)})
    assert [a.attack_id for a in stats.attacks] == ["bonafide", "A05"]
    assert stats.spoof_mean_s == stats.attacks[1].mean_s == pytest.approx(0.2)


def test_every_attack_once_and_bonafide_first():
    records = [rec("x", "A10"), rec("y", None), rec("z", "A02"), rec("w", "A10")]
    profiles = {r.utterance_id: prof(0.1) for r in records}
    ids = [a.attack_id for a in report.per_attack_stats(records, profiles).attacks]
    assert ids == ["bonafide", "A02", "A10"]


def test_unmatched_profile_lists_offenders():
    with pytest.raises(UnmatchedProfileError) as exc:
        report.per_attack_stats([rec("a", None)], {"a": prof(0.1), "q": prof(0.1), "r": prof(0.2)})
    assert exc.value.missing == ["q", "r"]
    assert "q" in str(exc.value)


def test_records_without_profile_are_ignored():
    stats = report.per_attack_stats([rec("a", None), rec("b", "A01")], {"a": prof(0.1)})
    assert [a.attack_id for a in stats.attacks] == ["bonafide"]
    assert stats.spoof_mean_s is None


def test_permutation_invariance():
    g = np.random.default_rng(0)
    records = [rec(f"u{i}", None if i % 3 == 0 else f"A0{i % 3}") for i in range(60)]
    profiles = {r.utterance_id: prof(g.uniform(0, 1), g.uniform(0, 1)) for r in records}
    base = report.per_attack_stats(records, profiles)
    for _ in range(5):
        order = g.permutation(len(records))
        shuffled = report.per_attack_stats([records[i] for i in order], dict(reversed(profiles.items())))
        assert shuffled.to_dict() == base.to_dict()


def test_emit_rejects_empty_attack_list(tmp_path):
    with pytest.raises(ValueError):
        report.emit(AuditReport({"eval": SplitStats([], None, None)}), tmp_path)
    with pytest.raises(ValueError):
        report.emit(AuditReport({}), tmp_path)


def test_six_decimal_serialization():
    s = SplitStats([AttackStats("bonafide", 3, 1 / 3, 2 / 3, 0.1, 0.0)], None, None)
    text = report.stats_csv({"eval": s})
    assert text.splitlines()[1] == "eval,bonafide,3,0.333333,0.666667,0.100000,0.000000"
    assert s.to_dict()["attacks"][0]["mean_s"] == 0.333333


@pytest.fixture(scope="module")
def small_audit(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    specs = synth.scale_counts(synth.load_preset("paper_like", seed=0), 0.25)
    corpora = synth.generate_splits(specs, root)
    splits = [Split(name, c.records, c.audio_dir) for name, c in corpora.items()]
    cfg = AuditConfig(train=TrainConfig(epochs=3, seed=0))
    rep, profiles = run_audit(splits, cfg)
    return rep, profiles, splits


def test_golden_csv(small_audit, tmp_path):
    rep, _, _ = small_audit
    report.emit(rep, tmp_path)
    assert (tmp_path / "report.csv").read_bytes() == (GOLDEN / "paper_like_0.25_report.csv").read_bytes()


def test_json_round_trip(small_audit, tmp_path):
    rep, _, _ = small_audit
    (path,) = report.emit(rep, tmp_path, formats=("json",))
    assert json.loads(path.read_text()) == rep.to_dict()
    assert json.loads(path.read_text()) == json.loads(json.dumps(rep.to_dict()))


def test_csv_and_json_agree(small_audit):
    rep, _, _ = small_audit
    rows = list(csv.DictReader(io.StringIO(report.stats_csv(rep.splits))))
    doc = rep.to_dict()["splits"]
    assert len(rows) == sum(len(s["attacks"]) for s in doc.values())
    for row in rows:
        match = next(a for a in doc[row["split"]]["attacks"] if a["attack_id"] == row["attack_id"])
        assert int(row["n"]) == match["n"]
        for k in ("mean_s", "std_s", "leading_mean_s", "leading_std_s"):
            assert float(row[k]) == match[k]


def test_report_schema(small_audit):
    doc = small_audit[0].to_dict()
    assert list(doc) == ["config", "splits", "classifier", "random_baseline", "final_train_loss"]
    assert set(doc["splits"]) == {"train", "dev", "eval"}
    for res in doc["classifier"].values():
        assert set(res) == {"eer", "threshold", "accuracy", "n"}


def truncated_mean(g: synth.Gaussian, lower=0.0):
    if g.std == 0:
        return g.mean
    a = (lower - g.mean) / g.std
    pdf = math.exp(-a * a / 2) / math.sqrt(2 * math.pi)
    tail = 0.5 * math.erfc(a / math.sqrt(2))
    return g.mean + g.std * pdf / tail


def configured_gap(spec: synth.CorpusSpec):
    bona = spoof = 0.0
    n_spoof = 0
    for c in spec.classes:
        m = truncated_mean(c.leading_s) + truncated_mean(c.trailing_s)
        if c.attack_id is None:
            bona = m
        else:
            spoof += m * c.count
            n_spoof += c.count
    return bona - spoof / n_spoof


def test_paper_like_gap(tmp_path):
    spec = synth.load_preset("paper_like", seed=0)["eval"]
    corpus = synth.generate(spec, tmp_path)
    expected = configured_gap(spec)

    truth = synth.read_manifest(corpus.manifest_path)
    bona = np.array([t["leading_s"] + t["trailing_s"] for t in truth if t["key"] == "bonafide"])
    spoof = np.array([t["leading_s"] + t["trailing_s"] for t in truth if t["key"] == "spoof"])
    se = math.sqrt(bona.var(ddof=1) / bona.size + spoof.var(ddof=1) / spoof.size)
    assert abs((bona.mean() - spoof.mean()) - expected) <= 3 * se

    rep, _ = run_audit([Split("eval", corpus.records, corpus.audio_dir)], AuditConfig())
    stats = rep.splits["eval"]
    measured = stats.attacks[0].mean_s - stats.spoof_mean_s
    assert abs(measured - expected) <= 3 * se + 2 * 2048 / RATE
