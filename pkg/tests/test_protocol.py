import pytest
from hypothesis import given, strategies as st

from silence_audit.protocol import (
    DuplicateUtteranceError,
    ProtocolError,
    TrialRecord,
    format_protocol,
    parse_protocol,
    summarize,
)


def test_bonafide_line():
    [r] = parse_protocol("LA_0079 LA_T_1138215 - - bonafide\n")
    assert r == TrialRecord("LA_0079", "LA_T_1138215", None, "bonafide")
    assert r.label == 0 and r.group == "bonafide"


def test_spoof_line():
    [r] = parse_protocol("LA_0079 LA_T_1007571 - A01 spoof")
    assert r.attack_id == "A01" and r.key == "spoof" and r.label == 1


def test_key_attack_inconsistency():
    with pytest.raises(ProtocolError, match="inconsistency"):
        parse_protocol("LA_0079 LA_T_x - A01 bonafide")
    with pytest.raises(ProtocolError):
        parse_protocol("LA_0079 LA_T_y - - spoof")


@pytest.mark.parametrize("line", ["LA_0079 LA_T_1 - A01", "a b c d e f", "LA_0079 LA_T_1 - A01 fake"])
def test_malformed_line_reports_line_number(line):
    text = "LA_0079 LA_T_0 - - bonafide\n\n" + line + "\n"
    with pytest.raises(ProtocolError) as info:
        parse_protocol(text)
    assert info.value.line_number == 3
    assert "line 3" in str(info.value)


def test_duplicate_utterance_is_error():
    text = "S1 U1 - - bonafide\nS2 U1 - A02 spoof\n"
    with pytest.raises(DuplicateUtteranceError):
        parse_protocol(text)


def test_tabs_and_padding_accepted():
    [r] = parse_protocol("  LA_0001\tLA_T_2 \t -   A19\tspoof  \n")
    assert r.attack_id == "A19"


def test_unknown_attack_ids_accepted_verbatim():
    [r] = parse_protocol("S U - A99x spoof")
    assert r.attack_id == "A99x"


def test_blank_lines_skipped():
    assert parse_protocol("\n  \n") == []


def test_summarize_empty():
    s = summarize([])
    assert s.counts == {} and s.bonafide_count == 0 and s.spoof_count == 0


def test_summarize_counts():
    recs = [TrialRecord("S", f"B{i}", None, "bonafide") for i in range(2)]
    recs += [TrialRecord("S", f"A{i}", "A01", "spoof") for i in range(3)]
    s = summarize(recs)
    assert (s.bonafide_count, s.spoof_count, s.counts) == (2, 3, {"A01": 3})


def test_summarize_two_attacks():
    recs = [
        TrialRecord("S", "b", None, "bonafide"),
        TrialRecord("S", "x", "A01", "spoof"),
        TrialRecord("S", "y", "A02", "spoof"),
    ]
    assert set(summarize(recs).counts) == {"A01", "A02"}


token = st.text(alphabet="ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_", min_size=1, max_size=12)


@st.composite
def records(draw):
    ids = draw(st.lists(token, unique=True, max_size=30))
    out = []
    for utt in ids:
        attack = draw(st.one_of(st.none(), token.filter(lambda t: t != "-")))
        out.append(TrialRecord(draw(token), utt, attack, "bonafide" if attack is None else "spoof"))
    return out


@given(records())
def test_round_trip(recs):
    assert parse_protocol(format_protocol(recs)) == recs


@given(records())
def test_partition(recs):
    s = summarize(recs)
    assert sum(s.counts.values()) == s.spoof_count
    assert s.total == len(recs)
