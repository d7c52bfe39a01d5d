import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from silence_audit.audio import Waveform
from silence_audit.augment import DISABLED, SubselectParams, subselect

from conftest import RATE


def ramp(n):
    return Waveform(np.linspace(-0.9, 0.9, n), RATE)


def test_disabled_is_identity(rng):
    w = ramp(1000)
    assert subselect(w, SubselectParams(DISABLED), rng) is w
    assert not SubselectParams().enabled


def test_invalid_duration():
    with pytest.raises(ValueError):
        SubselectParams(0.0)
    with pytest.raises(ValueError):
        SubselectParams(-2.0)


def test_long_input_gives_exact_length(rng):
    out = subselect(ramp(5 * RATE), SubselectParams(2.4), rng)
    assert len(out) == 38400
    assert out.sample_rate == RATE


def test_slice_is_contiguous(rng):
    w = ramp(5 * RATE)
    out = subselect(w, SubselectParams(2.4), rng)
    start = int(np.argmin(np.abs(w.samples - out.samples[0])))
    assert np.array_equal(out.samples, w.samples[start : start + 38400])


def test_short_input_is_tiled(rng):
    w = ramp(RATE)
    out = subselect(w, SubselectParams(2.4), rng)
    assert len(out) == 38400
    k = np.arange(38400)
    assert np.array_equal(out.samples, w.samples[k % RATE])


def test_empty_rejected(rng):
    with pytest.raises(ValueError):
        subselect(Waveform(np.zeros(0), RATE), SubselectParams(1.0), rng)


def test_deterministic_for_seeded_rng():
    w = ramp(5 * RATE)
    a = subselect(w, SubselectParams(1.0), np.random.default_rng(7))
    b = subselect(w, SubselectParams(1.0), np.random.default_rng(7))
    assert a == b


def test_offsets_vary_across_draws():
    w = ramp(5 * RATE)
    g = np.random.default_rng(0)
    firsts = {subselect(w, SubselectParams(1.0), g).samples[0] for _ in range(20)}
    assert len(firsts) > 1


@given(st.integers(1, 4000), st.floats(0.001, 0.3), st.integers(0, 2**32 - 1))
@settings(max_examples=200)
def test_values_come_from_input(n, t, seed):
    w = ramp(n)
    out = subselect(w, SubselectParams(t), np.random.default_rng(seed))
    assert len(out) == max(1, round(t * RATE))
    assert np.isin(out.samples, w.samples).all()
