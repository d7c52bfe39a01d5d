import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from silence_audit.audio import Waveform, WavError, decode_wav, encode_wav, read_wav, write_wav

from conftest import tone


def wav_bytes(ints, rate=16000, channels=1, fmt=1, bits=16, extra_chunk=b""):
    payload = np.asarray(ints, dtype="<i2").tobytes()
    fmt_chunk = struct.pack("<4sIHHIIHH", b"fmt ", 16, fmt, channels, rate, rate * channels * 2, channels * 2, bits)
    body = b"WAVE" + fmt_chunk + extra_chunk + struct.pack("<4sI", b"data", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


def test_decode_zeros():
    w = decode_wav(wav_bytes(np.zeros(16000)))
    assert len(w) == 16000 and w.sample_rate == 16000
    assert np.all(w.samples == 0.0)
    assert w.duration_seconds == 1.0


def test_decode_scaling():
    w = decode_wav(wav_bytes([32767, -32768, 1]))
    assert w.samples[0] == 32767 / 32768
    assert w.samples[1] == -1.0
    assert w.samples[2] == 1 / 32768


def test_decode_skips_unknown_chunks():
    extra = struct.pack("<4sI", b"LIST", 3) + b"abc\x00"  # odd size plus pad byte
    w = decode_wav(wav_bytes([5, 6], extra_chunk=extra))
    assert np.array_equal(w.samples * 32768, [5, 6])


def test_stereo_rejected():
    with pytest.raises(WavError, match="channels=2 unsupported"):
        decode_wav(wav_bytes([0, 0], channels=2))


def test_non_pcm_rejected():
    with pytest.raises(WavError, match="format=3"):
        decode_wav(wav_bytes([0, 0], fmt=3))


def test_bit_depth_rejected():
    with pytest.raises(WavError, match="bits_per_sample=24"):
        decode_wav(wav_bytes([0, 0], bits=24))


def test_truncated_data_rejected():
    data = wav_bytes(np.zeros(100))
    with pytest.raises(WavError, match="truncated"):
        decode_wav(data[:-10])


def test_not_riff():
    with pytest.raises(WavError):
        decode_wav(b"OggS" + bytes(40))


def test_encode_three_zeros():
    data = encode_wav(Waveform(np.zeros(3), 8000))
    assert data[36:40] == b"data"
    assert struct.unpack_from("<I", data, 40)[0] == 6
    assert data[44:] == bytes(6)
    assert len(data) == 50


def test_encode_clamps_full_scale():
    data = encode_wav(Waveform(np.array([1.0, -1.0]), 8000))
    assert np.array_equal(np.frombuffer(data[44:], "<i2"), [32767, -32768])


def test_encode_empty_rejected():
    with pytest.raises(WavError):
        encode_wav(Waveform(np.zeros(0), 16000))


def test_header_count_matches_payload():
    data = encode_wav(Waveform(tone(1234), 16000))
    assert struct.unpack_from("<I", data, 40)[0] == len(data) - 44 == 2 * 1234
    assert struct.unpack_from("<I", data, 4)[0] == len(data) - 8


def test_tone_round_trip():
    w = Waveform(tone(16000), 16000)
    back = decode_wav(encode_wav(w))
    assert back.sample_rate == 16000
    assert np.max(np.abs(back.samples - w.samples)) <= 1 / 32768


def test_file_round_trip(tmp_path):
    w = Waveform(tone(500), 22050)
    write_wav(w, tmp_path / "x.wav")
    assert np.max(np.abs(read_wav(tmp_path / "x.wav").samples - w.samples)) <= 1 / 32768


def test_waveform_rejects_out_of_range():
    with pytest.raises(ValueError):
        Waveform(np.array([1.5]), 16000)
    with pytest.raises(ValueError):
        Waveform(np.array([np.nan]), 16000)
    with pytest.raises(ValueError):
        Waveform(np.zeros(2), 0)


@given(arrays(np.float64, st.integers(1, 300), elements=st.floats(-1, 1)))
def test_encode_decode_quantization(x):
    w = Waveform(x, 16000)
    assert np.max(np.abs(decode_wav(encode_wav(w)).samples - x)) <= 1 / 32768


@given(arrays(np.int16, st.integers(1, 300)))
def test_decode_encode_identity(ints):
    data = wav_bytes(ints)
    assert encode_wav(decode_wav(data)) == data
