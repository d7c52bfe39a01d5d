import numpy as np
import pytest
from hypothesis import settings

from silence_audit.audio import Waveform

settings.register_profile("default", deadline=None)
settings.load_profile("default")

RATE = 16000


def tone(n, rate=RATE, freq=440.0, amp=0.5):
    return amp * np.sin(2 * np.pi * freq * np.arange(n) / rate)


def padded_tone(lead, speech, trail, rate=RATE):
    return Waveform(np.concatenate((np.zeros(lead), tone(speech, rate), np.zeros(trail))), rate)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# criterion -> (status, detail); filled by test_acceptance, printed after the run
ACCEPTANCE: dict = {}


def record_acceptance(criterion, ok, detail, status=None):
    status = status or ("PASS" if ok else "FAIL")
    ACCEPTANCE[criterion] = (status, detail)
    print(f"{criterion} {status}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE, key=lambda c: int(c[1:])):
        status, detail = ACCEPTANCE[criterion]
        terminalreporter.write_line(f"{criterion} {status}: {detail}")
