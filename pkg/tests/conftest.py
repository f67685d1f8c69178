import numpy as np
import pytest

from speechforge.audio import Waveform
from speechforge.spectral import FrameParams, mel_filterbank

SR = 16000


@pytest.fixture(scope="session")
def params():
    # 50 ms window / 12.5 ms hop at 16 kHz -> 800/200 samples, 1024 fft
    return FrameParams.from_ms(SR)


@pytest.fixture(scope="session")
def fbank(params):
    return mel_filterbank(80, params, SR)


def make_tone(freq, duration=1.0, sr=SR, amp=0.5, phase=0.0):
    t = np.arange(int(sr * duration)) / sr
    return Waveform(amp * np.sin(2 * np.pi * freq * t + phase), sr)


def make_noise(duration=1.0, sr=SR, seed=0, amp=0.3):
    rng = np.random.default_rng(seed)
    return Waveform(amp * rng.uniform(-1.0, 1.0, int(sr * duration)), sr)


@pytest.fixture
def tone440():
    return make_tone(440.0)
