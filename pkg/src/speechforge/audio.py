"""Waveform I/O and band-limited resampling.

Audio is mono PCM16 RIFF on disk and float64 in [-1, 1] in memory; the
toolkit default sample rate is 16 kHz.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

DEFAULT_SAMPLE_RATE = 16000

# Windowed-sinc kernel: taps per side at unit bandwidth; widened by the
# bandwidth reduction factor when downsampling.
_SINC_TAPS = 32


@dataclass
class Waveform:
    """Mono audio: samples in [-1, 1] plus the sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"waveform must be 1-D, got shape {self.samples.shape}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("waveform contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        self.sample_rate = int(self.sample_rate)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def read_wav(path: str | Path) -> Waveform:
    """Read a mono PCM16 RIFF file; samples are normalized by 1/32768."""
    try:
        with wave.open(str(path), "rb") as f:
            n_channels = f.getnchannels()
            sampwidth = f.getsampwidth()
            rate = f.getframerate()
            n_frames = f.getnframes()
            if n_channels != 1:
                raise DataError(f"{path}: unsupported channel count {n_channels}")
            if sampwidth != 2:
                raise DataError(f"{path}: unsupported sample width {8 * sampwidth} bit")
            raw = f.readframes(n_frames)
    except wave.Error as exc:
        raise DataError(f"{path}: malformed WAV file: {exc}") from exc
    pcm = np.frombuffer(raw, dtype="<i2")
    return Waveform(pcm.astype(np.float64) / 32768.0, rate)


def write_wav(path: str | Path, w: Waveform) -> None:
    """Write mono PCM16; read_wav(write_wav(w)) changes no sample beyond 1 LSB."""
    pcm = np.clip(np.rint(w.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(w.sample_rate)
        f.writeframes(pcm.tobytes())


def _sinc_interpolate(x: np.ndarray, out_len: int, step: float, scale: float) -> np.ndarray:
    """Evaluate x at positions n*step with a windowed-sinc kernel.

    scale is the bandwidth factor (1 when interpolating, out/in when
    decimating): the kernel cutoff is scale * Nyquist and its support is
    widened by 1/scale.
    """
    half = int(np.ceil(_SINC_TAPS / scale))
    positions = np.arange(out_len) * step
    base = np.floor(positions).astype(np.int64)
    frac = positions - base
    offsets = np.arange(-half, half + 1)
    # (out_len, taps) kernel argument: distance from each tap to the target time
    t = offsets[None, :] - frac[:, None]
    u = t * scale / _SINC_TAPS  # normalized window argument in [-1, 1]
    window = np.where(
        np.abs(u) <= 1.0,
        0.42 + 0.5 * np.cos(np.pi * u) + 0.08 * np.cos(2 * np.pi * u),
        0.0,
    )
    kernel = scale * np.sinc(scale * t) * window
    idx = base[:, None] + offsets[None, :]
    valid = (idx >= 0) & (idx < x.size)
    gathered = np.where(valid, x[np.clip(idx, 0, x.size - 1)], 0.0)
    return np.einsum("ij,ij->i", gathered, kernel)


def resample(w: Waveform, out_rate: int) -> Waveform:
    """Band-limited windowed-sinc resampling to out_rate.

    Output length is round(len * out_rate / in_rate); tone frequencies below
    the lower of the two Nyquists are preserved.
    """
    if out_rate <= 0:
        raise ValueError(f"out_rate must be positive, got {out_rate}")
    if out_rate == w.sample_rate:
        return Waveform(w.samples.copy(), w.sample_rate)
    ratio = out_rate / w.sample_rate
    out_len = int(np.floor(w.samples.size * ratio + 0.5))
    step = w.sample_rate / out_rate
    scale = min(1.0, ratio)
    y = _sinc_interpolate(w.samples, out_len, step, scale)
    return Waveform(y, out_rate)
