"""Windowed STFT/iSTFT, Mel filterbank construction, and Mel-spectrograms.

Frame geometry defaults to a 50 ms window with a 12.5 ms hop (800/200
samples at 16 kHz) and the next power-of-two FFT size. Analysis is
centered with reflect padding, so a signal of L samples yields
floor(L / hop) + 1 frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import Waveform

DEFAULT_WINDOW_MS = 50.0
DEFAULT_HOP_MS = 12.5
DEFAULT_N_MELS = 80
DEFAULT_FMIN = 0.0
DEFAULT_FMAX = 8000.0
DEFAULT_LOG_FLOOR = 1e-10

WINDOW_KINDS = ("hann", "rectangular")


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


@dataclass(frozen=True)
class FrameParams:
    """STFT frame geometry: window/hop/FFT lengths in samples."""

    window_len: int
    hop_len: int
    fft_size: int
    window_kind: str = "hann"
    centered: bool = True

    def __post_init__(self):
        if not (0 < self.hop_len <= self.window_len <= self.fft_size):
            raise ValueError(
                f"need 0 < hop ({self.hop_len}) <= window ({self.window_len})"
                f" <= fft_size ({self.fft_size})"
            )
        if self.fft_size & (self.fft_size - 1):
            raise ValueError(f"fft_size must be a power of two, got {self.fft_size}")
        if self.window_kind not in WINDOW_KINDS:
            raise ValueError(f"unknown window kind {self.window_kind!r}")

    @classmethod
    def from_ms(
        cls,
        sample_rate: int,
        window_ms: float = DEFAULT_WINDOW_MS,
        hop_ms: float = DEFAULT_HOP_MS,
        **kwargs,
    ) -> "FrameParams":
        window = int(round(sample_rate * window_ms / 1000.0))
        hop = int(round(sample_rate * hop_ms / 1000.0))
        return cls(window, hop, _next_pow2(window), **kwargs)

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1

    def window(self) -> np.ndarray:
        """Periodic analysis window."""
        if self.window_kind == "hann":
            n = np.arange(self.window_len)
            return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / self.window_len)
        return np.ones(self.window_len)

    def n_frames(self, n_samples: int) -> int:
        if self.centered:
            return n_samples // self.hop_len + 1
        return 1 + (n_samples - self.window_len) // self.hop_len


@dataclass
class ComplexSpectrogram:
    """T x (fft_size/2 + 1) complex STFT values plus their geometry."""

    values: np.ndarray
    params: FrameParams
    sample_rate: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 2 or self.values.shape[1] != self.params.n_bins:
            raise ValueError(
                f"spectrogram shape {self.values.shape} does not match"
                f" fft_size {self.params.fft_size}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spectrogram contains non-finite values")

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass
class MelFilterbank:
    """Triangular filters on the 2595*log10(1 + f/700) scale, peak 1."""

    n_mels: int
    weights: np.ndarray  # (n_mels, n_bins), nonnegative
    fmin: float
    fmax: float
    sample_rate: int
    fft_size: int
    scale_kind: str = "htk"

    @property
    def n_bins(self) -> int:
        return self.weights.shape[1]

    def bin_support(self) -> np.ndarray:
        """Boolean mask of FFT bins covered by at least one filter."""
        return self.weights.sum(axis=0) > 0.0


@dataclass
class MelSpectrogram:
    """T x n_mels log-magnitude Mel values; keeps its filterbank and floor."""

    values: np.ndarray
    params: FrameParams
    mel: MelFilterbank
    log_floor: float = DEFAULT_LOG_FLOOR

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != self.mel.n_mels:
            raise ValueError(
                f"mel values shape {self.values.shape} does not match"
                f" n_mels {self.mel.n_mels}"
            )

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def _frame_signal(x: np.ndarray, p: FrameParams) -> np.ndarray:
    """Slice (and for centered analysis, reflect-pad) into T x window_len."""
    if x.size == 0:
        raise ValueError("cannot frame an empty waveform")
    if p.centered:
        pad = p.window_len // 2
        if x.size <= pad:
            raise ValueError(
                f"waveform of {x.size} samples is too short to reflect-pad"
                f" by {pad}"
            )
        padded = np.pad(x, pad, mode="reflect")
    else:
        if x.size < p.window_len:
            raise ValueError("waveform shorter than one analysis window")
        padded = x
    n_frames = p.n_frames(x.size)
    idx = p.hop_len * np.arange(n_frames)[:, None] + np.arange(p.window_len)[None, :]
    return padded[idx]


def stft(w: Waveform, p: FrameParams) -> ComplexSpectrogram:
    """Windowed short-time Fourier transform (one-sided spectrum)."""
    frames = _frame_signal(w.samples, p) * p.window()[None, :]
    values = np.fft.rfft(frames, n=p.fft_size, axis=1)
    return ComplexSpectrogram(values, p, w.sample_rate)


def _ola_window_sq(p: FrameParams, n_frames: int) -> np.ndarray:
    win_sq = p.window() ** 2
    total = (n_frames - 1) * p.hop_len + p.window_len
    acc = np.zeros(total)
    for m in range(n_frames):
        acc[m * p.hop_len : m * p.hop_len + p.window_len] += win_sq
    return acc


def istft(s: ComplexSpectrogram) -> Waveform:
    """Least-squares inverse STFT (overlap-add with window-square weights).

    Output length is (T - 1) * hop for centered analysis; istft(stft(x))
    therefore reconstructs x exactly when hop divides len(x).
    """
    p = s.params
    n_frames = s.n_frames
    frames = np.fft.irfft(s.values, n=p.fft_size, axis=1)[:, : p.window_len]
    frames = frames * p.window()[None, :]
    total = (n_frames - 1) * p.hop_len + p.window_len
    acc = np.zeros(total)
    for m in range(n_frames):
        acc[m * p.hop_len : m * p.hop_len + p.window_len] += frames[m]
    weights = _ola_window_sq(p, n_frames)

    if p.centered:
        pad = p.window_len // 2
        out_len = (n_frames - 1) * p.hop_len
        lo, hi = pad, pad + out_len
    else:
        lo, hi = 0, total
    # the overlap-add condition is checked on the fully-overlapped interior;
    # uncovered edge samples (possible without centering) come out as zeros
    eps = 1e-10
    margin = p.window_len - p.hop_len
    core = weights[margin : total - margin] if total > 2 * margin else weights
    if core.size and core.min() <= eps:
        raise ValueError(
            "window/hop combination violates the overlap-add condition"
        )
    kept = weights[lo:hi]
    out = acc[lo:hi] / np.where(kept > eps, kept, 1.0)
    return Waveform(out, s.sample_rate)


def mel_filterbank(
    n_mels: int,
    p: FrameParams,
    sample_rate: int,
    fmin: float = DEFAULT_FMIN,
    fmax: float | None = None,
) -> MelFilterbank:
    """Build n_mels triangular filters with mel-equispaced centers."""
    if fmax is None:
        fmax = sample_rate / 2.0
    if n_mels < 1:
        raise ValueError("n_mels must be >= 1")
    if not (0.0 <= fmin < fmax <= sample_rate / 2.0):
        raise ValueError(f"need 0 <= fmin < fmax <= Nyquist, got [{fmin}, {fmax}]")
    freqs = np.arange(p.n_bins) * sample_rate / p.fft_size
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        rising = (freqs[None, :] - lower) / (center - lower)
        falling = (upper - freqs[None, :]) / (upper - center)
    weights = np.maximum(0.0, np.minimum(rising, falling))
    weights = np.nan_to_num(weights, nan=0.0, posinf=0.0, neginf=0.0)
    if np.any(weights.sum(axis=1) == 0.0):
        raise ValueError(
            f"{n_mels} mel bands exceed the usable bins of a"
            f" {p.fft_size}-point FFT on [{fmin}, {fmax}] Hz"
        )
    return MelFilterbank(n_mels, weights, float(fmin), float(fmax), sample_rate, p.fft_size)


def mel_spectrogram(
    w: Waveform,
    p: FrameParams,
    fb: MelFilterbank,
    log_floor: float = DEFAULT_LOG_FLOOR,
) -> MelSpectrogram:
    """log(max(fb . |stft|, log_floor)), shape T x n_mels."""
    if fb.sample_rate != w.sample_rate:
        raise ValueError(
            f"filterbank built for {fb.sample_rate} Hz, waveform is"
            f" {w.sample_rate} Hz"
        )
    if fb.fft_size != p.fft_size:
        raise ValueError(
            f"filterbank built for fft_size {fb.fft_size}, params say {p.fft_size}"
        )
    mag = stft(w, p).magnitude
    values = np.log(np.maximum(mag @ fb.weights.T, log_floor))
    return MelSpectrogram(values, p, fb, log_floor)
