"""ASR acoustic features: log-Mel + 3-dim pitch (fbank-pitch) and CMVN.

The pitch block is the conventional triple (voicing score, f0, delta-f0)
from normalized cross-correlation, median-filtered over 5 frames. The
log-Mel block shares the mel_spectrogram code path bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import Waveform
from .spectral import (
    DEFAULT_LOG_FLOOR,
    FrameParams,
    MelFilterbank,
    _frame_signal,
    mel_spectrogram,
)

FBANK_PITCH = "fbank_pitch"
FEATURE_KINDS = (FBANK_PITCH, "mel", "generic")

VARIANCE_FLOOR = 1e-8
_MEDIAN_WIDTH = 5


@dataclass
class PitchConfig:
    min_f0: float = 60.0
    max_f0: float = 400.0
    nccf_threshold: float = 0.3

    def __post_init__(self):
        if not (0.0 < self.min_f0 < self.max_f0):
            raise ValueError(f"need 0 < min_f0 < max_f0, got [{self.min_f0}, {self.max_f0}]")
        if not (0.0 <= self.nccf_threshold <= 1.0):
            raise ValueError("nccf_threshold must lie in [0, 1]")


@dataclass
class FeatureMatrix:
    values: np.ndarray
    feature_kind: str = "generic"
    frame_rate: float = 0.0
    cmvn_applied: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("features contain non-finite values")
        if self.feature_kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {self.feature_kind!r}")

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def _nccf_tracks(w: Waveform, p: FrameParams, pc: PitchConfig):
    """Per-frame best normalized cross-correlation peak and refined lag."""
    if pc.max_f0 > w.sample_rate / 2:
        raise ValueError("max_f0 above Nyquist")
    frames = _frame_signal(w.samples, p)
    n_frames, wlen = frames.shape
    lag_min = max(1, int(np.floor(w.sample_rate / pc.max_f0)))
    lag_max = min(wlen - 1, int(np.ceil(w.sample_rate / pc.min_f0)))
    if lag_max <= lag_min:
        raise ValueError("window too short for the configured f0 search range")
    lags = np.arange(lag_min, lag_max + 1)
    scores = np.empty((n_frames, lags.size))
    eps = 1e-20
    for j, lag in enumerate(lags):
        head = frames[:, : wlen - lag]
        tail = frames[:, lag:]
        num = np.einsum("ij,ij->i", head, tail)
        den = np.sqrt(np.einsum("ij,ij->i", head, head) * np.einsum("ij,ij->i", tail, tail))
        scores[:, j] = num / (den + eps)
    best_val = scores.max(axis=1)
    voicing = np.clip(best_val, 0.0, 1.0)
    # a periodic frame peaks equally at every multiple of its period; take
    # the smallest lag within 1% of the peak to avoid octave errors
    near_peak = scores >= np.maximum(0.99 * best_val[:, None], eps)
    has_peak = near_peak.any(axis=1)
    best = np.where(has_peak, np.argmax(near_peak, axis=1), np.argmax(scores, axis=1))

    # parabolic refinement of the peak lag
    lag_refined = lags[best].astype(np.float64)
    inner = (best > 0) & (best < lags.size - 1)
    if np.any(inner):
        i = np.where(inner)[0]
        left = scores[i, best[i] - 1]
        mid = scores[i, best[i]]
        right = scores[i, best[i] + 1]
        denom = left - 2.0 * mid + right
        shift = np.where(np.abs(denom) > eps, 0.5 * (left - right) / denom, 0.0)
        lag_refined[i] += np.clip(shift, -0.5, 0.5)
    return voicing, lag_refined


def _median_filter(x: np.ndarray, width: int) -> np.ndarray:
    if x.size == 0:
        return x
    half = width // 2
    padded = np.pad(x, half, mode="edge")
    return np.array([np.median(padded[i : i + width]) for i in range(x.size)])


def fbank_pitch(
    w: Waveform,
    p: FrameParams,
    fb: MelFilterbank,
    pc: PitchConfig | None = None,
    log_floor: float = DEFAULT_LOG_FLOOR,
) -> FeatureMatrix:
    """(n_mels + 3)-dim features: log-Mel, voicing, f0 (Hz, 0 unvoiced), delta-f0."""
    pc = pc or PitchConfig()
    if len(w) < p.window_len:
        raise ValueError(
            f"waveform of {len(w)} samples is shorter than one window ({p.window_len})"
        )
    mel = mel_spectrogram(w, p, fb, log_floor)
    voicing, lag = _nccf_tracks(w, p, pc)
    voiced = voicing >= pc.nccf_threshold
    f0 = np.where(voiced, w.sample_rate / lag, 0.0)
    f0 = _median_filter(f0, _MEDIAN_WIDTH)
    delta = np.gradient(f0) if f0.size > 1 else np.zeros_like(f0)
    values = np.column_stack([mel.values, voicing, f0, delta])
    return FeatureMatrix(values, FBANK_PITCH, w.sample_rate / p.hop_len)


def cmvn(
    f: FeatureMatrix,
    scope: str = "per_utterance",
    stats: tuple[np.ndarray, np.ndarray] | None = None,
) -> FeatureMatrix:
    """Mean/variance normalization per column; refuses to run twice."""
    if f.cmvn_applied:
        raise ValueError("features are already mean/variance normalized")
    if scope == "per_utterance":
        mean = f.values.mean(axis=0)
        var = f.values.var(axis=0)
    elif scope == "precomputed":
        if stats is None:
            raise ValueError("precomputed scope requires (mean, var) stats")
        mean, var = (np.asarray(s, dtype=np.float64) for s in stats)
        if mean.shape != (f.dim,) or var.shape != (f.dim,):
            raise ValueError(
                f"stats dimension {mean.shape[0]} does not match feature dim {f.dim}"
            )
    else:
        raise ValueError(f"unknown cmvn scope {scope!r}")
    scale = 1.0 / np.sqrt(np.maximum(var, VARIANCE_FLOOR))
    return FeatureMatrix(
        (f.values - mean) * scale, f.feature_kind, f.frame_rate, cmvn_applied=True
    )
