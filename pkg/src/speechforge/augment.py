"""Waveform and feature augmentation: speed perturbation and SpecAugment.

Speed perturbation is plain resampling (tempo and pitch both scale), the
standard 3x-expansion recipe with factors 0.9/1.1. SpecAugment masks
random frequency bands and time spans; time warping is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import Waveform, _sinc_interpolate
from .features import FeatureMatrix

SPEED_FACTORS = (0.9, 1.1)

DEFAULT_N_FREQ_MASKS = 2
DEFAULT_FREQ_WIDTH = 30
DEFAULT_N_TIME_MASKS = 2
DEFAULT_TIME_WIDTH = 40


@dataclass
class SpecAugmentConfig:
    n_freq_masks: int = DEFAULT_N_FREQ_MASKS
    max_freq_width: int = DEFAULT_FREQ_WIDTH
    n_time_masks: int = DEFAULT_N_TIME_MASKS
    max_time_width: int = DEFAULT_TIME_WIDTH
    fill_mode: str = "mean"  # mean | zero
    seed: int = 0

    def __post_init__(self):
        if min(self.n_freq_masks, self.max_freq_width, self.n_time_masks, self.max_time_width) < 0:
            raise ValueError("mask counts and widths must be >= 0")
        if self.fill_mode not in ("mean", "zero"):
            raise ValueError(f"unknown fill mode {self.fill_mode!r}")


def speed_perturb(w: Waveform, factor: float) -> Waveform:
    """Playback-speed change by resampling: length round(len/factor),
    spectral content scaled in frequency by factor, sample rate unchanged."""
    if factor <= 0.0:
        raise ValueError(f"speed factor must be positive, got {factor}")
    if factor == 1.0:
        return Waveform(w.samples.copy(), w.sample_rate)
    out_len = int(np.floor(len(w) / factor + 0.5))
    scale = min(1.0, 1.0 / factor)
    y = _sinc_interpolate(w.samples, out_len, factor, scale)
    return Waveform(y, w.sample_rate)


def mask_draws(cfg: SpecAugmentConfig, n_frames: int, n_bands: int):
    """The seeded draw sequence: freq masks first (width then start), then
    time masks. Widths are uniform on [0, max]; oversized widths clamp to
    the matrix extent."""
    rng = np.random.default_rng(cfg.seed)
    freq, time = [], []
    for _ in range(cfg.n_freq_masks):
        width = int(rng.integers(0, cfg.max_freq_width + 1))
        width = min(width, n_bands)
        start = int(rng.integers(0, n_bands - width + 1))
        freq.append((start, width))
    for _ in range(cfg.n_time_masks):
        width = int(rng.integers(0, cfg.max_time_width + 1))
        width = min(width, n_frames)
        start = int(rng.integers(0, n_frames - width + 1))
        time.append((start, width))
    return freq, time


def spec_augment(f: FeatureMatrix, cfg: SpecAugmentConfig) -> FeatureMatrix:
    """Masked copy of the features; unmasked cells are bit-identical."""
    values = f.values.copy()
    n_frames, n_bands = values.shape
    freq, time = mask_draws(cfg, n_frames, n_bands)
    fill = values.mean() if cfg.fill_mode == "mean" else 0.0
    for start, width in freq:
        values[:, start : start + width] = fill
    for start, width in time:
        values[start : start + width, :] = fill
    return FeatureMatrix(values, f.feature_kind, f.frame_rate, f.cmvn_applied)
