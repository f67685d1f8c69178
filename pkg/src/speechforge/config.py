"""Declarative toolkit configuration: key=value sections per module."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .augment import SpecAugmentConfig
from .beam import FusionWeights
from .errors import DataError
from .features import PitchConfig
from .glim import GriffinLimConfig
from .spectral import (
    DEFAULT_FMAX,
    DEFAULT_FMIN,
    DEFAULT_N_MELS,
    FrameParams,
)


@dataclass
class PipelineConfig:
    sample_rate: int = 16000
    window_ms: float = 50.0
    hop_ms: float = 12.5
    n_mels: int = DEFAULT_N_MELS
    fmin: float = DEFAULT_FMIN
    fmax: float = DEFAULT_FMAX
    min_dur: float = 0.5
    max_dur: float = 30.0
    speed_factors: tuple[float, ...] = (0.9, 1.1)
    vocab_size: int = 5000
    lm_order: int = 4
    seed: int = 0
    pitch: PitchConfig = field(default_factory=PitchConfig)
    specaugment: SpecAugmentConfig = field(default_factory=SpecAugmentConfig)
    griffin_lim: GriffinLimConfig = field(default_factory=GriffinLimConfig)
    fusion: FusionWeights = field(default_factory=FusionWeights)

    def frame_params(self) -> FrameParams:
        return FrameParams.from_ms(self.sample_rate, self.window_ms, self.hop_ms)


def load_config(path: str | Path) -> PipelineConfig:
    """INI-style file; unknown keys are rejected to catch typos early."""
    parser = configparser.ConfigParser()
    try:
        with open(path) as f:
            parser.read_file(f)
    except (configparser.Error, OSError) as exc:
        raise DataError(f"{path}: cannot parse config: {exc}") from exc

    cfg = PipelineConfig()
    readers = {
        ("signal", "sample_rate"): ("sample_rate", int),
        ("signal", "window_ms"): ("window_ms", float),
        ("signal", "hop_ms"): ("hop_ms", float),
        ("signal", "n_mels"): ("n_mels", int),
        ("signal", "fmin"): ("fmin", float),
        ("signal", "fmax"): ("fmax", float),
        ("pipeline", "min_dur"): ("min_dur", float),
        ("pipeline", "max_dur"): ("max_dur", float),
        ("pipeline", "seed"): ("seed", int),
        ("text", "vocab_size"): ("vocab_size", int),
        ("text", "lm_order"): ("lm_order", int),
    }
    sub_readers = {
        ("pitch", "min_f0"): float,
        ("pitch", "max_f0"): float,
        ("pitch", "nccf_threshold"): float,
        ("specaugment", "n_freq_masks"): int,
        ("specaugment", "max_freq_width"): int,
        ("specaugment", "n_time_masks"): int,
        ("specaugment", "max_time_width"): int,
        ("specaugment", "fill_mode"): str,
        ("specaugment", "seed"): int,
        ("glim", "n_iters"): int,
        ("glim", "init"): str,
        ("glim", "seed"): int,
        ("decode", "ctc_weight"): float,
        ("decode", "lm_weight"): float,
        ("decode", "beam_size"): int,
    }
    fusion_kwargs = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            try:
                if (section, key) in readers:
                    attr, conv = readers[(section, key)]
                    setattr(cfg, attr, conv(value))
                elif (section, key) in sub_readers:
                    conv = sub_readers[(section, key)]
                    if section == "pitch":
                        setattr(cfg.pitch, key, conv(value))
                    elif section == "specaugment":
                        setattr(cfg.specaugment, key, conv(value))
                    elif section == "glim":
                        setattr(cfg.griffin_lim, key, conv(value))
                    else:
                        fusion_kwargs[key] = conv(value)
                elif section == "pipeline" and key == "speed_factors":
                    cfg.speed_factors = tuple(float(v) for v in value.split(","))
                else:
                    raise DataError(f"{path}: unknown config key [{section}] {key}")
            except ValueError as exc:
                raise DataError(f"{path}: bad value for [{section}] {key}: {exc}") from exc
    if fusion_kwargs:
        cfg.fusion = FusionWeights(
            ctc_weight=fusion_kwargs.get("ctc_weight", cfg.fusion.ctc_weight),
            lm_weight=fusion_kwargs.get("lm_weight", cfg.fusion.lm_weight),
            beam_size=fusion_kwargs.get("beam_size", cfg.fusion.beam_size),
        )
    return cfg
