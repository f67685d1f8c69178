import pytest

from speechforge.config import PipelineConfig, load_config
from speechforge.errors import DataError

CONFIG_TEXT = """\
[signal]
sample_rate = 16000
window_ms = 50
hop_ms = 12.5
n_mels = 80

[pipeline]
min_dur = 1.0
max_dur = 20.0
speed_factors = 0.9,1.1

[specaugment]
n_freq_masks = 3
seed = 7

[decode]
ctc_weight = 0.4
beam_size = 10
"""


def test_defaults_match_shipped_values():
    cfg = PipelineConfig()
    assert cfg.sample_rate == 16000
    assert cfg.vocab_size == 5000
    assert cfg.lm_order == 4
    assert cfg.fusion.beam_size == 20
    assert cfg.fusion.ctc_weight == 0.5
    assert cfg.fusion.lm_weight == 0.7
    p = cfg.frame_params()
    assert (p.window_len, p.hop_len, p.fft_size) == (800, 200, 1024)


def test_file_overrides(tmp_path):
    path = tmp_path / "forge.cfg"
    path.write_text(CONFIG_TEXT)
    cfg = load_config(path)
    assert cfg.min_dur == 1.0
    assert cfg.max_dur == 20.0
    assert cfg.speed_factors == (0.9, 1.1)
    assert cfg.specaugment.n_freq_masks == 3
    assert cfg.specaugment.seed == 7
    assert cfg.fusion.ctc_weight == 0.4
    assert cfg.fusion.beam_size == 10
    assert cfg.fusion.lm_weight == 0.7  # untouched default


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "forge.cfg"
    path.write_text("[signal]\nsampel_rate = 8000\n")
    with pytest.raises(DataError, match="unknown config key"):
        load_config(path)


def test_bad_value(tmp_path):
    path = tmp_path / "forge.cfg"
    path.write_text("[signal]\nsample_rate = very fast\n")
    with pytest.raises(DataError, match="bad value"):
        load_config(path)
