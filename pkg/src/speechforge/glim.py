"""Mel-to-linear inversion and Griffin-Lim phase retrieval.

Turns synthesizer-style log-Mel spectrograms back into waveforms: a
nonnegative least-squares expansion recovers linear-frequency magnitudes,
and Griffin-Lim alternates magnitude substitution with least-squares
resynthesis to retrieve phase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import Waveform
from .spectral import FrameParams, MelFilterbank, MelSpectrogram

DEFAULT_GL_ITERS = 60
NNLS_INNER_ITERS = 200


@dataclass
class GriffinLimConfig:
    n_iters: int = DEFAULT_GL_ITERS
    init: str = "zero_phase"  # zero_phase | random_phase
    seed: int = 0

    def __post_init__(self):
        if self.n_iters < 0:
            raise ValueError("n_iters must be >= 0")
        if self.init not in ("zero_phase", "random_phase"):
            raise ValueError(f"unknown phase init {self.init!r}")


@dataclass
class GriffinLimResult:
    waveform: Waveform
    errors: np.ndarray  # E_0 after init, then one entry per iteration


def nnls_expand(weights: np.ndarray, targets: np.ndarray, n_iters: int = NNLS_INNER_ITERS) -> np.ndarray:
    """Columnwise min ||weights @ X - targets||_2 with X >= 0.

    Projected gradient with a fixed iteration budget. The start point
    X0 = (W^T b) / (W^T W 1) reproduces constant vectors exactly, which keeps
    spectrally flat inputs exactly flat.
    """
    gram = weights.T @ weights
    # Largest eigenvalue bounds the gradient Lipschitz constant.
    lipschitz = np.linalg.norm(gram, 2)
    col_scale = weights.T @ (weights @ np.ones(weights.shape[1]))
    wt_b = weights.T @ targets
    x = wt_b / np.where(col_scale > 0.0, col_scale, 1.0)[:, None]
    x[col_scale <= 0.0] = 0.0
    step = 1.0 / lipschitz
    for _ in range(n_iters):
        x = np.maximum(0.0, x - step * (gram @ x - wt_b))
    return x


def mel_to_linear(m: MelSpectrogram, fb: MelFilterbank) -> np.ndarray:
    """Invert the Mel pooling: nonnegative T x bins magnitudes.

    Cells at the log floor are treated as exact silence and expand to zero.
    """
    if fb.n_mels != m.mel.n_mels or fb.n_bins != m.mel.n_bins:
        raise ValueError(
            f"filterbank geometry ({fb.n_mels} x {fb.n_bins}) does not match"
            f" the spectrogram's ({m.mel.n_mels} x {m.mel.n_bins})"
        )
    b = np.exp(m.values.T)  # bands x frames
    b[m.values.T <= np.log(m.log_floor) + 1e-9] = 0.0
    x = nnls_expand(fb.weights, b)
    return x.T


def _ola_synthesis(frames: np.ndarray, win: np.ndarray, hop: int, wsum: np.ndarray) -> np.ndarray:
    total = wsum.size
    acc = np.zeros(total)
    wlen = win.size
    for m in range(frames.shape[0]):
        acc[m * hop : m * hop + wlen] += frames[m]
    return acc / wsum


def griffin_lim(
    mag: np.ndarray,
    p: FrameParams,
    cfg: GriffinLimConfig | None = None,
    sample_rate: int = 16000,
    init_phase: np.ndarray | None = None,
) -> GriffinLimResult:
    """Iterate x <- istft(mag * phase(stft(x))) for cfg.n_iters rounds.

    The iterate lives in the overlap-add (padded) domain so each round is an
    exact alternating projection; the centering pad is stripped once on
    return, which makes the returned waveform exactly istft of the last
    magnitude-substituted spectrogram. Per-iteration spectral convergence
    errors are reported alongside the waveform.
    """
    cfg = cfg or GriffinLimConfig()
    mag = np.asarray(mag, dtype=np.float64)
    if mag.ndim != 2 or mag.shape[1] != p.n_bins:
        raise ValueError(f"magnitude shape {mag.shape} does not match params")
    if not np.all(np.isfinite(mag)) or np.any(mag < 0.0):
        raise ValueError("magnitudes must be finite and nonnegative")

    n_frames = mag.shape[0]
    win = p.window()
    hop = p.hop_len
    total = (n_frames - 1) * hop + p.window_len
    wsum = np.zeros(total)
    for m in range(n_frames):
        wsum[m * hop : m * hop + p.window_len] += win**2
    if p.centered:
        pad = p.window_len // 2
        lo, hi = pad, pad + (n_frames - 1) * hop
    else:
        lo, hi = 0, total
    if wsum[lo:hi].size and wsum[lo:hi].min() <= 1e-10:
        raise ValueError("window/hop combination violates the overlap-add condition")
    wsum = np.where(wsum > 0.0, wsum, 1.0)

    if init_phase is not None:
        phase = np.asarray(init_phase, dtype=np.float64)
        if phase.shape != mag.shape:
            raise ValueError("init_phase shape must match the magnitude")
    elif cfg.init == "random_phase":
        phase = np.random.default_rng(cfg.seed).uniform(-np.pi, np.pi, size=mag.shape)
    else:
        phase = np.zeros_like(mag)

    idx = hop * np.arange(n_frames)[:, None] + np.arange(p.window_len)[None, :]
    denom = np.linalg.norm(mag)
    if denom == 0.0:
        wave = Waveform(np.zeros(hi - lo), sample_rate)
        return GriffinLimResult(wave, np.zeros(cfg.n_iters + 1))

    def analysis(xpad: np.ndarray) -> np.ndarray:
        return np.fft.rfft(xpad[idx] * win[None, :], n=p.fft_size, axis=1)

    spec = mag * np.exp(1j * phase)
    frames = np.fft.irfft(spec, n=p.fft_size, axis=1)[:, : p.window_len] * win[None, :]
    x = _ola_synthesis(frames, win, hop, wsum)
    stft_x = analysis(x)
    errors = [np.linalg.norm(np.abs(stft_x) - mag) / denom]
    for _ in range(cfg.n_iters):
        spec = mag * np.exp(1j * np.angle(stft_x))
        frames = np.fft.irfft(spec, n=p.fft_size, axis=1)[:, : p.window_len] * win[None, :]
        x = _ola_synthesis(frames, win, hop, wsum)
        stft_x = analysis(x)
        errors.append(np.linalg.norm(np.abs(stft_x) - mag) / denom)

    return GriffinLimResult(Waveform(x[lo:hi], sample_rate), np.asarray(errors))


def spectral_convergence(mag: np.ndarray, w: Waveform, p: FrameParams) -> float:
    """|| |stft(w)| - mag ||_F / ||mag||_F; zero iff magnitudes match."""
    from .spectral import stft

    mag = np.asarray(mag, dtype=np.float64)
    denom = np.linalg.norm(mag)
    if denom == 0.0:
        raise ValueError("target magnitude has zero norm")
    got = stft(w, p).magnitude
    if got.shape != mag.shape:
        raise ValueError(f"stft shape {got.shape} does not match target {mag.shape}")
    return float(np.linalg.norm(got - mag) / denom)
