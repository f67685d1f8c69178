"""LPC vocoder data preparation: Mel-to-LPC, mu-law, excitation, chunking.

Deterministic signal-path math for an LPCNet-style vocoder that consumes
Mel-spectrograms: per-frame prediction coefficients recovered from the
Mel envelope, spectral flatness as the pitch-correlation proxy, mu-law
companded excitation, and fixed-length training chunks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import Waveform
from .glim import nnls_expand
from .spectral import MelFilterbank, MelSpectrogram

DEFAULT_LPC_ORDER = 16
DEFAULT_LAG_WINDOW_HZ = 60.0
DEFAULT_NOISE_FLOOR = 1e-6
CHUNK_SAMPLES = 1600  # 100 ms at 16 kHz
MU = 255

_FLATNESS_EPS = 1e-12


@dataclass
class LpcFrame:
    coeffs: np.ndarray  # a_1..a_P predicting s[n] ~ sum a_k s[n-k]
    pred_error: float
    flatness: float

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("LPC coefficients must be finite")
        if self.pred_error < 0.0:
            raise ValueError("prediction error must be >= 0")
        if not (0.0 <= self.flatness <= 1.0):
            raise ValueError("flatness must lie in [0, 1]")


@dataclass
class VocoderSequence:
    samples: np.ndarray  # CHUNK_SAMPLES float samples
    excitation: np.ndarray  # CHUNK_SAMPLES mu-law codes (uint8)
    lpc: list[LpcFrame]


def levinson_durbin(autocorr: np.ndarray, order: int) -> tuple[np.ndarray, float]:
    """Solve the order-P Toeplitz normal equations by Levinson recursion.

    Returns (coeffs a_1..a_P, residual energy r0 * prod(1 - k_i^2)).
    """
    r = np.asarray(autocorr, dtype=np.float64)
    if order < 1:
        raise ValueError("order must be >= 1")
    if r.size < order + 1:
        raise ValueError(f"need {order + 1} autocorrelation lags, got {r.size}")
    if r[0] <= 0.0:
        raise ValueError(f"autocorrelation at lag 0 must be positive, got {r[0]}")
    a = np.zeros(order)
    err = float(r[0])
    for i in range(1, order + 1):
        acc = r[i] - (np.dot(a[: i - 1], r[1:i][::-1]) if i > 1 else 0.0)
        k = acc / err
        if abs(k) >= 1.0:
            raise ValueError(
                f"autocorrelation sequence is numerically singular at order {i}"
                f" (|reflection coefficient| = {abs(k):.6g} >= 1)"
            )
        prev = a.copy()
        a[i - 1] = k
        a[: i - 1] = prev[: i - 1] - k * prev[: i - 1][::-1]
        err *= 1.0 - k * k
    return a, err


def spectral_flatness(power: np.ndarray) -> float:
    """Geometric over arithmetic mean of (power + eps); 1 for flat spectra."""
    p = np.asarray(power, dtype=np.float64)
    if p.size == 0 or np.any(p < 0.0):
        raise ValueError("power spectrum must be nonnegative and non-empty")
    if not np.any(p > 0.0):
        raise ValueError("power spectrum is identically zero")
    shifted = p + _FLATNESS_EPS
    ratio = np.exp(np.mean(np.log(shifted))) / np.mean(shifted)
    return float(np.clip(ratio, 0.0, 1.0))  # AM-GM holds; clamp float noise


def mel_to_lpc(
    mel_frame: np.ndarray,
    fb: MelFilterbank,
    order: int = DEFAULT_LPC_ORDER,
    lag_window_hz: float = DEFAULT_LAG_WINDOW_HZ,
    noise_floor: float = DEFAULT_NOISE_FLOOR,
    log_floor: float = 1e-10,
) -> LpcFrame:
    """Expand one log-Mel frame to a power spectrum and fit LPC to it.

    NNLS recovers linear-frequency magnitudes, the squared spectrum is
    inverse-transformed to autocorrelation, a Gaussian lag window plus a
    relative noise floor condition the sequence, and Levinson-Durbin solves
    for the coefficients. Flatness is computed over the filterbank-supported
    bins (bins outside carry no information from the Mel vector).
    """
    mel_frame = np.asarray(mel_frame, dtype=np.float64)
    if mel_frame.shape != (fb.n_mels,):
        raise ValueError(
            f"mel frame has {mel_frame.shape} values, filterbank expects {fb.n_mels}"
        )
    b = np.exp(mel_frame)
    b[mel_frame <= np.log(log_floor) + 1e-9] = 0.0
    magnitude = nnls_expand(fb.weights, b[:, None])[:, 0]
    power = magnitude**2
    flat = spectral_flatness(power[fb.bin_support()])
    # one-sided power -> full-spectrum inverse FFT = autocorrelation
    r = np.fft.irfft(power)[: order + 1]
    lags = np.arange(order + 1)
    r = r * np.exp(-0.5 * (2.0 * np.pi * lag_window_hz * lags / fb.sample_rate) ** 2)
    r[0] *= 1.0 + noise_floor
    coeffs, err = levinson_durbin(r, order)
    return LpcFrame(coeffs, err, flat)


def mu_law_encode(sample) -> np.ndarray | int:
    """Companding to 8-bit codes; code 128 is exact zero, 0/255 are +-1."""
    x = np.clip(np.asarray(sample, dtype=np.float64), -1.0, 1.0)
    compressed = np.log1p(MU * np.abs(x)) / np.log1p(MU)
    codes = np.where(
        x >= 0.0,
        128 + np.rint(127 * compressed),
        128 - np.rint(128 * compressed),
    ).astype(np.uint8)
    return codes if codes.ndim else int(codes)


def mu_law_decode(code) -> np.ndarray | float:
    """Inverse companding; decode(encode(x)) errs at most one quantizer step."""
    c = np.asarray(code, dtype=np.int64)
    if np.any(c < 0) or np.any(c > 255):
        raise ValueError("mu-law codes must lie in [0, 255]")
    m = c - 128
    mag = np.where(m >= 0, m / 127.0, -m / 128.0)
    x = np.sign(m) * (np.expm1(mag * np.log1p(MU)) / MU)
    return x if x.ndim else float(x)


def _frame_coeff_matrix(lpc_per_frame: list[LpcFrame] | list[np.ndarray]) -> np.ndarray:
    rows = [f.coeffs if isinstance(f, LpcFrame) else np.asarray(f, dtype=np.float64) for f in lpc_per_frame]
    return np.vstack(rows)


def _predict(a: np.ndarray, history: np.ndarray, n: int, order: int) -> float:
    acc = 0.0
    for k in range(1, min(order, n) + 1):
        acc += a[k - 1] * history[n - k]
    # quantizing the prediction to the PCM16 grid makes the +- between
    # analysis and synthesis exact for grid-aligned signals (the audio path)
    return float(np.rint(acc * 32768.0)) / 32768.0


def lpc_analysis(signal: np.ndarray, lpc_per_frame, frame_len: int) -> np.ndarray:
    """Prediction residual e[n] = s[n] - sum_k a_k s[n-k], zero history.

    Coefficients switch every frame_len samples. The prediction is
    quantized to the sample grid, so lpc_synthesis inverts this bit for bit
    on PCM-grid signals.
    """
    s = np.asarray(signal, dtype=np.float64)
    coeffs = _frame_coeff_matrix(lpc_per_frame)
    if coeffs.shape[0] * frame_len < s.size:
        raise ValueError(
            f"{coeffs.shape[0]} coefficient frames cover only"
            f" {coeffs.shape[0] * frame_len} of {s.size} samples"
        )
    order = coeffs.shape[1]
    e = np.empty_like(s)
    for n in range(s.size):
        e[n] = s[n] - _predict(coeffs[n // frame_len], s, n, order)
    return e


def lpc_synthesis(excitation: np.ndarray, lpc_per_frame, frame_len: int) -> np.ndarray:
    """All-pole resynthesis s[n] = e[n] + sum_k a_k s[n-k], zero history."""
    e = np.asarray(excitation, dtype=np.float64)
    coeffs = _frame_coeff_matrix(lpc_per_frame)
    if coeffs.shape[0] * frame_len < e.size:
        raise ValueError(
            f"{coeffs.shape[0]} coefficient frames cover only"
            f" {coeffs.shape[0] * frame_len} of {e.size} samples"
        )
    order = coeffs.shape[1]
    s = np.empty_like(e)
    for n in range(e.size):
        s[n] = e[n] + _predict(coeffs[n // frame_len], s, n, order)
    return s


def chunk_training_sequences(
    w: Waveform,
    features: MelSpectrogram,
    chunk: int = CHUNK_SAMPLES,
    order: int = DEFAULT_LPC_ORDER,
    **mel_to_lpc_kwargs,
) -> list[VocoderSequence]:
    """Cut non-overlapping chunk-sample training sequences.

    Each chunk carries its samples, the mu-law excitation computed with the
    per-frame LPC, and the LpcFrames covering it. The trailing remainder is
    dropped; a waveform shorter than one chunk yields an empty list.
    """
    hop = features.params.hop_len
    if chunk % hop != 0:
        raise ValueError(f"feature hop {hop} does not divide chunk length {chunk}")
    frames_per_chunk = chunk // hop
    n_chunks = len(w) // chunk
    if n_chunks == 0:
        return []
    needed_frames = n_chunks * frames_per_chunk
    if features.n_frames < needed_frames:
        raise ValueError(
            f"{features.n_frames} feature frames cannot cover {n_chunks} chunks"
        )
    lpc_frames = [
        mel_to_lpc(features.values[t], features.mel, order, **mel_to_lpc_kwargs)
        for t in range(needed_frames)
    ]
    excitation = lpc_analysis(w.samples[: n_chunks * chunk], lpc_frames, hop)
    codes = mu_law_encode(excitation)
    out = []
    for i in range(n_chunks):
        sl = slice(i * chunk, (i + 1) * chunk)
        out.append(
            VocoderSequence(
                samples=w.samples[sl].copy(),
                excitation=codes[sl].copy(),
                lpc=lpc_frames[i * frames_per_chunk : (i + 1) * frames_per_chunk],
            )
        )
    return out
