"""CTC numerics: forward loss, forward-backward gradient, greedy decoding.

Standard topology: blank at index 0, repeated labels require an
intervening blank. All recursions run in the log domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LOG_ZERO = -np.inf


@dataclass
class PosteriorGram:
    """T x V frame-level token log-probabilities, blank at index 0."""

    log_probs: np.ndarray
    vocab: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.log_probs = np.asarray(self.log_probs, dtype=np.float64)
        if self.log_probs.ndim != 2 or self.log_probs.shape[1] < 2:
            raise ValueError(
                f"posteriorgram must be T x V with V >= 2, got {self.log_probs.shape}"
            )
        if self.log_probs.shape[0] == 0:
            raise ValueError("empty posteriorgram")
        if not self.vocab:
            self.vocab = ["<blank>"] + [str(i) for i in range(1, self.log_probs.shape[1])]
        if len(self.vocab) != self.log_probs.shape[1]:
            raise ValueError("vocabulary size does not match the V dimension")
        rowsums = _logsumexp(self.log_probs, axis=1)
        if np.max(np.abs(rowsums)) > 1e-5:
            raise ValueError(
                f"rows must log-sum-exp to 0 (worst deviation {np.max(np.abs(rowsums)):.3g})"
            )

    @property
    def n_frames(self) -> int:
        return self.log_probs.shape[0]

    @property
    def n_tokens(self) -> int:
        return self.log_probs.shape[1]


def _logsumexp(x, axis=None):
    x = np.asarray(x, dtype=np.float64)
    top = np.max(x, axis=axis, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    out = top.squeeze(axis) if axis is not None else top.reshape(())
    with np.errstate(divide="ignore"):
        return out + np.log(np.sum(np.exp(x - top), axis=axis))


def _extended_labels(labels: list[int]) -> np.ndarray:
    ext = np.zeros(2 * len(labels) + 1, dtype=np.int64)
    ext[1::2] = labels
    return ext


def min_frames(labels: list[int]) -> int:
    """Shortest alignment: one frame per label plus blanks between repeats."""
    repeats = sum(1 for a, b in zip(labels, labels[1:]) if a == b)
    return len(labels) + repeats


def _validate_labels(labels, n_tokens):
    labels = list(labels)
    if any(not (1 <= l < n_tokens) for l in labels):
        raise ValueError("labels must be non-blank token ids inside the vocabulary")
    return labels


def ctc_alpha(log_probs: np.ndarray, labels: list[int]) -> np.ndarray:
    """Log-domain forward lattice over the blank-extended label sequence."""
    T = log_probs.shape[0]
    ext = _extended_labels(labels)
    S = ext.size
    alpha = np.full((T, S), LOG_ZERO)
    alpha[0, 0] = log_probs[0, ext[0]]
    if S > 1:
        alpha[0, 1] = log_probs[0, ext[1]]
    for t in range(1, T):
        stay = alpha[t - 1]
        prev1 = np.full(S, LOG_ZERO)
        prev1[1:] = alpha[t - 1, :-1]
        prev2 = np.full(S, LOG_ZERO)
        if S > 2:
            skip_ok = (ext[2:] != 0) & (ext[2:] != ext[:-2])
            prev2[2:] = np.where(skip_ok, alpha[t - 1, :-2], LOG_ZERO)
        alpha[t] = _logsumexp(np.stack([stay, prev1, prev2]), axis=0) + log_probs[t, ext]
    return alpha


def ctc_loss(pg: PosteriorGram, labels: list[int]) -> float:
    """-log sum over all alignments; +inf when the labels cannot fit."""
    labels = _validate_labels(labels, pg.n_tokens)
    T = pg.n_frames
    if min_frames(labels) > T:
        return float("inf")
    if not labels:
        return float(-pg.log_probs[:, 0].sum())
    alpha = ctc_alpha(pg.log_probs, labels)
    total = _logsumexp(alpha[-1, -2:])
    return float(-total)


def ctc_grad(logits: np.ndarray, labels: list[int]) -> np.ndarray:
    """d(ctc_loss)/d(logits) with softmax applied internally.

    Forward-backward posterior accumulation; rows sum to zero because the
    loss depends on logits only through the softmax.
    """
    logits = np.asarray(logits, dtype=np.float64)
    T, V = logits.shape
    labels = _validate_labels(labels, V)
    if min_frames(labels) > T:
        raise ValueError(f"{len(labels)} labels cannot align to {T} frames")
    log_probs = logits - _logsumexp(logits, axis=1)[:, None]

    ext = _extended_labels(labels)
    S = ext.size
    alpha = ctc_alpha(log_probs, labels)

    beta = np.full((T, S), LOG_ZERO)
    beta[-1, -1] = log_probs[-1, ext[-1]]
    if S > 1:
        beta[-1, -2] = log_probs[-1, ext[-2]]
    for t in range(T - 2, -1, -1):
        stay = beta[t + 1]
        next1 = np.full(S, LOG_ZERO)
        next1[:-1] = beta[t + 1, 1:]
        next2 = np.full(S, LOG_ZERO)
        if S > 2:
            skip_ok = (ext[2:] != 0) & (ext[2:] != ext[:-2])
            next2[:-2] = np.where(skip_ok, beta[t + 1, 2:], LOG_ZERO)
        beta[t] = _logsumexp(np.stack([stay, next1, next2]), axis=0) + log_probs[t, ext]

    log_total = _logsumexp(alpha[-1, -2:]) if labels else alpha[-1, -1]
    # gamma[t, s] = alpha * beta / emission, normalized by the total
    with np.errstate(invalid="ignore"):
        log_gamma = alpha + beta - log_probs[:, ext] - log_total
    occupancy = np.zeros((T, V))
    for s in range(S):
        occupancy[:, ext[s]] += np.exp(log_gamma[:, s])
    return np.exp(log_probs) - occupancy


def ctc_greedy(pg: PosteriorGram) -> list[int]:
    """Per-frame argmax, collapse repeats, drop blanks; ties go to lower ids."""
    path = np.argmax(pg.log_probs, axis=1)
    out = []
    prev = -1
    for token in path:
        if token != prev and token != 0:
            out.append(int(token))
        prev = token
    return out
