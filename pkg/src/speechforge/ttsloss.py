"""Synthesizer training-objective numerics.

The three standalone terms: l1 spectrogram distance, closed-form KL between
diagonal Gaussians, and a seeded Monte Carlo estimate of the KL from a
diagonal Gaussian to a mixture prior (no closed form exists). Log-variance
parameterization throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

DEFAULT_LATENT_DIM = 16
DEFAULT_N_COMPONENTS = 10


@dataclass
class DiagGaussian:
    mean: np.ndarray
    log_var: np.ndarray

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        self.log_var = np.atleast_1d(np.asarray(self.log_var, dtype=np.float64))
        if self.mean.shape != self.log_var.shape or self.mean.ndim != 1 or self.mean.size < 1:
            raise ValueError("mean and log_var must be equal-length 1-D vectors")
        if not (np.all(np.isfinite(self.mean)) and np.all(np.isfinite(self.log_var))):
            raise ValueError("distribution parameters must be finite")

    @property
    def dim(self) -> int:
        return self.mean.size

    def log_prob(self, z: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(z)
        return -0.5 * np.sum(
            np.log(2.0 * np.pi) + self.log_var + (z - self.mean) ** 2 / np.exp(self.log_var),
            axis=1,
        )


@dataclass
class MixturePrior:
    weights: np.ndarray
    components: list[DiagGaussian]

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if len(self.components) == 0:
            raise ValueError("mixture needs at least one component")
        if self.weights.shape != (len(self.components),):
            raise ValueError("one weight per component required")
        if np.any(self.weights < 0.0) or abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
        dims = {c.dim for c in self.components}
        if len(dims) != 1:
            raise ValueError("mixture components must share a dimension")

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def log_prob(self, z: np.ndarray) -> np.ndarray:
        per_comp = np.stack(
            [np.log(wk) + c.log_prob(z) if wk > 0 else np.full(np.atleast_2d(z).shape[0], -np.inf)
             for wk, c in zip(self.weights, self.components)]
        )
        top = per_comp.max(axis=0)
        return top + np.log(np.exp(per_comp - top).sum(axis=0))

    @classmethod
    def default(cls, dim: int = DEFAULT_LATENT_DIM, k: int = DEFAULT_N_COMPONENTS) -> "MixturePrior":
        comps = [DiagGaussian(np.zeros(dim), np.zeros(dim)) for _ in range(k)]
        return cls(np.full(k, 1.0 / k), comps)


def l1_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Mean absolute elementwise difference between equal-shape matrices."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a - b)))


def gauss_kl(q: DiagGaussian, p: DiagGaussian) -> float:
    """Closed-form KL(q || p) for diagonal Gaussians."""
    if q.dim != p.dim:
        raise ValueError(f"dimension mismatch: {q.dim} vs {p.dim}")
    lvq, lvp = q.log_var, p.log_var
    terms = np.exp(lvq - lvp) + (q.mean - p.mean) ** 2 / np.exp(lvp) - 1.0 + lvp - lvq
    return float(0.5 * terms.sum())


def mixture_kl_mc(
    q: DiagGaussian,
    p: MixturePrior,
    n_samples: int = 10_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo KL(q || mixture): (estimate, standard error).

    Samples z ~ q with the seeded generator and averages
    log q(z) - log p(z); log p uses a stable log-sum-exp over components.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if q.dim != p.dim:
        raise ValueError(f"dimension mismatch: {q.dim} vs {p.dim}")
    rng = np.random.default_rng(seed)
    z = q.mean + np.exp(0.5 * q.log_var) * rng.standard_normal((n_samples, q.dim))
    deltas = q.log_prob(z) - p.log_prob(z)
    estimate = float(deltas.mean())
    std_error = float(deltas.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return estimate, std_error


def load_gaussian(path: str | Path) -> DiagGaussian:
    """JSON with "mean" and "log_var" arrays."""
    try:
        doc = json.loads(Path(path).read_text())
        return DiagGaussian(doc["mean"], doc["log_var"])
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"{path}: bad Gaussian spec: {exc}") from exc


def load_prior(path: str | Path) -> MixturePrior:
    """JSON with "weights" and "components" (each a Gaussian spec)."""
    try:
        doc = json.loads(Path(path).read_text())
        comps = [DiagGaussian(c["mean"], c["log_var"]) for c in doc["components"]]
        return MixturePrior(doc["weights"], comps)
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"{path}: bad mixture prior spec: {exc}") from exc
