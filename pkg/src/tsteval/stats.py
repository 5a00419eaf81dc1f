"""Agreement and correlation statistics for comparing metrics with human ratings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, Sequence, Union

import numpy as np
from scipy import stats as sps

from .corpus import ORDINAL, RatingsTable

NATURAL = "natural"
UNNATURAL = "unnatural"


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    proportions: Dict[Hashable, float]
    mean_agreement: float
    chance_agreement: float
    degenerate: bool = False  # only one category was ever used


def fleiss_kappa(ratings: Union[RatingsTable, Sequence[Sequence[Hashable]]]) -> KappaResult:
    """Fleiss' kappa over an items x raters matrix of category labels."""
    values = ratings.values if isinstance(ratings, RatingsTable) else np.asarray(ratings, dtype=object)
    if values.ndim != 2:
        raise ValueError("ratings must be an items x raters matrix")
    n_items, n_raters = values.shape
    if n_items < 2 or n_raters < 2:
        raise ValueError("Fleiss' kappa needs at least 2 items and 2 raters")

    categories = sorted({v for v in values.ravel().tolist()}, key=repr)
    index = {c: j for j, c in enumerate(categories)}
    counts = np.zeros((n_items, len(categories)))
    for i, row in enumerate(values.tolist()):
        for v in row:
            counts[i, index[v]] += 1

    per_item = (np.sum(counts * counts, axis=1) - n_raters) / (n_raters * (n_raters - 1))
    p_bar = math.fsum(per_item) / n_items
    p_j = counts.sum(axis=0) / (n_items * n_raters)
    p_e = math.fsum(p_j * p_j)
    proportions = {c: float(p) for c, p in zip(categories, p_j)}
    if len(categories) == 1:
        return KappaResult(1.0, proportions, p_bar, p_e, degenerate=True)
    return KappaResult((p_bar - p_e) / (1.0 - p_e), proportions, p_bar, p_e)


def bin_absolute(scores, tau: int) -> np.ndarray:
    """Label each ordinal score natural iff it is at least ``tau``."""
    scores = np.asarray(scores)
    return np.where(scores >= tau, NATURAL, UNNATURAL).astype(object)


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    halfwidth: float
    n: int
    p_value: float = field(default=math.nan)

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha


def _pearson_r(a: np.ndarray, b: np.ndarray) -> float:
    da, db = a - a.mean(), b - b.mean()
    denom = math.sqrt(np.dot(da, da) * np.dot(db, db))
    if denom == 0:
        raise ValueError("Pearson correlation is undefined for constant input")
    return float(np.clip(np.dot(da, db) / denom, -1.0, 1.0))


def _bootstrap_rs(a: np.ndarray, b: np.ndarray, n_boot: int, seed: int) -> np.ndarray:
    # Philox is counter-based: resample k depends only on (seed, k).
    rng = np.random.Generator(np.random.Philox(seed))
    idx = rng.integers(0, len(a), size=(n_boot, len(a)))
    A, B = a[idx], b[idx]
    dA = A - A.mean(axis=1, keepdims=True)
    dB = B - B.mean(axis=1, keepdims=True)
    num = np.einsum("ij,ij->i", dA, dB)
    den = np.sqrt(np.einsum("ij,ij->i", dA, dA) * np.einsum("ij,ij->i", dB, dB))
    with np.errstate(invalid="ignore", divide="ignore"):
        rs = num / den
    return rs[np.isfinite(rs)]


def pearson(
    a: Sequence[float],
    b: Sequence[float],
    absolute: bool = False,
    bootstrap_n: int = 1000,
    seed: int = 17,
) -> CorrelationResult:
    """Sample Pearson r with a 95% percentile-bootstrap half-width.

    ``absolute`` reports |r|; the half-width is that of the signed interval.
    The p-value is the usual two-sided t-test of zero correlation.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    n = len(a)
    if n < 3:
        raise ValueError("Pearson correlation needs at least 3 points")
    r = _pearson_r(a, b)

    halfwidth = 0.0
    if bootstrap_n > 0:
        rs = _bootstrap_rs(a, b, bootstrap_n, seed)
        if rs.size:
            lo, hi = np.percentile(rs, [2.5, 97.5])
            halfwidth = float(hi - lo) / 2.0

    if abs(r) >= 1.0:
        p_value = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        p_value = float(2.0 * sps.t.sf(abs(t), n - 2))
    return CorrelationResult(abs(r) if absolute else r, halfwidth, n, p_value)


def average_raters(ratings: RatingsTable) -> np.ndarray:
    if ratings.kind != ORDINAL:
        raise ValueError("rater averaging needs ordinal ratings")
    return ratings.values.astype(np.float64).mean(axis=1)
