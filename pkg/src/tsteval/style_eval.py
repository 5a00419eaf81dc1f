"""Style distributions and direction-corrected EMD style transfer intensity."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from .corpus import DataError, PathLike, StyleLabel, TokenText, TransferPair, read_text
from .lexicon import LinearModel
from .transport import MASS_TOL, emd, unit_ground_distance


@dataclass(frozen=True)
class StyleDistribution:
    probs: np.ndarray
    styles: Tuple[StyleLabel, ...]

    def __post_init__(self):
        p = self.probs
        if p.shape != (len(self.styles),):
            raise ValueError(f"{p.shape[0]} probabilities for {len(self.styles)} styles")
        if not np.all(np.isfinite(p)) or np.any(p < 0) or abs(p.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"not a probability vector: {p!r}")

    def __getitem__(self, style: Union[StyleLabel, int]) -> float:
        return float(self.probs[_style_index(style, self.styles)])


def _style_index(style: Union[StyleLabel, int], styles: Sequence[StyleLabel]) -> int:
    idx = style.id if isinstance(style, StyleLabel) else int(style)
    if not 0 <= idx < len(styles) or (
        isinstance(style, StyleLabel) and styles[idx].name != style.name
    ):
        raise ValueError(f"style {style!r} is not in the inventory")
    return idx


def score_style(model: LinearModel, text: TokenText) -> StyleDistribution:
    """Softmax of the classifier's logits; out-of-vocabulary tokens are ignored."""
    return StyleDistribution(model.predict_proba([text])[0], model.styles)


def score_styles(model: LinearModel, texts: Sequence[TokenText]) -> List[StyleDistribution]:
    if not texts:
        return []
    return [StyleDistribution(row, model.styles) for row in model.predict_proba(texts)]


def sti(
    sc_x: StyleDistribution,
    sc_xp: StyleDistribution,
    target: Union[StyleLabel, int],
) -> float:
    """EMD between the two distributions, negated when target mass drops."""
    if [s.name for s in sc_x.styles] != [s.name for s in sc_xp.styles]:
        raise ValueError("style inventories differ")
    t = _style_index(target, sc_x.styles)
    size = emd(sc_x.probs, sc_xp.probs, unit_ground_distance(len(sc_x.styles)))
    if size > 0 and sc_xp.probs[t] < sc_x.probs[t]:
        return -size
    return size


@dataclass(frozen=True)
class CorpusSti:
    mean: float
    scores: Tuple[float, ...]


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def corpus_sti(pairs: Sequence[TransferPair], model: LinearModel) -> CorpusSti:
    if not pairs:
        raise ValueError("no pairs to score")
    sc_in = score_styles(model, [p.input for p in pairs])
    sc_out = score_styles(model, [p.output for p in pairs])
    scores = tuple(
        sti(a, b, p.target_style) for a, b, p in zip(sc_in, sc_out, pairs)
    )
    return CorpusSti(_mean(scores), scores)


def target_style_rate(pairs: Sequence[TransferPair], model: LinearModel) -> float:
    """Fraction of outputs whose most probable style is the target."""
    if not pairs:
        raise ValueError("no pairs to score")
    probs = model.predict_proba([p.output for p in pairs])
    hits = np.argmax(probs, axis=1) == np.array([p.target_style.id for p in pairs])
    return int(hits.sum()) / len(pairs)


def load_distributions(
    path: PathLike, styles: Sequence[StyleLabel]
) -> Dict[str, StyleDistribution]:
    """Read externally computed distributions, ``pair_id,p_0,...,p_{S-1}``."""
    rows = [r for r in csv.reader(io.StringIO(read_text(path))) if r]
    if not rows or rows[0][0].strip() != "pair_id":
        raise DataError(f"{path}: header must start with 'pair_id'")
    width = len(styles) + 1
    if len(rows[0]) != width:
        raise DataError(f"{path}: expected {width} columns for {len(styles)} styles")
    out: Dict[str, StyleDistribution] = {}
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != width:
            raise DataError(f"{path}:{lineno}: expected {width} columns")
        try:
            probs = np.array([float(c) for c in row[1:]])
            out[row[0].strip()] = StyleDistribution(probs, tuple(styles))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
    return out
