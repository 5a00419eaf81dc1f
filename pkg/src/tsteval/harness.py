"""Synthetic lexicon-flip transfer model and aspect tradeoff plots."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

from .content import MASKED, evaluate_cp
from .corpus import (
    EmbeddingTable,
    LabeledCorpus,
    PathLike,
    TokenText,
    TransferPair,
    from_tokens,
    make_styles,
)
from .lexicon import LinearModel, StyleLexicon, TrainConfig
from .naturalness import output_more_natural_rate, train_adversarial_classifier
from .style_eval import corpus_sti


class FlipModel:
    """Replaces source-style lexicon words by opposite-style words.

    Each style word gets one fixed substitute drawn at construction; at
    transfer time every occurrence is swapped independently with probability
    ``p``.  Both draws come from ``seed`` alone.
    """

    def __init__(self, lexicon: StyleLexicon, p: float, seed: int = 17):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"flip probability {p!r} outside [0, 1]")
        names = list(lexicon.styles)
        if len(names) != 2:
            raise ValueError("flip model needs a two-style lexicon")
        self.lexicon = lexicon
        self.p = p
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.substitutes: Dict[str, str] = {}
        for name, other in ((names[0], names[1]), (names[1], names[0])):
            pool = lexicon.words_for(other)
            words = lexicon.words_for(name)
            if words and not pool:
                raise ValueError(f"no {other!r} words to substitute for {name!r}")
            for w in words:
                self.substitutes[w] = pool[int(rng.integers(len(pool)))]

    def transfer(self, text: TokenText, source: str, rng: np.random.Generator) -> TokenText:
        own = set(self.lexicon.words_for(source))
        out = []
        for w in text.tokens:
            if w in own and rng.random() < self.p:
                out.append(self.substitutes[w])
            else:
                out.append(w)
        return from_tokens(out)


def synthesize_transfer(corpus: LabeledCorpus, model: FlipModel) -> List[TransferPair]:
    """Transfer every text of a binary corpus toward the opposite label."""
    if len(corpus.styles) != 2:
        raise ValueError("synthetic transfer needs a binary corpus")
    rng = np.random.default_rng([model.seed, 1])
    pairs = []
    for text, label in zip(corpus.texts, corpus.labels):
        target = corpus.styles[1 - label.id]
        out = model.transfer(text, label.name, rng)
        pairs.append(TransferPair(text, out, label, target))
    return pairs


@dataclass(frozen=True)
class TradeoffPoint:
    label: str
    sti: float
    cp: float
    nt: float


def tradeoff_point(
    label: str,
    pairs: Sequence[TransferPair],
    sc_model: LinearModel,
    lexicon: StyleLexicon,
    embeddings: EmbeddingTable,
    classifier_inputs: Optional[Sequence[TokenText]] = None,
    cfg: TrainConfig = TrainConfig(),
    cp_mode: str = MASKED,
) -> TradeoffPoint:
    sti_mean = corpus_sti(pairs, sc_model).mean
    cp = evaluate_cp(pairs, lexicon, cp_mode, "wmd_inverse", embeddings).mean
    inputs = list(classifier_inputs) if classifier_inputs is not None else [p.input for p in pairs]
    clf = train_adversarial_classifier(inputs, [p.output for p in pairs], cfg)
    nt = output_more_natural_rate(clf, pairs)
    return TradeoffPoint(label, sti_mean, cp, nt)


def build_tradeoff(
    runs: Sequence[Tuple[str, Sequence[TransferPair]]],
    sc_model: LinearModel,
    lexicon: StyleLexicon,
    embeddings: EmbeddingTable,
    classifier_inputs: Optional[Sequence[TokenText]] = None,
    cfg: TrainConfig = TrainConfig(),
    cp_mode: str = MASKED,
) -> List[TradeoffPoint]:
    """One point per run, sorted by STI (then label).

    A fresh adversarial classifier is trained for every run.
    """
    if not runs:
        raise ValueError("no runs to plot")
    points = [
        tradeoff_point(label, pairs, sc_model, lexicon, embeddings, classifier_inputs, cfg, cp_mode)
        for label, pairs in runs
    ]
    return sorted(points, key=lambda pt: (pt.sti, pt.label))


# -- output -----------------------------------------------------------------

WIDTH, HEIGHT = 480, 360
MARGIN = dict(left=64, right=24, top=36, bottom=52)


def _fmt(x: float) -> str:
    return format(x, ".4f").rstrip("0").rstrip(".") if math.isfinite(x) else "nan"


def axis_range(values: Sequence[float], pad: float = 0.05) -> Tuple[float, float]:
    lo, hi = min(values), max(values)
    span = hi - lo
    if span == 0:
        span = abs(lo) if lo else 1.0
    return lo - pad * span, hi + pad * span


def _ticks(lo: float, hi: float, n: int = 5) -> List[float]:
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def scatter_svg(
    xs: Sequence[float],
    ys: Sequence[float],
    labels: Sequence[str],
    x_title: str,
    y_title: str,
    title: str,
) -> str:
    x0, x1 = axis_range(xs)
    y0, y1 = axis_range(ys)
    left, top = MARGIN["left"], MARGIN["top"]
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 16}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        y = py(t)
        out.append(f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(
        f'<text x="{left + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(x_title)}</text>'
    )
    out.append(
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(y_title)}</text>'
    )
    if len(xs) > 1:
        path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{path}" fill="none" stroke="#4477aa"/>')
    for x, y, lab in zip(xs, ys, labels):
        out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="4" fill="#4477aa"/>')
        out.append(f'<text x="{px(x) + 6:.2f}" y="{py(y) - 6:.2f}">{escape(lab)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(points: Sequence[TradeoffPoint], prefix: PathLike) -> List[Path]:
    """Write ``<prefix>_tradeoff.csv`` and the two tradeoff SVGs."""
    if not points:
        raise ValueError("no points to plot")
    prefix = Path(prefix)
    csv_path = prefix.parent / f"{prefix.name}_tradeoff.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "sti", "cp", "nt"])
        for pt in points:
            w.writerow([pt.label, repr(pt.sti), repr(pt.cp), repr(pt.nt)])

    xs = [pt.sti for pt in points]
    labels = [pt.label for pt in points]
    paths = [csv_path]
    for name, ys, y_title in (
        ("cp_vs_sti", [pt.cp for pt in points], "content preservation (1 / (1 + WMD))"),
        ("nt_vs_sti", [pt.nt for pt in points], "naturalness (output judged more natural)"),
    ):
        path = prefix.parent / f"{prefix.name}_{name}.svg"
        svg = scatter_svg(xs, ys, labels, "style transfer intensity", y_title, name.replace("_", " "))
        path.write_text(svg, encoding="utf-8")
        paths.append(path)
    return paths


# -- synthetic fixtures -----------------------------------------------------


def synthetic_corpus(
    n_per_class: int = 100,
    n_style: int = 20,
    n_neutral: int = 200,
    neutral_per_text: int = 8,
    style_per_text: int = 2,
    seed: int = 17,
    names: Tuple[str, str] = ("negative", "positive"),
) -> Tuple[LabeledCorpus, Dict[str, List[str]]]:
    """Two-style corpus with planted style words; returns it with the plants."""
    rng = np.random.default_rng(seed)
    neutral = [f"w{i:03d}" for i in range(n_neutral)]
    planted = {
        names[0]: [f"neg{i:02d}" for i in range(n_style)],
        names[1]: [f"pos{i:02d}" for i in range(n_style)],
    }
    styles = make_styles(list(names))
    texts, labels = [], []
    for style in styles:
        for _ in range(n_per_class):
            toks = list(rng.choice(neutral, neutral_per_text)) + list(
                rng.choice(planted[style.name], style_per_text)
            )
            rng.shuffle(toks)
            texts.append(from_tokens(toks))
            labels.append(style)
    return LabeledCorpus(tuple(texts), tuple(labels), styles), planted


def synthetic_embeddings(tokens: Sequence[str], dim: int = 16, seed: int = 17) -> EmbeddingTable:
    """Gaussian random vectors for ``tokens`` (sorted for determinism)."""
    rng = np.random.default_rng(seed)
    entries = {}
    for tok in sorted(set(tokens)):
        vec = rng.normal(size=dim)
        vec.setflags(write=False)
        entries[tok] = vec
    return EmbeddingTable(dim, entries)
