"""Softmax style classifier over unigram counts and the style lexicon built from it."""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .corpus import (
    DataError,
    LabeledCorpus,
    PathLike,
    StyleLabel,
    TokenText,
    from_tokens,
    read_text,
)

log = logging.getLogger(__name__)

PLACEHOLDER = "<customstyle>"
DEFAULT_K = 100


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    l2: float = 1e-4
    seed: int = 17
    convergence_tol: float = 1e-7

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be a positive integer")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")


@dataclass(frozen=True)
class LinearModel:
    vocabulary: Dict[str, int]
    weights: np.ndarray  # styles x vocabulary
    bias: np.ndarray
    styles: Tuple[StyleLabel, ...]
    loss_history: Tuple[float, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        s, v = len(self.styles), len(self.vocabulary)
        if self.weights.shape != (s, v) or self.bias.shape != (s,):
            raise ValueError(
                f"weights {self.weights.shape} / bias {self.bias.shape} "
                f"do not match {s} styles x {v} features"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("model parameters must be finite")

    def features(self, texts: Sequence[TokenText]) -> sparse.csr_matrix:
        return count_matrix(texts, self.vocabulary)

    def logits(self, texts: Sequence[TokenText]) -> np.ndarray:
        return self.features(texts) @ self.weights.T + self.bias

    def predict_proba(self, texts: Sequence[TokenText]) -> np.ndarray:
        return softmax(self.logits(texts))

    def accuracy(self, texts: Sequence[TokenText], label_ids: Sequence[int]) -> float:
        pred = np.argmax(self.predict_proba(texts), axis=1)
        return float(np.mean(pred == np.asarray(label_ids)))


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def count_matrix(texts: Sequence[TokenText], vocabulary: Mapping[str, int]):
    """Unigram term counts; tokens outside ``vocabulary`` are ignored."""
    indptr, indices = [0], []
    for t in texts:
        indices.extend(vocabulary[w] for w in t.tokens if w in vocabulary)
        indptr.append(len(indices))
    data = np.ones(len(indices))
    mat = sparse.csr_matrix(
        (data, np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(texts), len(vocabulary)),
    )
    mat.sum_duplicates()
    return mat


def _loss(X, Y, W, b, l2: float) -> Tuple[float, np.ndarray]:
    P = softmax(X @ W.T + b)
    ll = np.log(np.clip(P[Y.astype(bool)], 1e-300, None))
    return float(-ll.mean() + 0.5 * l2 * np.sum(W * W)), P


def train_linear_model(
    texts: Sequence[TokenText],
    label_ids: Sequence[int],
    styles: Sequence[StyleLabel],
    cfg: TrainConfig = TrainConfig(),
) -> LinearModel:
    """Full-batch gradient descent on L2-regularized softmax cross-entropy.

    Parameters start at zero, so the result does not depend on ``cfg.seed``.
    A step that would raise the loss is retried at half the step size.
    """
    vocab_tokens = sorted({w for t in texts for w in t.tokens})
    if not vocab_tokens:
        raise DataError("empty vocabulary")
    vocabulary = {w: i for i, w in enumerate(vocab_tokens)}
    X = count_matrix(texts, vocabulary)
    XT = X.T.tocsr()
    n, s = X.shape[0], len(styles)
    Y = np.zeros((n, s))
    Y[np.arange(n), np.asarray(label_ids)] = 1.0

    W = np.zeros((s, len(vocabulary)))
    b = np.zeros(s)
    loss, P = _loss(X, Y, W, b, cfg.l2)
    history = [loss]
    lr = cfg.learning_rate
    for epoch in range(cfg.epochs):
        G = P - Y
        grad_W = (XT @ G).T / n + cfg.l2 * W
        grad_b = G.mean(axis=0)
        while True:
            W_new = W - lr * grad_W
            b_new = b - lr * grad_b
            new_loss, P_new = _loss(X, Y, W_new, b_new, cfg.l2)
            if new_loss <= loss or lr < 1e-12:
                break
            lr *= 0.5
            log.debug("epoch %d: loss rose, step halved to %g", epoch, lr)
        W, b, P = W_new, b_new, P_new
        delta = loss - new_loss
        loss = new_loss
        history.append(loss)
        if delta < cfg.convergence_tol:
            break

    return LinearModel(vocabulary, W, b, tuple(styles), tuple(history))


def train_style_classifier(
    corpus: LabeledCorpus, cfg: TrainConfig = TrainConfig()
) -> LinearModel:
    used = {lab.id for lab in corpus.labels}
    if len(used) < 2:
        raise DataError("style classifier needs at least two distinct labels")
    for sid in used:
        if not any(t.tokens for t, lab in zip(corpus.texts, corpus.labels) if lab.id == sid):
            raise DataError(f"style {corpus.styles[sid].name!r} has no non-empty text")
    return train_linear_model(
        corpus.texts, [lab.id for lab in corpus.labels], corpus.styles, cfg
    )


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    weight: float


@dataclass(frozen=True)
class StyleLexicon:
    """Per-style word lists, each sorted by descending weight then token."""

    styles: Dict[str, Tuple[LexiconEntry, ...]]
    k: int
    placeholder: str = PLACEHOLDER

    def __post_init__(self):
        seen: Dict[str, str] = {}
        for style, entries in self.styles.items():
            for e in entries:
                if e.word == self.placeholder:
                    raise ValueError("placeholder token cannot be a lexicon word")
                if e.word in seen:
                    raise ValueError(
                        f"{e.word!r} listed under {seen[e.word]!r} and {style!r}"
                    )
                seen[e.word] = style
        object.__setattr__(self, "_words", frozenset(seen))
        object.__setattr__(self, "_style_of", seen)

    @property
    def words(self) -> frozenset:
        return self._words

    def style_of(self, word: str) -> Optional[str]:
        return self._style_of.get(word)

    def words_for(self, style: str) -> List[str]:
        return [e.word for e in self.styles.get(style, ())]

    def to_json(self) -> dict:
        return {
            "placeholder": self.placeholder,
            "styles": {
                name: [{"word": e.word, "weight": e.weight} for e in entries]
                for name, entries in self.styles.items()
            },
        }

    @classmethod
    def from_json(cls, doc: dict) -> "StyleLexicon":
        try:
            styles = {
                name: tuple(LexiconEntry(str(e["word"]), float(e["weight"])) for e in entries)
                for name, entries in doc["styles"].items()
            }
            placeholder = str(doc.get("placeholder", PLACEHOLDER))
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise DataError(f"malformed lexicon document: {exc}") from exc
        k = max((len(v) for v in styles.values()), default=0)
        try:
            return cls(styles, k, placeholder)
        except ValueError as exc:
            raise DataError(str(exc)) from exc

    def save(self, path: PathLike) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: PathLike) -> "StyleLexicon":
        try:
            doc = json.loads(read_text(path))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc.msg})") from exc
        return cls.from_json(doc)


def empty_lexicon(style_names: Iterable[str] = ()) -> StyleLexicon:
    return StyleLexicon({name: () for name in style_names}, 0)


def feature_strength(weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per-feature (magnitude, owning style).

    Magnitude is the spread of a feature's weights across style rows, which is
    ``|w_1 - w_0|`` for two styles; the owner is the row valuing it most.
    """
    return weights.max(axis=0) - weights.min(axis=0), np.argmax(weights, axis=0)


def extract_lexicon(
    model: LinearModel, k: int = DEFAULT_K, placeholder: str = PLACEHOLDER
) -> StyleLexicon:
    """Keep the ``k`` strongest features owned by each style.

    Features with zero magnitude carry no style and are never listed.  Ties in
    magnitude are broken by lexicographic token order.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    vocab = len(model.vocabulary)
    if k > vocab:
        warnings.warn(f"k={k} exceeds vocabulary size {vocab}; clamped", stacklevel=2)
        k = vocab
    magnitude, owner = feature_strength(model.weights)
    tokens = sorted(model.vocabulary, key=model.vocabulary.__getitem__)
    styles: Dict[str, Tuple[LexiconEntry, ...]] = {}
    for style in model.styles:
        ranked = sorted(
            (
                (-float(magnitude[j]), tok)
                for j, tok in enumerate(tokens)
                if owner[j] == style.id and magnitude[j] > 0 and tok != placeholder
            )
        )[:k]
        styles[style.name] = tuple(LexiconEntry(tok, -neg) for neg, tok in ranked)
    return StyleLexicon(styles, k, placeholder)


def mask_style(text: TokenText, lex: StyleLexicon) -> TokenText:
    words = lex.words
    return from_tokens(lex.placeholder if w in words else w for w in text.tokens)


def remove_style(text: TokenText, lex: StyleLexicon) -> TokenText:
    words = lex.words
    return from_tokens(w for w in text.tokens if w not in words)


def lexicon_from_words(words: Mapping[str, Sequence[str]], placeholder: str = PLACEHOLDER) -> StyleLexicon:
    """Hand-built lexicon with unit weights, mostly for fixtures."""
    styles = {
        name: tuple(LexiconEntry(w, 1.0) for w in sorted(ws)) for name, ws in words.items()
    }
    return StyleLexicon(styles, max((len(v) for v in styles.values()), default=0), placeholder)

