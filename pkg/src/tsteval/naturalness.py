"""Adversarial naturalness scoring and an interpolated n-gram language model."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from .corpus import DataError, TokenText, TransferPair, make_styles
from .lexicon import LinearModel, TrainConfig, train_linear_model

INPUT = "input"
OUTPUT = "output"
MACHINE, HUMAN = 0, 1
ADVERSARIAL_STYLES = make_styles(["machine", "human"])


def train_adversarial_classifier(
    inputs: Sequence[TokenText],
    outputs: Sequence[TokenText],
    cfg: TrainConfig = TrainConfig(),
) -> LinearModel:
    """Logistic regression separating human inputs (class 1) from model outputs."""
    if not inputs or not outputs:
        raise DataError("adversarial classifier needs both inputs and outputs")
    texts = list(inputs) + list(outputs)
    labels = [HUMAN] * len(inputs) + [MACHINE] * len(outputs)
    return train_linear_model(texts, labels, ADVERSARIAL_STYLES, cfg)


def naturalness_score(clf: LinearModel, t: TokenText) -> float:
    """Probability that ``t`` is human-written according to ``clf``."""
    return float(clf.predict_proba([t])[0, HUMAN])


@dataclass(frozen=True)
class NaturalnessDecision:
    winner: str
    margin: float
    p_input: float
    p_output: float


def decide(p_input: float, p_output: float) -> NaturalnessDecision:
    # exact ties go to the input
    winner = OUTPUT if p_output > p_input else INPUT
    return NaturalnessDecision(winner, abs(p_output - p_input), p_input, p_output)


def more_natural(clf: LinearModel, pair: TransferPair) -> NaturalnessDecision:
    p = clf.predict_proba([pair.input, pair.output])[:, HUMAN]
    return decide(float(p[0]), float(p[1]))


def decide_all(clf: LinearModel, pairs: Sequence[TransferPair]) -> List[NaturalnessDecision]:
    if not pairs:
        return []
    p_in = clf.predict_proba([p.input for p in pairs])[:, HUMAN]
    p_out = clf.predict_proba([p.output for p in pairs])[:, HUMAN]
    return [decide(float(a), float(b)) for a, b in zip(p_in, p_out)]


def output_more_natural_rate(clf: LinearModel, pairs: Sequence[TransferPair]) -> float:
    if not pairs:
        raise ValueError("no pairs to score")
    wins = sum(d.winner == OUTPUT for d in decide_all(clf, pairs))
    return wins / len(pairs)


Choice = Union[NaturalnessDecision, str]


def _winner(c: Choice) -> str:
    w = c.winner if isinstance(c, NaturalnessDecision) else str(c).strip().lower()
    if w not in (INPUT, OUTPUT):
        raise ValueError(f"unknown naturalness choice {c!r}")
    return w


def agreement(machine: Sequence[Choice], human: Sequence[Choice]) -> float:
    """Fraction of items where both judges pick the same more-natural text."""
    if len(machine) != len(human):
        raise ValueError(f"length mismatch: {len(machine)} vs {len(human)}")
    if not machine:
        raise ValueError("no decisions to compare")
    same = sum(_winner(a) == _winner(b) for a, b in zip(machine, human))
    return same / len(machine)


# -- n-gram language model --------------------------------------------------

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

DEFAULT_WEIGHTS = {3: (0.1, 0.3, 0.6)}


class NgramLM:
    """Linearly interpolated maximum-likelihood n-gram model.

    The unigram level is add-one smoothed over the predictable vocabulary
    (every type except ``<s>``), so no event has zero probability.  Orders whose
    context was never seen hand their weight to the remaining orders.
    """

    def __init__(
        self,
        corpus: Sequence[TokenText],
        order: int = 3,
        unk_threshold: int = 2,
        weights: Optional[Sequence[float]] = None,
    ):
        if not corpus:
            raise DataError("language model needs a non-empty corpus")
        if order < 1:
            raise ValueError("order must be >= 1")
        if weights is None:
            weights = DEFAULT_WEIGHTS.get(order, (1.0 / order,) * order)
        weights = tuple(float(w) for w in weights)
        if len(weights) != order:
            raise ValueError(f"need {order} interpolation weights, got {len(weights)}")
        if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError("interpolation weights must be non-negative and sum to 1")
        if weights[0] <= 0:
            raise ValueError("unigram weight must be positive")

        self.order = order
        self.unk_threshold = unk_threshold
        self.weights = weights

        raw = Counter(w for t in corpus for w in t.tokens)
        kept = sorted(w for w, c in raw.items() if c >= unk_threshold)
        self.vocab = frozenset(kept) | {UNK, EOS}
        self.V = len(self.vocab)

        # counts[k][(context, word)] for context length k; ctx_counts[k][context]
        self.counts: List[Counter] = [Counter() for _ in range(order)]
        self.ctx_counts: List[Counter] = [Counter() for _ in range(order)]
        for t in corpus:
            seq = self._padded(t.tokens)
            for i in range(order - 1, len(seq)):
                for k in range(order):
                    ctx = tuple(seq[i - k : i])
                    self.counts[k][(ctx, seq[i])] += 1
                    self.ctx_counts[k][ctx] += 1
        self.n_events = self.ctx_counts[0][()]

    def map_token(self, w: str) -> str:
        return w if w in self.vocab else UNK

    def _padded(self, tokens: Sequence[str]) -> List[str]:
        return [BOS] * (self.order - 1) + [self.map_token(w) for w in tokens] + [EOS]

    def prob(self, word: str, context: Sequence[str] = ()) -> float:
        """P(word | context); the context is padded with ``<s>`` as needed."""
        word = self.map_token(word)
        n = self.order - 1
        ctx = [BOS if w == BOS else self.map_token(w) for w in context][-n:] if n else []
        ctx = [BOS] * (n - len(ctx)) + ctx
        p_uni = (self.counts[0][((), word)] + 1) / (self.n_events + self.V)
        total, mass = self.weights[0] * p_uni, self.weights[0]
        for k in range(1, self.order):
            h = tuple(ctx[len(ctx) - k :])
            c_h = self.ctx_counts[k][h]
            if c_h and self.weights[k] > 0:
                total += self.weights[k] * self.counts[k][(h, word)] / c_h
                mass += self.weights[k]
        return total / mass

    def logprobs(self, tokens: Sequence[str]) -> List[float]:
        """Natural-log probability of each token and the closing ``</s>``."""
        seq = self._padded(tokens)
        n = self.order - 1
        return [math.log(self.prob(seq[i], seq[i - n : i])) for i in range(n, len(seq))]

    def predictable(self) -> List[str]:
        return sorted(self.vocab)


def train_ngram_lm(
    corpus: Sequence[TokenText],
    order: int = 3,
    unk_threshold: int = 2,
    weights: Optional[Sequence[float]] = None,
) -> NgramLM:
    return NgramLM(corpus, order, unk_threshold, weights)


def perplexity(lm, t: TokenText) -> float:
    """exp of the mean negative log-probability, ``</s>`` included.

    ``lm`` only needs a ``logprobs(tokens)`` method, so any model can be scored.
    """
    lps = lm.logprobs(t.tokens)
    return math.exp(-math.fsum(lps) / len(lps))


def majority_choice(row: Sequence[str]) -> str:
    """Majority human choice for one item; a split vote counts for the input."""
    counts = Counter(_winner(c) for c in row)
    return OUTPUT if counts[OUTPUT] > counts[INPUT] else INPUT


def majority_choices(rows: Sequence[Sequence[str]]) -> Tuple[str, ...]:
    return tuple(majority_choice(r) for r in rows)

