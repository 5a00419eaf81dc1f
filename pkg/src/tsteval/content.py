"""Content preservation metrics between an input text and its transferred output.

Similarity metrics live in [0, 1].  Embedding cosines are rescaled from
[-1, 1] with ``(c + 1) / 2``.  WMD is a distance, and
:func:`cp_normalized_inverse` maps it onto (0, 1].
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from nltk.stem.porter import PorterStemmer

from .corpus import EmbeddingTable, TokenText, TransferPair
from .lexicon import StyleLexicon, mask_style, remove_style
from .transport import emd

MAX_ORDER = 4

METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5
# Past this many candidate alignments METEOR-lite pairs repeated tokens in order.
ALIGNMENT_BUDGET = 20000

UNMODIFIED = "unmodified"
REMOVED = "removed"
MASKED = "masked"
MODES = (UNMODIFIED, REMOVED, MASKED)


class UndefinedScoreError(ValueError):
    """A metric has nothing to compare (empty or all out-of-vocabulary side)."""


# -- BLEU -------------------------------------------------------------------


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _bleu_stats(reference: Sequence[str], candidate: Sequence[str]):
    matches, totals = [], []
    for n in range(1, MAX_ORDER + 1):
        cand, ref = _ngrams(candidate, n), _ngrams(reference, n)
        matches.append(sum(min(c, ref[g]) for g, c in cand.items()))
        totals.append(max(len(candidate) - n + 1, 0))
    return matches, totals


def _combine_bleu(matches, totals, ref_len: int, cand_len: int) -> float:
    if cand_len == 0 or matches[0] == 0:
        return 0.0
    log_p = math.log(matches[0] / totals[0])
    for m, t in zip(matches[1:], totals[1:]):
        log_p += math.log((m + 1) / (t + 1))
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * math.exp(log_p / MAX_ORDER)


def bleu(reference: TokenText, candidate: TokenText) -> float:
    """Sentence BLEU-4 with add-one smoothing of the 2- to 4-gram precisions."""
    m, t = _bleu_stats(reference.tokens, candidate.tokens)
    return _combine_bleu(m, t, len(reference), len(candidate))


def corpus_bleu(references: Sequence[TokenText], candidates: Sequence[TokenText]) -> float:
    if len(references) != len(candidates):
        raise ValueError("references and candidates differ in length")
    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    ref_len = cand_len = 0
    for ref, cand in zip(references, candidates):
        m, t = _bleu_stats(ref.tokens, cand.tokens)
        matches = [a + b for a, b in zip(matches, m)]
        totals = [a + b for a, b in zip(totals, t)]
        ref_len += len(ref)
        cand_len += len(cand)
    return _combine_bleu(matches, totals, ref_len, cand_len)


# -- METEOR-lite ------------------------------------------------------------

_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


@lru_cache(maxsize=65536)
def stem(token: str) -> str:
    return _stemmer.stem(token)


def _stage_groups(cand_keys, ref_keys, free_c, free_r):
    """Per matching key, the free candidate and reference positions."""
    groups: Dict[str, Tuple[List[int], List[int]]] = {}
    for i in free_c:
        groups.setdefault(cand_keys[i], ([], []))[0].append(i)
    for j in free_r:
        if ref_keys[j] in groups:
            groups[ref_keys[j]][1].append(j)
    return [groups[k] for k in sorted(groups) if groups[k][1]]


def _group_options(cs: List[int], rs: List[int]):
    """Maximal one-to-one matchings of one group; the first preserves order."""
    if len(cs) <= len(rs):
        return (tuple(zip(cs, perm)) for perm in itertools.permutations(rs, len(cs)))
    return (tuple(zip(perm, rs)) for perm in itertools.permutations(cs, len(rs)))


def _n_options(groups) -> int:
    return math.prod(math.perm(max(len(c), len(r)), min(len(c), len(r))) for c, r in groups)


def _in_order(groups):
    yield sum((next(_group_options(c, r)) for c, r in groups), ())


def _expand(groups):
    for combo in itertools.product(*(list(_group_options(c, r)) for c, r in groups)):
        yield sum(combo, ())


def count_chunks(alignment: Sequence[Tuple[int, int]]) -> int:
    """Runs of aligned pairs adjacent in both candidate and reference."""
    pairs = sorted(alignment)
    if not pairs:
        return 0
    chunks = 1
    for (c0, r0), (c1, r1) in zip(pairs, pairs[1:]):
        if c1 != c0 + 1 or r1 != r0 + 1:
            chunks += 1
    return chunks


def align(reference: Sequence[str], candidate: Sequence[str]) -> Tuple[Tuple[int, int], ...]:
    """Exact-then-stem alignment with the fewest chunks; pairs are (cand, ref)."""
    stems_c = [stem(w) for w in candidate]
    stems_r = [stem(w) for w in reference]
    all_c, all_r = range(len(candidate)), range(len(reference))

    exact = _stage_groups(candidate, reference, all_c, all_r)
    first = next(_in_order(exact))

    def stem_choices(stage1):
        used_c = {c for c, _ in stage1}
        used_r = {r for _, r in stage1}
        return _stage_groups(
            stems_c,
            stems_r,
            [i for i in all_c if i not in used_c],
            [j for j in all_r if j not in used_r],
        )

    # Leftover counts per token type do not depend on which stage-1 matching is
    # used, so the stage-2 option count is the same for every stage-1 choice.
    budget_ok = _n_options(exact) * _n_options(stem_choices(first)) <= ALIGNMENT_BUDGET
    stage1_opts = _expand(exact) if budget_ok else _in_order(exact)

    best, best_chunks = None, math.inf
    for s1 in stage1_opts:
        second = stem_choices(s1)
        stage2_opts = _expand(second) if budget_ok else _in_order(second)
        for s2 in stage2_opts:
            full = s1 + s2
            ch = count_chunks(full)
            if ch < best_chunks:
                best, best_chunks = full, ch
    return tuple(sorted(best or ()))


def _meteor_from_counts(matched: int, chunks: int, cand_len: int, ref_len: int) -> float:
    if matched == 0:
        return 0.0
    precision = matched / cand_len
    recall = matched / ref_len
    fmean = precision * recall / (METEOR_ALPHA * precision + (1 - METEOR_ALPHA) * recall)
    penalty = METEOR_GAMMA * (chunks / matched) ** METEOR_BETA
    return fmean * (1.0 - penalty)


def meteor_lite(reference: TokenText, candidate: TokenText) -> float:
    """METEOR with exact and Porter-stem matching only (no synonyms/paraphrases)."""
    if not reference.tokens or not candidate.tokens:
        return 0.0
    alignment = align(reference.tokens, candidate.tokens)
    return _meteor_from_counts(
        len(alignment), count_chunks(alignment), len(candidate), len(reference)
    )


def corpus_meteor_lite(
    references: Sequence[TokenText], candidates: Sequence[TokenText]
) -> float:
    """Corpus score from pooled matches, chunks and lengths."""
    if len(references) != len(candidates):
        raise ValueError("references and candidates differ in length")
    matched = chunks = cand_len = ref_len = 0
    for ref, cand in zip(references, candidates):
        cand_len += len(cand)
        ref_len += len(ref)
        if ref.tokens and cand.tokens:
            a = align(ref.tokens, cand.tokens)
            matched += len(a)
            chunks += count_chunks(a)
    return _meteor_from_counts(matched, chunks, cand_len, ref_len)


# -- embedding metrics ------------------------------------------------------


def _vectors(text: TokenText, E: EmbeddingTable) -> np.ndarray:
    vecs = [E[w] for w in text.tokens if w in E]
    if not vecs:
        raise UndefinedScoreError("no in-vocabulary tokens")
    return np.stack(vecs)


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise UndefinedScoreError("zero-norm sentence vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _rescale(c: float) -> float:
    return (c + 1.0) / 2.0


def embed_average(a: TokenText, b: TokenText, E: EmbeddingTable) -> float:
    return _rescale(_cosine(_vectors(a, E).mean(axis=0), _vectors(b, E).mean(axis=0)))


def extrema(vectors: np.ndarray) -> np.ndarray:
    """Per dimension, the value of largest magnitude (the maximum wins ties)."""
    hi, lo = vectors.max(axis=0), vectors.min(axis=0)
    return np.where(np.abs(hi) >= np.abs(lo), hi, lo)


def vector_extrema(a: TokenText, b: TokenText, E: EmbeddingTable) -> float:
    return _rescale(_cosine(extrema(_vectors(a, E)), extrema(_vectors(b, E))))


def _cosine_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    if np.any(na == 0) or np.any(nb == 0):
        raise UndefinedScoreError("zero-norm word vector")
    return np.clip((A @ B.T) / np.outer(na, nb), -1.0, 1.0)


def greedy_match(a: TokenText, b: TokenText, E: EmbeddingTable) -> float:
    sims = _cosine_matrix(_vectors(a, E), _vectors(b, E))
    forward = sims.max(axis=1).mean()
    backward = sims.max(axis=0).mean()
    return _rescale(float((forward + backward) / 2.0))


def nbow(text: TokenText, E: EmbeddingTable) -> Tuple[List[str], np.ndarray]:
    """Unique in-vocabulary tokens (first-appearance order) and their mass."""
    counts = Counter(w for w in text.tokens if w in E)
    if not counts:
        raise UndefinedScoreError("no in-vocabulary tokens")
    support = list(counts)
    mass = np.array([counts[w] for w in support], dtype=np.float64)
    return support, mass / mass.sum()


def wmd(a: TokenText, b: TokenText, E: EmbeddingTable) -> float:
    """Word Mover's Distance under Euclidean embedding distances."""
    sa, pa = nbow(a, E)
    sb, pb = nbow(b, E)
    A = np.stack([E[w] for w in sa])
    B = np.stack([E[w] for w in sb])
    d = np.sqrt(np.maximum(((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=-1), 0.0))
    return emd(pa, pb, d)


def cp_normalized_inverse(w: float) -> float:
    if w < 0:
        raise ValueError(f"distance must be non-negative, got {w!r}")
    return 1.0 / (1.0 + w)


# -- corpus evaluation ------------------------------------------------------

SIMILARITY = "similarity"
DISTANCE = "distance"


@dataclass(frozen=True)
class Metric:
    name: str
    fn: Callable
    orientation: str
    needs_embeddings: bool


def _wmd_inverse(a, b, E):
    return cp_normalized_inverse(wmd(a, b, E))


METRICS: Dict[str, Metric] = {
    m.name: m
    for m in (
        Metric("bleu", lambda a, b, E: bleu(a, b), SIMILARITY, False),
        Metric("meteor", lambda a, b, E: meteor_lite(a, b), SIMILARITY, False),
        Metric("embed_average", embed_average, SIMILARITY, True),
        Metric("vector_extrema", vector_extrema, SIMILARITY, True),
        Metric("greedy_match", greedy_match, SIMILARITY, True),
        Metric("wmd", wmd, DISTANCE, True),
        Metric("wmd_inverse", _wmd_inverse, SIMILARITY, True),
    )
}


def modify(text: TokenText, lexicon: Optional[StyleLexicon], mode: str) -> TokenText:
    if mode == UNMODIFIED:
        return text
    if lexicon is None:
        raise ValueError(f"mode {mode!r} needs a style lexicon")
    if mode == REMOVED:
        return remove_style(text, lexicon)
    if mode == MASKED:
        return mask_style(text, lexicon)
    raise ValueError(f"unknown modification mode {mode!r}")


@dataclass(frozen=True)
class CpEvaluation:
    metric: str
    mode: str
    orientation: str
    scores: Tuple[Optional[float], ...]  # None marks an excluded degenerate pair
    mean: float
    count: int
    degenerate: int


def score_pair(
    pair: TransferPair,
    metric: str,
    mode: str = UNMODIFIED,
    lexicon: Optional[StyleLexicon] = None,
    embeddings: Optional[EmbeddingTable] = None,
) -> float:
    """Metric value on the modified pair; raises UndefinedScoreError if degenerate."""
    spec = METRICS[metric]
    x = modify(pair.input, lexicon, mode)
    xp = modify(pair.output, lexicon, mode)
    if not x.tokens or not xp.tokens:
        raise UndefinedScoreError("empty text after modification")
    return spec.fn(x, xp, embeddings)


def evaluate_cp(
    pairs: Sequence[TransferPair],
    lexicon: Optional[StyleLexicon],
    mode: str,
    metric: str,
    embeddings: Optional[EmbeddingTable] = None,
    exclude_degenerate: bool = False,
) -> CpEvaluation:
    """Score every pair and average.

    Degenerate pairs score 0 similarity unless ``exclude_degenerate``; for the
    raw ``wmd`` distance they are always excluded since no finite distance
    stands for "nothing in common".
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; choose from {sorted(METRICS)}")
    if mode not in MODES:
        raise ValueError(f"unknown modification mode {mode!r}")
    spec = METRICS[metric]
    if spec.needs_embeddings and embeddings is None:
        raise ValueError(f"metric {metric!r} needs an embedding table")
    if mode != UNMODIFIED and lexicon is None:
        raise ValueError(f"mode {mode!r} needs a style lexicon")

    scores: List[Optional[float]] = []
    degenerate = 0
    for pair in pairs:
        try:
            scores.append(score_pair(pair, metric, mode, lexicon, embeddings))
        except UndefinedScoreError:
            degenerate += 1
            if exclude_degenerate or spec.orientation == DISTANCE:
                scores.append(None)
            else:
                scores.append(0.0)
    kept = [s for s in scores if s is not None]
    mean = math.fsum(kept) / len(kept) if kept else math.nan
    return CpEvaluation(
        metric, mode, spec.orientation, tuple(scores), mean, len(kept), degenerate
    )
