"""Tokenization, domain records and the on-disk formats read by the toolkit.

Every loader here is a pure function of the file bytes.  Malformed input raises
:class:`DataError` with the file name and 1-based line number where possible.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

PathLike = Union[str, Path]

ORDINAL = "ordinal"
BINARY = "binary"
BINARY_CHOICES = ("input", "output")


class DataError(ValueError):
    """Raised when an input file or record violates its format."""


@dataclass(frozen=True)
class TokenText:
    raw: str
    tokens: Tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __str__(self) -> str:
        return " ".join(self.tokens)


def tokenize(raw: str) -> TokenText:
    """Lowercase whitespace tokenization; ``raw`` is kept verbatim."""
    return TokenText(raw=raw, tokens=tuple(raw.lower().split()))


def from_tokens(tokens: Iterable[str]) -> TokenText:
    tokens = tuple(tokens)
    return TokenText(raw=" ".join(tokens), tokens=tokens)


@dataclass(frozen=True)
class StyleLabel:
    id: int
    name: str


def make_styles(names: Sequence[str]) -> Tuple[StyleLabel, ...]:
    if len(set(names)) != len(names):
        raise DataError(f"duplicate style names: {list(names)}")
    return tuple(StyleLabel(i, n) for i, n in enumerate(names))


def style_by_name(styles: Sequence[StyleLabel], name: str) -> StyleLabel:
    for s in styles:
        if s.name == name:
            return s
    raise DataError(f"unknown style {name!r}; known: {[s.name for s in styles]}")


@dataclass(frozen=True)
class LabeledCorpus:
    texts: Tuple[TokenText, ...]
    labels: Tuple[StyleLabel, ...]
    styles: Tuple[StyleLabel, ...]

    def __post_init__(self):
        if len(self.texts) != len(self.labels):
            raise DataError("texts and labels differ in length")
        n_styles = len(self.styles)
        for lab in self.labels:
            if not 0 <= lab.id < n_styles:
                raise DataError(f"label id {lab.id} outside 0..{n_styles - 1}")

    def __len__(self) -> int:
        return len(self.texts)


@dataclass(frozen=True)
class TransferPair:
    input: TokenText
    output: TokenText
    source_style: StyleLabel
    target_style: StyleLabel

    def __post_init__(self):
        if self.source_style == self.target_style:
            raise DataError(f"source equals target ({self.source_style.name!r})")


@dataclass(frozen=True)
class EmbeddingTable:
    dimension: int
    entries: Dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        if self.dimension <= 0:
            raise DataError("embedding dimension must be positive")
        for tok, vec in self.entries.items():
            if vec.shape != (self.dimension,):
                raise DataError(f"vector for {tok!r} has shape {vec.shape}")
            if not np.all(np.isfinite(vec)):
                raise DataError(f"vector for {tok!r} has non-finite components")

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def __getitem__(self, token: str) -> np.ndarray:
        return self.entries[token]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class RatingsTable:
    """Items x raters matrix of ordinal scores (int) or binary choices (str)."""

    items: Tuple[str, ...]
    values: np.ndarray
    kind: str = ORDINAL

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] != len(self.items):
            raise DataError("ratings matrix must be items x raters")
        if self.kind == ORDINAL:
            if not np.all((self.values >= 1) & (self.values <= 5)):
                raise DataError("ordinal ratings must lie in 1..5")
        elif self.kind == BINARY:
            if not np.all(np.isin(self.values, BINARY_CHOICES)):
                raise DataError("binary ratings must be 'input' or 'output'")
        else:
            raise DataError(f"unknown ratings kind {self.kind!r}")

    @property
    def n_raters(self) -> int:
        return self.values.shape[1]


def read_text(path: PathLike) -> str:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DataError(f"{path}: cannot read ({exc.strerror or exc})") from exc
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: invalid UTF-8 at byte {exc.start}") from exc


def read_lines(path: PathLike) -> List[str]:
    """Split on ``\\n`` only (a trailing newline does not add a line)."""
    text = read_text(path)
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return [ln[:-1] if ln.endswith("\r") else ln for ln in lines]


def load_texts(path: PathLike) -> List[TokenText]:
    return [tokenize(ln) for ln in read_lines(path)]


def load_labeled_corpus(texts_path: PathLike, labels_path: PathLike) -> LabeledCorpus:
    texts = load_texts(texts_path)
    names = read_lines(labels_path)
    if len(texts) != len(names):
        raise DataError(
            f"line count mismatch: {len(texts)} texts vs {len(names)} labels"
        )
    order: Dict[str, int] = {}
    for lineno, name in enumerate(names, 1):
        name = name.strip()
        if not name:
            raise DataError(f"{labels_path}:{lineno}: empty label")
        order.setdefault(name, len(order))
    styles = make_styles(list(order))
    labels = tuple(styles[order[n.strip()]] for n in names)
    return LabeledCorpus(tuple(texts), labels, styles)


def load_pairs(
    path: PathLike, styles: Optional[Sequence[StyleLabel]] = None
) -> List[TransferPair]:
    """Read ``input\\toutput\\tsource\\ttarget`` lines.

    When ``styles`` is given, style names are resolved against it; otherwise an
    inventory is built in first-appearance order (source before target).
    """
    rows = []
    for lineno, line in enumerate(read_lines(path), 1):
        cols = line.split("\t")
        if len(cols) != 4:
            raise DataError(f"{path}:{lineno}: expected 4 columns, got {len(cols)}")
        if cols[2].strip() == cols[3].strip():
            raise DataError(f"{path}:{lineno}: source equals target ({cols[2]!r})")
        rows.append(cols)

    if styles is None:
        order: Dict[str, int] = {}
        for cols in rows:
            for name in (cols[2].strip(), cols[3].strip()):
                if not name:
                    raise DataError(f"{path}: empty style name")
                order.setdefault(name, len(order))
        styles = make_styles(list(order))

    return [
        TransferPair(
            tokenize(cols[0]),
            tokenize(cols[1]),
            style_by_name(styles, cols[2].strip()),
            style_by_name(styles, cols[3].strip()),
        )
        for cols in rows
    ]


def load_embeddings(path: PathLike) -> EmbeddingTable:
    entries: Dict[str, np.ndarray] = {}
    dim = None
    for lineno, line in enumerate(read_lines(path), 1):
        parts = line.split()
        if not parts:
            continue
        token, comps = parts[0], parts[1:]
        if dim is None:
            dim = len(comps)
            if dim == 0:
                raise DataError(f"{path}:{lineno}: no vector components")
        elif len(comps) != dim:
            raise DataError(
                f"{path}:{lineno}: dimension mismatch ({len(comps)} != {dim})"
            )
        try:
            vec = np.array([float(c) for c in comps], dtype=np.float64)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric component") from exc
        if not np.all(np.isfinite(vec)):
            raise DataError(f"{path}:{lineno}: non-finite component")
        if token not in entries:
            vec.setflags(write=False)
            entries[token] = vec
    if dim is None:
        raise DataError(f"{path}: empty embeddings file")
    return EmbeddingTable(dim, entries)


def load_ratings(path: PathLike, kind: str = ORDINAL) -> RatingsTable:
    if kind not in (ORDINAL, BINARY):
        raise DataError(f"unknown ratings kind {kind!r}")
    reader = csv.reader(io.StringIO(read_text(path)))
    rows = [r for r in reader if r]
    if not rows:
        raise DataError(f"{path}: empty ratings file")
    header, body = rows[0], rows[1:]
    n_raters = len(header) - 1
    if n_raters < 1:
        raise DataError(f"{path}: header needs item column and >=1 rater")
    if not body:
        raise DataError(f"{path}: no rating rows")

    items, values = [], []
    for lineno, row in enumerate(body, 2):
        if len(row) != n_raters + 1 or any(c.strip() == "" for c in row):
            raise DataError(f"{path}:{lineno}: missing cell")
        items.append(row[0].strip())
        cells = [c.strip() for c in row[1:]]
        if kind == ORDINAL:
            try:
                scores = [int(c) for c in cells]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-integer score") from exc
            bad = [s for s in scores if not 1 <= s <= 5]
            if bad:
                raise DataError(f"{path}:{lineno}: score {bad[0]} outside 1..5")
            values.append(scores)
        else:
            cells = [c.lower() for c in cells]
            bad = [c for c in cells if c not in BINARY_CHOICES]
            if bad:
                raise DataError(f"{path}:{lineno}: unknown choice {bad[0]!r}")
            values.append(cells)

    arr = np.array(values, dtype=np.int64 if kind == ORDINAL else object)
    return RatingsTable(tuple(items), arr, kind)

