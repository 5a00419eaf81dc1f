import numpy as np
import pytest

from tsteval.corpus import EmbeddingTable, make_styles, tokenize
from tsteval.lexicon import lexicon_from_words

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0][2:])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}")


@pytest.fixture
def styles():
    return make_styles(["negative", "positive"])


@pytest.fixture
def girls_lexicon():
    return lexicon_from_words({"negative": ["incompetent"], "positive": ["amazing"]})


@pytest.fixture
def girls_texts():
    return (
        tokenize("the girls up front incompetent ."),
        tokenize("the girls up front are amazing ."),
    )


def make_table(vectors):
    entries = {}
    for tok, vec in vectors.items():
        arr = np.asarray(vec, dtype=np.float64)
        arr.setflags(write=False)
        entries[tok] = arr
    dim = len(next(iter(entries.values())))
    return EmbeddingTable(dim, entries)


@pytest.fixture
def plane_embeddings():
    return make_table({
        "u": [1.0, 0.0],
        "v": [0.0, 1.0],
        "w": [0.0, 1.0],
        "x": [0.6, 0.8],
        "y": [-1.0, 0.5],
        "z": [0.3, -0.7],
    })


def write_cli_fixture(root, n_per_class=40, seed=4):
    """Synthetic corpus, embeddings and pair files on disk for CLI runs."""
    from tsteval.harness import synthetic_corpus, synthetic_embeddings

    corpus, planted = synthetic_corpus(n_per_class=n_per_class, n_style=8, n_neutral=40, seed=seed)
    root.mkdir(parents=True, exist_ok=True)
    (root / "texts.txt").write_text("".join(f"{t}\n" for t in corpus.texts))
    (root / "labels.txt").write_text("".join(f"{lab.name}\n" for lab in corpus.labels))
    tokens = [w for t in corpus.texts for w in t.tokens]
    E = synthetic_embeddings(tokens, dim=8)
    (root / "emb.txt").write_text(
        "".join(f"{w} {' '.join(repr(float(x)) for x in E[w])}\n" for w in sorted(E.entries))
    )
    return root


@pytest.fixture(scope="session")
def cli_data(tmp_path_factory):
    return write_cli_fixture(tmp_path_factory.mktemp("cli"))
