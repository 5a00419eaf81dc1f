import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsteval.corpus import DataError, LabeledCorpus, from_tokens, make_styles
from tsteval.harness import synthetic_corpus
from tsteval.lexicon import (
    PLACEHOLDER,
    LinearModel,
    StyleLexicon,
    TrainConfig,
    extract_lexicon,
    lexicon_from_words,
    mask_style,
    remove_style,
    train_style_classifier,
)


def corpus_of(rows):
    styles = make_styles(sorted({lab for _, lab in rows}))
    by_name = {s.name: s for s in styles}
    return LabeledCorpus(
        tuple(from_tokens(t.split()) for t, _ in rows),
        tuple(by_name[lab] for _, lab in rows),
        styles,
    )


@pytest.fixture(scope="module")
def good_bad():
    rng = np.random.default_rng(5)
    filler = ["food", "service", "place", "the", "was", "staff"]
    rows = []
    for lab, cue in (("negative", "bad"), ("positive", "good")):
        for _ in range(50):
            words = list(rng.choice(filler, 4)) + [cue]
            rng.shuffle(words)
            rows.append((" ".join(words), lab))
    return corpus_of(rows)


def test_separable_corpus_fits(good_bad):
    model = train_style_classifier(good_bad)
    assert model.accuracy(good_bad.texts, [lab.id for lab in good_bad.labels]) == 1.0


def test_loss_non_increasing(good_bad):
    h = np.array(train_style_classifier(good_bad).loss_history)
    assert len(h) > 1
    assert np.all(np.diff(h) <= 0)


def test_balanced_duplicates_give_uniform():
    corpus = corpus_of([("same text", "a"), ("same text", "b")] * 5)
    model = train_style_classifier(corpus)
    np.testing.assert_allclose(model.predict_proba(corpus.texts[:1])[0], [0.5, 0.5], atol=1e-12)
    assert model.loss_history[-1] == pytest.approx(np.log(2), abs=1e-12)


def test_training_is_deterministic(good_bad):
    a = train_style_classifier(good_bad, TrainConfig(seed=1))
    b = train_style_classifier(good_bad, TrainConfig(seed=2))
    np.testing.assert_array_equal(a.weights, b.weights)
    np.testing.assert_array_equal(a.bias, b.bias)


def test_single_class_rejected():
    with pytest.raises(DataError, match="two distinct labels"):
        train_style_classifier(corpus_of([("x", "a"), ("y", "a")]))


def test_empty_vocabulary_rejected():
    with pytest.raises(DataError):
        train_style_classifier(corpus_of([("", "a"), ("", "b")]))


@pytest.mark.parametrize("kw", [dict(learning_rate=0), dict(epochs=0), dict(l2=-1), dict(convergence_tol=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        TrainConfig(**kw)


def test_good_bad_lexicon(good_bad):
    lex = extract_lexicon(train_style_classifier(good_bad), k=1)
    assert lex.words_for("positive") == ["good"]
    assert lex.words_for("negative") == ["bad"]


def test_planted_strong_positive_word():
    rows = [("the food was mouthwatering", "positive")] * 20 + [("the food was bland", "negative")] * 20
    rows += [("the service was fine", "positive"), ("the service was fine", "negative")] * 5
    lex = extract_lexicon(train_style_classifier(corpus_of(rows)), k=3)
    assert "mouthwatering" in lex.words_for("positive")
    assert lex.style_of("bland") == "negative"


def test_k_zero_is_empty(good_bad):
    lex = extract_lexicon(train_style_classifier(good_bad), k=0)
    assert lex.words == frozenset()


def test_k_beyond_vocabulary_warns(good_bad):
    model = train_style_classifier(good_bad)
    with pytest.warns(UserWarning, match="clamped"):
        lex = extract_lexicon(model, k=10_000)
    assert lex.k == len(model.vocabulary)


def model_from(weights, tokens, names=("negative", "positive")):
    return LinearModel(
        {t: i for i, t in enumerate(tokens)},
        np.asarray(weights, dtype=float),
        np.zeros(len(names)),
        make_styles(list(names)),
    )


def test_ties_break_lexicographically():
    model = model_from([[0, 0, 0], [1, 1, 1]], ["c", "a", "b"])
    assert extract_lexicon(model, k=2).words_for("positive") == ["a", "b"]


def test_zero_magnitude_features_excluded():
    model = model_from([[0, 1], [0, 0]], ["flat", "neg"])
    lex = extract_lexicon(model, k=2)
    assert lex.words == {"neg"}


@settings(max_examples=50, deadline=None)
@given(
    w=st.lists(st.floats(-5, 5, allow_subnormal=False), min_size=12, max_size=12),
    c=st.floats(0.01, 100),
    k=st.integers(0, 6),
)
def test_extraction_invariant_to_positive_rescale(w, c, k):
    tokens = [f"t{i}" for i in range(6)]
    W = np.array(w).reshape(2, 6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = extract_lexicon(model_from(W, tokens), k)
        b = extract_lexicon(model_from(W * c, tokens), k)
    # exact float ties can split differently after scaling; compare membership
    if len(set(np.round(np.abs(W[1] - W[0]), 9))) == 6:
        assert {s: a.words_for(s) for s in a.styles} == {s: b.words_for(s) for s in b.styles}


def test_label_swap_swaps_assignments():
    corpus, _ = synthetic_corpus(n_per_class=60, n_style=5, n_neutral=30, seed=3)
    swapped = LabeledCorpus(
        corpus.texts,
        tuple(corpus.styles[1 - lab.id] for lab in corpus.labels),
        corpus.styles,
    )
    a = extract_lexicon(train_style_classifier(corpus), k=5)
    b = extract_lexicon(train_style_classifier(swapped), k=5)
    assert a.words_for("negative") == b.words_for("positive")
    assert a.words_for("positive") == b.words_for("negative")


def test_json_round_trip(tmp_path, good_bad):
    lex = extract_lexicon(train_style_classifier(good_bad), k=3)
    path = tmp_path / "lex.json"
    lex.save(path)
    doc = json.loads(path.read_text())
    assert doc["placeholder"] == "<customstyle>"
    back = StyleLexicon.load(path)
    assert back.styles == lex.styles


def test_lexicon_invariants():
    with pytest.raises(ValueError, match="listed under"):
        lexicon_from_words({"a": ["x"], "b": ["x"]})
    with pytest.raises(ValueError, match="placeholder"):
        lexicon_from_words({"a": [PLACEHOLDER]})


def test_malformed_lexicon_file(tmp_path):
    p = tmp_path / "lex.json"
    p.write_text('{"styles": 3}')
    with pytest.raises(DataError):
        StyleLexicon.load(p)


def test_girls_example_rows(girls_lexicon, girls_texts):
    x = girls_texts[0]
    assert str(mask_style(x, girls_lexicon)) == "the girls up front <customstyle> ."
    assert str(remove_style(x, girls_lexicon)) == "the girls up front ."


def test_disjoint_text_unchanged(girls_lexicon):
    t = from_tokens(["nothing", "here"])
    assert mask_style(t, girls_lexicon) == t
    assert remove_style(t, girls_lexicon) == t


def test_only_style_words_removed_to_empty(girls_lexicon):
    assert remove_style(from_tokens(["amazing", "incompetent"]), girls_lexicon).tokens == ()


words = st.sampled_from(["a", "b", "c", "d", "e", "f"])


@given(st.lists(words, max_size=15), st.sets(words), st.sets(words))
def test_mask_and_remove_properties(tokens, s1, s2):
    lex = lexicon_from_words({"x": sorted(s1), "y": sorted(s2 - s1)})
    t = from_tokens(tokens)
    m, r = mask_style(t, lex), remove_style(t, lex)
    assert len(m) == len(t)
    assert len(r) == len(t) - sum(w in lex.words for w in tokens)
    assert mask_style(m, lex) == m
    kept = [w for w in tokens if w not in lex.words]
    assert list(r.tokens) == kept
    assert [w for w in m.tokens if w != PLACEHOLDER] == kept
