"""Command-line interface.

Exit codes: 0 on success, 2 for usage or input errors, 1 for internal errors.
Every command is deterministic given its inputs and ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import traceback
import warnings
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__
from .content import MASKED, METRICS, MODES, evaluate_cp
from .corpus import (
    BINARY,
    ORDINAL,
    DataError,
    load_embeddings,
    load_labeled_corpus,
    load_pairs,
    load_ratings,
    load_texts,
    make_styles,
    read_text,
)
from .harness import FlipModel, build_tradeoff, emit_plot, synthesize_transfer
from .lexicon import (
    StyleLexicon,
    TrainConfig,
    extract_lexicon,
    mask_style,
    remove_style,
    train_style_classifier,
)
from .naturalness import (
    INPUT,
    OUTPUT,
    agreement,
    decide_all,
    majority_choices,
    perplexity,
    train_adversarial_classifier,
    train_ngram_lm,
)
from .stats import NATURAL, average_raters, bin_absolute, fleiss_kappa, pearson
from .style_eval import corpus_sti, load_distributions, sti, target_style_rate

log = logging.getLogger("tsteval")

DEFAULT_SEED = 17


class UsageError(Exception):
    """Bad flag combination detected after argument parsing."""


# -- output helpers ---------------------------------------------------------


def _num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def write_json(doc: dict, path: Optional[Path]) -> None:
    text = json.dumps({k: _num(v) for k, v in doc.items()}, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])


def _prefix_path(prefix: str, suffix: str) -> Path:
    p = Path(prefix)
    return p.parent / f"{p.name}{suffix}"


def _train_cfg(args) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.lr, epochs=args.epochs, l2=args.l2, seed=args.seed
    )


# -- commands ---------------------------------------------------------------


def cmd_build_lexicon(args) -> None:
    corpus = load_labeled_corpus(args.corpus, args.labels)
    model = train_style_classifier(corpus, _train_cfg(args))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lex = extract_lexicon(model, args.k)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    lex.save(args.out)


def cmd_mask(args) -> None:
    lex = StyleLexicon.load(args.lexicon)
    op = mask_style if args.mode == "mask" else remove_style
    out = Path(args.out)
    if args.pairs:
        pairs = load_pairs(args.pairs)
        lines = [
            "\t".join((str(op(p.input, lex)), str(op(p.output, lex)), p.source_style.name, p.target_style.name))
            for p in pairs
        ]
    else:
        lines = [str(op(t, lex)) for t in load_texts(args.corpus)]
    out.write_text("".join(ln + "\n" for ln in lines), encoding="utf-8")


def _eval_sti(args, pairs):
    if args.corpus and args.labels:
        corpus = load_labeled_corpus(args.corpus, args.labels)
        model = train_style_classifier(corpus, _train_cfg(args))
        pairs = load_pairs(args.pairs, corpus.styles)
        result = corpus_sti(pairs, model)
        summary = {"mean": result.mean, "count": len(pairs),
                   "target_style_rate": target_style_rate(pairs, model)}
        return [(str(i), s) for i, s in enumerate(result.scores)], summary
    if args.sc_input and args.sc_output:
        if not args.styles:
            raise UsageError("--sc-input/--sc-output need --styles (ordered style names)")
        styles = make_styles(args.styles.split(","))
        pairs = load_pairs(args.pairs, styles)
        dist_in = load_distributions(args.sc_input, styles)
        dist_out = load_distributions(args.sc_output, styles)
        rows = []
        for i, p in enumerate(pairs):
            key = str(i)
            if key not in dist_in or key not in dist_out:
                raise DataError(f"no style distribution for pair_id {key}")
            rows.append((key, sti(dist_in[key], dist_out[key], p.target_style)))
        scores = [s for _, s in rows]
        summary = {"mean": math.fsum(scores) / len(scores), "count": len(scores)}
        return rows, summary
    raise UsageError("sti needs --corpus/--labels or --sc-input/--sc-output")


def cmd_eval(args) -> None:
    pairs = load_pairs(args.pairs)
    if not pairs:
        raise DataError(f"{args.pairs}: no pairs")
    csv_path = _prefix_path(args.report, ".csv")
    json_path = _prefix_path(args.report, ".json")

    if args.aspect == "sti":
        rows, summary = _eval_sti(args, pairs)
        write_csv(csv_path, ["pair_id", "sti"], rows)
        write_json({"aspect": "sti", **summary}, json_path)

    elif args.aspect == "cp":
        lex = StyleLexicon.load(args.lexicon) if args.lexicon else None
        if args.mode != "unmodified" and lex is None:
            raise UsageError(f"--mode {args.mode} needs --lexicon")
        spec = METRICS[args.metric]
        if spec.needs_embeddings and not args.embeddings:
            raise UsageError(f"--metric {args.metric} needs --embeddings")
        emb = load_embeddings(args.embeddings) if args.embeddings else None
        res = evaluate_cp(pairs, lex, args.mode, args.metric, emb, args.exclude_degenerate)
        write_csv(
            csv_path,
            ["pair_id", "metric", "mode", "score"],
            [(str(i), res.metric, res.mode, s) for i, s in enumerate(res.scores)],
        )
        write_json(
            {"aspect": "cp", "metric": res.metric, "mode": res.mode,
             "orientation": res.orientation, "mean": res.mean,
             "count": res.count, "degenerate": res.degenerate},
            json_path,
        )

    else:
        if not args.inputs_for_classifier:
            raise UsageError("nt needs --inputs-for-classifier")
        human = load_texts(args.inputs_for_classifier)
        clf = train_adversarial_classifier(human, [p.output for p in pairs], _train_cfg(args))
        decisions = decide_all(clf, pairs)
        write_csv(
            csv_path,
            ["pair_id", "winner", "margin", "p_human_input", "p_human_output"],
            [(str(i), d.winner, d.margin, d.p_input, d.p_output) for i, d in enumerate(decisions)],
        )
        summary = {
            "aspect": "nt",
            "count": len(decisions),
            "output_more_natural_rate": sum(d.winner == OUTPUT for d in decisions) / len(decisions),
        }
        if args.lm_corpus:
            lm = train_ngram_lm(load_texts(args.lm_corpus), order=args.lm_order)
            ppl = [perplexity(lm, p.output) for p in pairs]
            write_csv(_prefix_path(args.report, "_ppl.csv"), ["text_id", "ppl"],
                      [(str(i), v) for i, v in enumerate(ppl)])
            summary["mean_perplexity"] = math.fsum(ppl) / len(ppl)
        write_json(summary, json_path)


def _read_metric_column(path, column: str) -> Dict[str, str]:
    rows = list(csv.reader(read_text(path).splitlines()))
    if not rows:
        raise DataError(f"{path}: empty metric file")
    header = [h.strip() for h in rows[0]]
    if column not in header:
        raise DataError(f"{path}: no column {column!r} (have {header})")
    col = header.index(column)
    out = {}
    for lineno, row in enumerate(rows[1:], 2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} columns")
        out[row[0].strip()] = row[col].strip()
    return out


def _joined(items, values: Dict[str, str], path) -> List[str]:
    missing = [i for i in items if i not in values]
    if missing:
        raise DataError(f"{path}: no metric value for item {missing[0]!r}")
    return [values[i] for i in items]


def _human_choices(ratings, tau: Optional[int]):
    if ratings.kind == BINARY:
        return majority_choices(ratings.values.tolist())
    if tau is None:
        raise UsageError("agreement on ordinal ratings needs --tau")
    binned = bin_absolute(ratings.values, tau)
    return majority_choices([[OUTPUT if v == NATURAL else INPUT for v in row] for row in binned])


def cmd_stats(args) -> None:
    ratings = load_ratings(args.ratings, args.kind)
    out = Path(args.out) if args.out else None

    if args.stat == "kappa":
        values = ratings.values
        if args.tau is not None:
            if ratings.kind != ORDINAL:
                raise UsageError("--tau applies to ordinal ratings only")
            values = bin_absolute(values, args.tau)
        res = fleiss_kappa(values)
        write_json(
            {"statistic": "fleiss_kappa", "value": res.kappa, "halfwidth": None,
             "n": len(ratings.items), "degenerate": res.degenerate, "tau": args.tau},
            out,
        )
        return

    if not args.metric_scores:
        raise UsageError(f"--stat {args.stat} needs --metric-scores")

    if args.stat == "pearson":
        if ratings.kind != ORDINAL:
            raise UsageError("pearson needs ordinal ratings")
        column = args.column or "score"
        raw = _joined(ratings.items, _read_metric_column(args.metric_scores, column), args.metric_scores)
        try:
            metric = [float(v) for v in raw]
        except ValueError as exc:
            raise DataError(f"{args.metric_scores}: non-numeric {column!r} value") from exc
        res = pearson(metric, average_raters(ratings), absolute=args.absolute,
                      bootstrap_n=args.bootstrap_n, seed=args.seed)
        write_json(
            {"statistic": "abs_pearson" if args.absolute else "pearson", "value": res.r,
             "halfwidth": res.halfwidth, "n": res.n, "p_value": res.p_value},
            out,
        )
        return

    column = args.column or "winner"
    machine = _joined(ratings.items, _read_metric_column(args.metric_scores, column), args.metric_scores)
    human = _human_choices(ratings, args.tau)
    write_json(
        {"statistic": "agreement", "value": agreement(machine, human),
         "halfwidth": None, "n": len(human)},
        out,
    )


def _flip_label(p: float) -> str:
    return f"p{p:g}"


def cmd_synth(args) -> None:
    corpus = load_labeled_corpus(args.corpus, args.labels)
    lex = StyleLexicon.load(args.lexicon)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for p in args.p:
        pairs = synthesize_transfer(corpus, FlipModel(lex, p, args.seed))
        lines = [
            "\t".join((str(x.input), str(x.output), x.source_style.name, x.target_style.name))
            for x in pairs
        ]
        (out / f"{_flip_label(p)}.tsv").write_text("".join(ln + "\n" for ln in lines), encoding="utf-8")


def cmd_tradeoff(args) -> None:
    run_dir = Path(args.runs)
    if not run_dir.is_dir():
        raise DataError(f"{run_dir}: not a directory")
    files = sorted(run_dir.glob("*.tsv"))
    if not files:
        raise DataError(f"{run_dir}: no *.tsv run files")
    corpus = load_labeled_corpus(args.corpus, args.labels)
    cfg = _train_cfg(args)
    sc = train_style_classifier(corpus, cfg)
    lex = StyleLexicon.load(args.lexicon)
    emb = load_embeddings(args.embeddings)
    runs = [(f.stem, load_pairs(f, corpus.styles)) for f in files]
    for f, (_, pairs) in zip(files, runs):
        if not pairs:
            raise DataError(f"{f}: no pairs")
    human = load_texts(args.inputs_for_classifier) if args.inputs_for_classifier else None
    points = build_tradeoff(runs, sc, lex, emb, human, cfg, args.cp_mode)
    emit_plot(points, args.out)


# -- parser -----------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, training: bool = False) -> None:
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=1,
                   help="accepted for reproducible configs; results never depend on it")
    if training:
        p.add_argument("--lr", type=float, default=0.1)
        p.add_argument("--epochs", type=int, default=200)
        p.add_argument("--l2", type=float, default=1e-4)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsteval", description="Evaluate text style transfer outputs."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-lexicon", help="train a style classifier and extract a lexicon")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--k", type=int, default=100, help="words per style")
    p.add_argument("--out", required=True)
    _add_common(p, training=True)
    p.set_defaults(func=cmd_build_lexicon)

    p = sub.add_parser("mask", help="mask or remove style words")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--pairs")
    src.add_argument("--corpus")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--mode", choices=["mask", "remove"], default="mask")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("eval", help="score transfer pairs on one aspect")
    p.add_argument("--pairs", required=True)
    p.add_argument("--aspect", choices=["sti", "cp", "nt"], required=True)
    p.add_argument("--report", required=True, help="output prefix for .csv and .json")
    p.add_argument("--corpus", help="sti: labeled texts for the style classifier")
    p.add_argument("--labels")
    p.add_argument("--sc-input", help="sti: precomputed distributions of inputs")
    p.add_argument("--sc-output", help="sti: precomputed distributions of outputs")
    p.add_argument("--styles", help="sti: comma-separated style names in column order")
    p.add_argument("--metric", choices=sorted(METRICS), default="wmd")
    p.add_argument("--mode", choices=MODES, default=MASKED)
    p.add_argument("--lexicon")
    p.add_argument("--embeddings")
    p.add_argument("--exclude-degenerate", action="store_true")
    p.add_argument("--inputs-for-classifier", help="nt: human-written texts")
    p.add_argument("--lm-corpus", help="nt: corpus for the perplexity baseline")
    p.add_argument("--lm-order", type=int, default=3)
    _add_common(p, training=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="kappa, correlation or agreement against ratings")
    p.add_argument("--ratings", required=True)
    p.add_argument("--kind", choices=[ORDINAL, BINARY], default=ORDINAL)
    p.add_argument("--stat", choices=["kappa", "pearson", "agreement"], required=True)
    p.add_argument("--tau", type=int)
    p.add_argument("--metric-scores")
    p.add_argument("--column", help="metric column (default: score / winner)")
    p.add_argument("--absolute", action="store_true")
    p.add_argument("--bootstrap-n", type=int, default=1000)
    p.add_argument("--out")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="write lexicon-flip transfer runs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--p", type=float, nargs="+", default=[0.0, 0.25, 0.5, 0.75, 1.0])
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("tradeoff", help="tradeoff CSV and SVG plots over run files")
    p.add_argument("--runs", required=True, help="directory of pair TSV files, one per run")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--inputs-for-classifier")
    p.add_argument("--cp-mode", choices=MODES, default=MASKED)
    p.add_argument("--out", required=True, help="output prefix")
    _add_common(p, training=True)
    p.set_defaults(func=cmd_tradeoff)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"tsteval: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError, OSError) as exc:
        print(f"tsteval: error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
