"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric divergence.
"""

import argparse
import json
import os
import sys

from . import cooccur as cooccur_mod
from . import demo, evaluation, network, pipeline
from .corpus import Vocabulary, build_vocabulary, stream_sentences
from .embeddings import load_text_embeddings, nearest_neighbors, save_text_embeddings
from .errors import DivergenceError, RweError
from .pipeline import atomic_write
from .relvec import RelationVectorStore, build_relation_store, collect_middle_bags


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _emit_metrics(metrics, json_path=None):
    """TSV metrics block on stdout, optional JSON report file."""
    flat = {k: v for k, v in metrics.items() if isinstance(v, (int, float))}
    for key, value in flat.items():
        print(f"{key}\t{value:.6f}" if isinstance(value, float) else f"{key}\t{value}")
    if json_path:
        with atomic_write(json_path) as tmp:
            with open(tmp, "w", encoding="utf-8") as sink:
                json.dump(metrics, sink, indent=2, default=str)


def _default_threads():
    return int(os.environ.get("RWE_THREADS", "1"))


# ---------------------------------------------------------------------------
# stage commands


def cmd_vocab(args):
    vocab = build_vocabulary(
        stream_sentences(args.corpus, lowercase=args.lowercase),
        max_size=args.max_size, min_count=args.min_count,
    )
    with atomic_write(args.out) as tmp:
        vocab.save(tmp)
    print(f"words\t{len(vocab)}")


def cmd_cooccur(args):
    vocab = Vocabulary.load(args.vocab)
    table = cooccur_mod.count_cooccurrences(
        stream_sentences(args.corpus, lowercase=args.lowercase),
        vocab, window=args.window, threads=args.threads,
    )
    with atomic_write(args.out) as tmp:
        cooccur_mod.save_table(table, tmp)
    print(f"pairs\t{len(table)}")


def cmd_pairs(args):
    vocab = Vocabulary.load(args.vocab)
    table = cooccur_mod.load_table(args.table, vocab)
    pairs = cooccur_mod.select_related_pairs(table, top_k=args.top_k, min_raw=args.min_raw)
    with atomic_write(args.out) as tmp:
        pairs.save(tmp)
    print(f"pairs\t{len(pairs)}")


def cmd_relvec(args):
    vocab = Vocabulary.load(args.vocab)
    pairs = cooccur_mod.RelatedPairSet.load(args.pairs, vocab)
    standard = load_text_embeddings(args.vectors)
    bags = collect_middle_bags(
        stream_sentences(args.corpus, lowercase=args.lowercase), pairs, args.window
    )
    store, drops = build_relation_store(pairs, bags, standard)
    with atomic_write(args.out) as tmp:
        store.save(tmp)
    print(f"vectors\t{len(store)}")
    for reason, count in sorted(drops.items()):
        print(f"dropped[{reason}]\t{count}")


def cmd_train(args):
    store = RelationVectorStore.load(args.relvecs)
    standard = load_text_embeddings(args.init_vectors)
    words = sorted({w for pair in store.pairs() for w in pair if w in standard})
    model = network.init_model(
        standard, words, hidden=args.hidden, seed=args.seed,
        output_activation=args.output_activation,
    )
    config = network.TrainConfig(
        learning_rate=args.lr, batch_size=args.batch, max_epochs=args.epochs,
        patience=args.patience, dev_fraction=args.dev_frac, seed=args.seed,
        output_activation=args.output_activation,
    )
    history = network.train(model, store, config)
    with atomic_write(args.out) as tmp:
        network.save_checkpoint(model, tmp, seed=args.seed)
    print(f"epochs\t{len(history['train'])}")
    print(f"best_epoch\t{history['best_epoch']}")
    print(f"best_dev_loss\t{history['dev'][history['best_epoch']]:.6f}")


def cmd_export(args):
    model, _seed = network.load_checkpoint(args.checkpoint)
    store = network.export_relational_embeddings(model)
    with atomic_write(args.out) as tmp:
        save_text_embeddings(store, tmp)
    print(f"words\t{len(store)}")


# ---------------------------------------------------------------------------
# query commands


def cmd_nn(args):
    store = load_text_embeddings(args.vectors)
    for rank, (word, score) in enumerate(nearest_neighbors(store, args.word, k=args.k), 1):
        print(f"{rank}\t{word}\t{score:.6f}")


def cmd_pair_nn(args):
    standard = load_text_embeddings(args.standard) if args.standard else None
    relational = load_text_embeddings(args.relational) if args.relational else None
    w, v = args.pair.split(",")
    candidates = []
    with open(args.candidates, encoding="utf-8") as source:
        for line in source:
            parts = line.rstrip("\n").split("\t")
            if len(parts) >= 2:
                candidates.append((parts[0], parts[1]))
    results = evaluation.relation_knn(
        standard, relational, (w, v), candidates, k=args.k,
        exclude_shared_word=args.exclude_shared_word, mode=args.mode,
    )
    for rank, ((a, b), score) in enumerate(results, 1):
        print(f"{rank}\t{a}\t{b}\t{score:.6f}")


# ---------------------------------------------------------------------------
# evaluation commands


def cmd_eval_cls(args):
    standard = load_text_embeddings(args.standard)
    relational = load_text_embeddings(args.relational) if args.relational else standard
    if args.data:
        dataset = evaluation.LabeledPairDataset.load(args.data)
        metrics = evaluation.cross_validate(
            dataset, args.folds, args.scheme, standard, relational, seed=args.seed
        )
    elif args.train and args.test:
        metrics = evaluation.evaluate_split(
            evaluation.LabeledPairDataset.load(args.train),
            evaluation.LabeledPairDataset.load(args.test),
            args.scheme, standard, relational,
        )
    else:
        raise SystemExit(1)
    _emit_metrics(metrics, args.json)


def cmd_eval_word(args):
    standard = load_text_embeddings(args.standard)
    relational = load_text_embeddings(args.relational) if args.relational else standard
    dataset = evaluation.LabeledWordDataset.load(args.data)
    metrics = evaluation.cross_validate_words(
        dataset, args.folds, standard, relational, seed=args.seed,
        relational_only=args.relational_only,
    )
    _emit_metrics(metrics, args.json)


def cmd_eval_reg(args):
    standard = load_text_embeddings(args.standard)
    relational = load_text_embeddings(args.relational) if args.relational else standard
    train_ds = evaluation.ScoredPairDataset.load(args.train)
    test_ds = evaluation.ScoredPairDataset.load(args.test)

    def encode(dataset):
        feats, gold = [], []
        dropped = 0
        for w1, w2, score in dataset.records:
            try:
                feats.append(
                    evaluation.encode_word_pair(args.scheme, standard, relational, w1, w2)
                )
            except RweError:
                dropped += 1
                continue
            gold.append(score)
        return feats, gold, dropped

    ftr, ytr, dtr = encode(train_ds)
    fte, yte, dte = encode(test_ds)
    model = evaluation.train_linear_regressor(ftr, ytr)
    pred = model.predict(fte)
    metrics = evaluation.regression_metrics(yte, pred)
    metrics["report"] = {"train_dropped": dtr, "test_dropped": dte,
                         "train_kept": len(ytr), "test_kept": len(yte)}
    _emit_metrics(metrics, args.json)


def cmd_eval_qvec(args):
    store = load_text_embeddings(args.vectors)
    properties = evaluation.PropertyMatrix.load(args.properties)
    report = {}
    score = evaluation.qvec_score(store, properties, report=report)
    metrics = {"qvec": score, "report": report}
    _emit_metrics(metrics, args.json)


# ---------------------------------------------------------------------------
# pipeline + demo


def cmd_pipeline(args):
    overrides = {}
    for item in args.set or []:
        key, _, value = item.partition("=")
        overrides[key] = value
    if args.threads is not None:
        overrides["pipeline.threads"] = args.threads
    config = pipeline.load_config(args.config, overrides)
    report = pipeline.run_pipeline(config, from_stage=args.from_stage, to_stage=args.to_stage)
    for entry in report["stages"]:
        counts = " ".join(f"{k}={v}" for k, v in entry["counts"].items() if not isinstance(v, dict))
        print(f"{entry['stage']}\t{entry['wall_seconds']:.2f}s\t{counts}")


def cmd_demo(args):
    os.makedirs(args.out_dir, exist_ok=True)
    corpus = os.path.join(args.out_dir, "demo_corpus.txt")
    vectors = os.path.join(args.out_dir, "demo_vectors.txt")
    dataset = os.path.join(args.out_dir, "demo_pairs.tsv")
    n_lines = demo.write_demo_corpus(corpus, seed=args.seed)
    n_words = demo.write_demo_vectors(corpus, vectors, dim=args.dim, seed=args.seed)
    n_pairs = demo.write_demo_pair_dataset(dataset)
    print(f"sentences\t{n_lines}")
    print(f"vector_words\t{n_words}")
    print(f"dataset_pairs\t{n_pairs}")


# ---------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="rwe", description="Relational word embeddings pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vocab", help="build the vocabulary")
    p.add_argument("--corpus", required=True)
    p.add_argument("--max-size", type=int, default=100_000)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("cooccur", help="count co-occurrences")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cooccur)

    p = sub.add_parser("pairs", help="select the related pair set")
    p.add_argument("--table", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--top-k", type=int, default=100)
    p.add_argument("--min-raw", type=int, default=25)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("relvec", help="build relation vectors")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_relvec)

    p = sub.add_parser("train", help="train the relational embedding network")
    p.add_argument("--relvecs", required=True)
    p.add_argument("--init-vectors", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--hidden", type=int, default=None,
                   help="hidden size (default: twice the embedding dim, 600 for 300-d)")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch", type=int, default=512)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--dev-frac", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-activation", choices=("relu", "identity"), default="relu")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("export", help="export the trained embedding table")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("nn", help="nearest neighbors of a word")
    p.add_argument("--vectors", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_nn)

    p = sub.add_parser("pair-nn", help="nearest neighbors of a relation encoding")
    p.add_argument("--pair", required=True, metavar="W,V")
    p.add_argument("--candidates", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--exclude-shared-word", action="store_true")
    p.add_argument("--mode", choices=("relational", "standard-diff"), default="relational")
    p.add_argument("--relational")
    p.add_argument("--standard")
    p.set_defaults(func=cmd_pair_nn)

    p = sub.add_parser("eval-cls", help="relation classification")
    p.add_argument("--data", help="dataset for cross-validation")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--train", help="train split (alternative to --data)")
    p.add_argument("--test", help="test split")
    p.add_argument("--scheme", choices=evaluation.SCHEMES, default="multavg")
    p.add_argument("--standard", required=True)
    p.add_argument("--relational")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json")
    p.set_defaults(func=cmd_eval_cls)

    p = sub.add_parser("eval-word", help="word-feature classification")
    p.add_argument("--data", required=True)
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--standard", required=True)
    p.add_argument("--relational")
    p.add_argument("--relational-only", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json")
    p.set_defaults(func=cmd_eval_word)

    p = sub.add_parser("eval-reg", help="scored-pair regression")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--scheme", choices=evaluation.SCHEMES, default="multavg")
    p.add_argument("--standard", required=True)
    p.add_argument("--relational")
    p.add_argument("--json")
    p.set_defaults(func=cmd_eval_reg)

    p = sub.add_parser("eval-qvec", help="QVEC property-alignment score")
    p.add_argument("--vectors", required=True)
    p.add_argument("--properties", required=True)
    p.add_argument("--json")
    p.set_defaults(func=cmd_eval_qvec)

    p = sub.add_parser("pipeline", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--from", dest="from_stage", default="vocab")
    p.add_argument("--to", dest="to_stage", default="export")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("demo", help="generate the synthetic demo fixture")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--dim", type=int, default=16)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except SystemExit:
        raise
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(3)
    except (RweError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
