"""Pipeline orchestration: vocab -> cooccur -> pairs -> relvec -> train -> export.

Every stage writes its artifact atomically (temp file + rename) and appends
an entry to the stage report: parameters, input hashes, record counts, and
wall time. Stage randomness derives from one global seed, salted per stage.
"""

import configparser
import contextlib
import hashlib
import json
import os
import time

from . import cooccur as cooccur_mod
from . import network
from .corpus import Vocabulary, build_vocabulary, stream_sentences
from .embeddings import load_text_embeddings, save_text_embeddings
from .errors import PipelineError
from .relvec import RelationVectorStore, build_relation_store, collect_middle_bags

STAGES = ("vocab", "cooccur", "pairs", "relvec", "train", "export")

ARTIFACTS = {
    "vocab": "vocab.tsv",
    "cooccur": "cooccur.bin",
    "pairs": "pairs.tsv",
    "relvec": "relvecs.tsv",
    "train": "model.ckpt",
    "export": "relational_vectors.txt",
}

_DEFAULTS = {
    "pipeline": {"seed": "13", "threads": "1"},
    "vocab": {"max_size": "100000", "min_count": "1", "lowercase": "false"},
    "cooccur": {"window": "10"},
    "pairs": {"top_k": "100", "min_raw": "25"},
    "relvec": {},
    "train": {
        "hidden": "", "lr": "0.001", "batch": "512", "epochs": "100",
        "patience": "3", "dev_frac": "0.01", "output_activation": "relu",
    },
    "export": {},
}


@contextlib.contextmanager
def atomic_write(path):
    """Yield a temp path; rename over the target only on success."""
    tmp = f"{path}.tmp"
    try:
        yield tmp
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as source:
        for block in iter(lambda: source.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def stage_seed(global_seed, stage):
    """Per-stage seed derived from the single global seed."""
    return (int(global_seed) * 1_000_003 + STAGES.index(stage)) % (1 << 32)


def load_config(path, overrides=None):
    """INI-style key=value config, one section per stage, plus [pipeline]."""
    parser = configparser.ConfigParser()
    for section, values in _DEFAULTS.items():
        parser[section] = dict(values)
    if path is not None:
        read = parser.read(path)
        if not read:
            raise PipelineError(f"cannot read config file: {path}")
    for key, value in (overrides or {}).items():
        section, _, option = key.partition(".")
        if not parser.has_section(section):
            parser.add_section(section)
        parser[section][option] = str(value)
    return parser


class Pipeline:
    def __init__(self, config):
        self.config = config
        try:
            self.workdir = config["pipeline"]["workdir"]
            self.corpus_path = config["pipeline"]["corpus"]
            self.vectors_path = config["pipeline"]["vectors"]
        except KeyError as exc:
            raise PipelineError(f"missing required pipeline setting: {exc}") from None
        self.seed = config["pipeline"].getint("seed")
        self.threads = config["pipeline"].getint("threads")
        os.makedirs(self.workdir, exist_ok=True)

    def artifact(self, stage):
        return os.path.join(self.workdir, ARTIFACTS[stage])

    def _require(self, stage):
        path = self.artifact(stage)
        if not os.path.exists(path):
            raise PipelineError(f"missing artifact {path}: run stage {stage} first")
        return path

    def _sentences(self, lowercase=False):
        return stream_sentences(self.corpus_path, lowercase=lowercase)

    def _lowercase(self):
        return self.config["vocab"].getboolean("lowercase")

    # stage implementations -------------------------------------------------

    def run_vocab(self):
        cfg = self.config["vocab"]
        vocab = build_vocabulary(
            self._sentences(self._lowercase()),
            max_size=cfg.getint("max_size"),
            min_count=cfg.getint("min_count"),
        )
        with atomic_write(self.artifact("vocab")) as tmp:
            vocab.save(tmp)
        return {"words": len(vocab)}, [self.corpus_path]

    def run_cooccur(self):
        vocab = Vocabulary.load(self._require("vocab"))
        window = self.config["cooccur"].getint("window")
        table = cooccur_mod.count_cooccurrences(
            self._sentences(self._lowercase()), vocab, window=window,
            threads=self.threads,
        )
        with atomic_write(self.artifact("cooccur")) as tmp:
            cooccur_mod.save_table(table, tmp)
        return {"pairs": len(table)}, [self.corpus_path, self.artifact("vocab")]

    def run_pairs(self):
        vocab = Vocabulary.load(self._require("vocab"))
        window = self.config["cooccur"].getint("window")
        table = cooccur_mod.load_table(self._require("cooccur"), vocab, window=window)
        cfg = self.config["pairs"]
        pairs = cooccur_mod.select_related_pairs(
            table, top_k=cfg.getint("top_k"), min_raw=cfg.getint("min_raw")
        )
        with atomic_write(self.artifact("pairs")) as tmp:
            pairs.save(tmp)
        return {"pairs": len(pairs)}, [self.artifact("cooccur")]

    def run_relvec(self):
        vocab = Vocabulary.load(self._require("vocab"))
        pairs = cooccur_mod.RelatedPairSet.load(self._require("pairs"), vocab)
        window = self.config["cooccur"].getint("window")
        standard = load_text_embeddings(self.vectors_path)
        bags = collect_middle_bags(self._sentences(self._lowercase()), pairs, window)
        store, drops = build_relation_store(pairs, bags, standard)
        with atomic_write(self.artifact("relvec")) as tmp:
            store.save(tmp)
        return (
            {"pairs_in": len(pairs), "vectors": len(store), "drops": dict(drops)},
            [self.corpus_path, self.artifact("pairs"), self.vectors_path],
        )

    def run_train(self):
        store = RelationVectorStore.load(self._require("relvec"))
        standard = load_text_embeddings(self.vectors_path)
        cfg = self.config["train"]
        words = sorted({w for pair in store.pairs() for w in pair if w in standard})
        if not words:
            raise PipelineError("no relation-vector words have standard vectors")
        hidden = cfg.get("hidden") or None
        seed = stage_seed(self.seed, "train")
        model = network.init_model(
            standard, words,
            hidden=int(hidden) if hidden else None,
            seed=seed,
            output_activation=cfg.get("output_activation"),
        )
        config = network.TrainConfig(
            learning_rate=cfg.getfloat("lr"),
            batch_size=cfg.getint("batch"),
            max_epochs=cfg.getint("epochs"),
            patience=cfg.getint("patience"),
            dev_fraction=cfg.getfloat("dev_frac"),
            seed=seed,
            output_activation=cfg.get("output_activation"),
        )
        history = network.train(model, store, config)
        with atomic_write(self.artifact("train")) as tmp:
            network.save_checkpoint(model, tmp, seed=seed)
        return (
            {
                "words": len(words),
                "epochs": len(history["train"]),
                "best_epoch": history["best_epoch"],
                "best_dev_loss": history["dev"][history["best_epoch"]],
            },
            [self.artifact("relvec"), self.vectors_path],
        )

    def run_export(self):
        model, _seed = network.load_checkpoint(self._require("train"))
        store = network.export_relational_embeddings(model)
        with atomic_write(self.artifact("export")) as tmp:
            save_text_embeddings(store, tmp)
        return {"words": len(store)}, [self.artifact("train")]

    # driver ----------------------------------------------------------------

    def run(self, from_stage="vocab", to_stage="export"):
        if from_stage not in STAGES or to_stage not in STAGES:
            raise PipelineError(f"unknown stage; expected one of {STAGES}")
        first, last = STAGES.index(from_stage), STAGES.index(to_stage)
        if first > last:
            raise PipelineError("from_stage is after to_stage")
        report = {"stages": []}
        for stage in STAGES[first : last + 1]:
            start = time.monotonic()
            counts, inputs = getattr(self, f"run_{stage}")()
            entry = {
                "stage": stage,
                "params": dict(self.config[stage]) if self.config.has_section(stage) else {},
                "inputs": {p: sha256_file(p) for p in inputs},
                "counts": counts,
                "wall_seconds": time.monotonic() - start,
            }
            report["stages"].append(entry)
        report_path = os.path.join(self.workdir, "report.json")
        with atomic_write(report_path) as tmp:
            with open(tmp, "w", encoding="utf-8") as sink:
                json.dump(report, sink, indent=2)
        return report


def run_pipeline(config, from_stage="vocab", to_stage="export"):
    """Run the configured stage range; returns the stage report."""
    return Pipeline(config).run(from_stage, to_stage)
