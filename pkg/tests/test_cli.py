import json

import numpy as np
import pytest

from rwe.cli import main


def run_cli(*argv):
    """Invoke the CLI in-process; returns the exit code."""
    try:
        return main(list(argv)) or 0
    except SystemExit as exc:
        return exc.code or 0


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Corpus + vectors + the stage artifacts built through the CLI itself."""
    root = tmp_path_factory.mktemp("cli")
    rng = np.random.default_rng(0)
    lines = [f"city{i % 5} is the capital of land{i % 5}" for i in range(50)]
    for _ in range(50):
        toks = rng.choice(
            ["the", "a", "of", "is", "near"] + [f"city{i}" for i in range(5)], 7
        )
        lines.append(" ".join(toks))
    (root / "corpus.txt").write_text("\n".join(lines))
    words = sorted({w for line in lines for w in line.split()})
    mat = rng.standard_normal((len(words), 6))
    with open(root / "vectors.txt", "w") as sink:
        print(f"{len(words)} 6", file=sink)
        for w, row in zip(words, mat):
            print(w + " " + " ".join(f"{x:.6g}" for x in row), file=sink)
    return root


class TestStageCommands:
    def test_vocab(self, workdir, capsys):
        code = run_cli(
            "vocab", "--corpus", str(workdir / "corpus.txt"),
            "--out", str(workdir / "vocab.tsv"),
        )
        assert code == 0
        assert (workdir / "vocab.tsv").exists()
        assert capsys.readouterr().out.startswith("words\t")

    def test_cooccur(self, workdir):
        assert run_cli(
            "cooccur", "--corpus", str(workdir / "corpus.txt"),
            "--vocab", str(workdir / "vocab.tsv"),
            "--out", str(workdir / "table.bin"),
        ) == 0

    def test_pairs(self, workdir):
        assert run_cli(
            "pairs", "--table", str(workdir / "table.bin"),
            "--vocab", str(workdir / "vocab.tsv"),
            "--min-raw", "2", "--top-k", "5",
            "--out", str(workdir / "pairs.tsv"),
        ) == 0
        assert (workdir / "pairs.tsv").read_text().strip()

    def test_relvec(self, workdir):
        assert run_cli(
            "relvec", "--corpus", str(workdir / "corpus.txt"),
            "--vocab", str(workdir / "vocab.tsv"),
            "--pairs", str(workdir / "pairs.tsv"),
            "--vectors", str(workdir / "vectors.txt"),
            "--out", str(workdir / "relvecs.tsv"),
        ) == 0

    def test_train_and_export(self, workdir):
        assert run_cli(
            "train", "--relvecs", str(workdir / "relvecs.tsv"),
            "--init-vectors", str(workdir / "vectors.txt"),
            "--epochs", "2", "--batch", "8", "--dev-frac", "0.2",
            "--out", str(workdir / "model.ckpt"),
        ) == 0
        assert run_cli(
            "export", "--checkpoint", str(workdir / "model.ckpt"),
            "--out", str(workdir / "relational.txt"),
        ) == 0
        header = (workdir / "relational.txt").read_text().splitlines()[0]
        assert header.split()[1] == "6"

    def test_nn(self, workdir, capsys):
        assert run_cli(
            "nn", "--vectors", str(workdir / "vectors.txt"),
            "--word", "city0", "--k", "3",
        ) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 3
        assert out[0].startswith("1\t")


class TestEvalCommands:
    def test_eval_cls_cv(self, workdir, capsys, tmp_path):
        data = tmp_path / "pairs.tsv"
        records = [f"city{i % 5}\tland{i % 5}\tcapital" for i in range(10)]
        records += [f"city{i % 5}\tcity{(i + 1) % 5}\tother" for i in range(10)]
        data.write_text("\n".join(records))
        json_path = tmp_path / "m.json"
        assert run_cli(
            "eval-cls", "--data", str(data), "--folds", "2",
            "--scheme", "diff", "--standard", str(workdir / "vectors.txt"),
            "--json", str(json_path),
        ) == 0
        out = capsys.readouterr().out
        assert "accuracy\t" in out
        saved = json.loads(json_path.read_text())
        assert "macro_f1" in saved

    def test_eval_qvec(self, workdir, capsys, tmp_path):
        props = tmp_path / "props.tsv"
        rng = np.random.default_rng(1)
        words = [f"city{i}" for i in range(5)]
        with open(props, "w") as sink:
            print("word\tp0\tp1", file=sink)
            for w in words:
                print(f"{w}\t{rng.random():.4f}\t{rng.random():.4f}", file=sink)
        assert run_cli(
            "eval-qvec", "--vectors", str(workdir / "vectors.txt"),
            "--properties", str(props),
        ) == 0
        assert "qvec\t" in capsys.readouterr().out


class TestPipelineAndDemo:
    def test_pipeline_command(self, workdir, tmp_path, capsys):
        ini = tmp_path / "run.ini"
        ini.write_text(
            "[pipeline]\n"
            f"workdir = {tmp_path / 'work'}\n"
            f"corpus = {workdir / 'corpus.txt'}\n"
            f"vectors = {workdir / 'vectors.txt'}\n"
            "[pairs]\ntop_k = 5\nmin_raw = 2\n"
            "[train]\nepochs = 2\ndev_frac = 0.2\nbatch = 8\n"
        )
        assert run_cli("pipeline", "--config", str(ini), "--to", "pairs") == 0
        assert run_cli("pipeline", "--config", str(ini), "--from", "relvec") == 0
        assert (tmp_path / "work" / "relational_vectors.txt").exists()
        out = capsys.readouterr().out
        assert out.startswith("vocab\t")

    def test_pipeline_set_override(self, workdir, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text(
            "[pipeline]\n"
            f"workdir = {tmp_path / 'work'}\n"
            f"corpus = {workdir / 'corpus.txt'}\n"
            f"vectors = {workdir / 'vectors.txt'}\n"
        )
        assert run_cli(
            "pipeline", "--config", str(ini), "--to", "vocab",
            "--set", "vocab.max_size=3",
        ) == 0
        vocab_lines = (tmp_path / "work" / "vocab.tsv").read_text().strip().splitlines()
        assert len(vocab_lines) == 3

    def test_demo_generates_fixture(self, tmp_path, capsys):
        out_dir = tmp_path / "demo"
        assert run_cli("demo", "--out-dir", str(out_dir), "--dim", "8") == 0
        for name in ("demo_corpus.txt", "demo_vectors.txt", "demo_pairs.tsv"):
            assert (out_dir / name).exists()
        out = capsys.readouterr().out
        assert "dataset_pairs\t200" in out


class TestExitCodes:
    def test_usage_error_is_1(self):
        assert run_cli("vocab") == 1

    def test_unknown_subcommand_is_1(self):
        assert run_cli("frobnicate") == 1

    def test_missing_file_is_2(self, tmp_path):
        assert run_cli(
            "vocab", "--corpus", str(tmp_path / "nope.txt"),
            "--out", str(tmp_path / "v.tsv"),
        ) == 2

    def test_bad_data_is_2(self, tmp_path):
        bad = tmp_path / "vectors.txt"
        bad.write_text("a 1.0 oops\n")
        assert run_cli("nn", "--vectors", str(bad), "--word", "a") == 2

    def test_success_is_0(self, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text("a b c\n")
        assert run_cli(
            "vocab", "--corpus", str(corpus), "--out", str(tmp_path / "v.tsv")
        ) == 0
