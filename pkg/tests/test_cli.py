"""End-to-end CLI runs on a tiny synthetic dataset."""

import numpy as np
import pytest

from pairview.audio import Waveform, write_wav
from pairview.cli import main
from pairview.mvf import mvf_read, mvf_write

from conftest import SUITE_SEED, small_synth_config


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_data")
    cfg = small_synth_config()
    dims = ",".join(f"{k}={'x'.join(str(d) for d in v)}" for k, v in cfg.view_dims.items())
    rc = main(["synth", "--out", str(out), "--seed", str(SUITE_SEED),
               "--n-per-class", "25", "--view-dims", dims])
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def pretrain_run(dataset, tmp_path_factory):
    run = tmp_path_factory.mktemp("cli_pre")
    rc = main(["pretrain", "--manifest", str(dataset / "manifest.txt"),
               "--fold", "0", "--seed", "3", "--batch-size", "16",
               "--epochs", "3", "--patience", "3", "--out", str(run)])
    assert rc == 0
    return run


def test_synth_outputs(dataset):
    assert (dataset / "manifest.txt").exists()
    assert (dataset / "config.resolved").exists()
    resolved = (dataset / "config.resolved").read_text()
    assert "seed = 11" in resolved


def test_pretrain_outputs(pretrain_run):
    assert (pretrain_run / "pretrain_fold0.ckpt").exists()
    assert (pretrain_run / "pretrain_fold0.history").exists()
    assert (pretrain_run / "config.resolved").exists()
    history = (pretrain_run / "pretrain_fold0.history").read_text()
    assert "train_loss" in history and "best_epoch" in history


def test_pretrain_rerun_bit_exact(dataset, pretrain_run, tmp_path):
    rc = main(["pretrain", "--manifest", str(dataset / "manifest.txt"),
               "--fold", "0", "--seed", "3", "--batch-size", "16",
               "--epochs", "3", "--patience", "3", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "pretrain_fold0.ckpt").read_bytes() == \
           (pretrain_run / "pretrain_fold0.ckpt").read_bytes()
    assert (tmp_path / "pretrain_fold0.history").read_text() == \
           (pretrain_run / "pretrain_fold0.history").read_text()


def test_finetune_and_eval(dataset, pretrain_run, tmp_path, capsys):
    rc = main(["finetune", "--manifest", str(dataset / "manifest.txt"),
               "--view", "para", "--from", str(pretrain_run), "--fold", "0",
               "--epochs", "3", "--patience", "3", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "finetune_fold0.ckpt").exists()
    assert (tmp_path / "finetune_fold0.metrics.csv").exists()

    rc = main(["eval", "--manifest", str(dataset / "manifest.txt"),
               "--checkpoint", str(tmp_path / "finetune_fold0.ckpt"), "--fold", "0"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "test UAR" in out


def test_finetune_repeats_csv(dataset, pretrain_run, tmp_path):
    rc = main(["finetune", "--manifest", str(dataset / "manifest.txt"),
               "--view", "para", "--from", str(pretrain_run), "--fold", "0",
               "--p", "0.2", "--repeats", "3", "--epochs", "3", "--patience", "3",
               "--out", str(tmp_path)])
    assert rc == 0
    runs = (tmp_path / "finetune_repeats.csv").read_text().splitlines()
    assert runs[0] == "p,arm,repeat,seed,test_uar"
    assert len(runs) == 4
    summary = (tmp_path / "finetune_summary.csv").read_text().splitlines()
    assert summary[0] == "p,arm,mean_uar,ci_half_width,n"
    assert summary[1].startswith("0.2,pretrained,")


def test_sparse_and_report_pass_through(dataset, pretrain_run, tmp_path, capsys):
    run = tmp_path / "sparse"
    rc = main(["sparse", "--manifest", str(dataset / "manifest.txt"),
               "--view", "para", "--from", str(pretrain_run), "--fold", "0",
               "--p-grid", "0.2", "--repeats", "3", "--epochs", "3", "--patience", "3",
               "--out", str(run)])
    assert rc == 0
    for f in ("sparse_runs.csv", "sparse_summary.csv", "sparse_significance.csv"):
        assert (run / f).exists(), f

    rc = main(["report", "--run", str(run)])
    assert rc == 0
    report = run / "report"
    assert (report / "sparse_summary.csv").read_bytes() == (run / "sparse_summary.csv").read_bytes()
    assert (report / "sparse_significance.csv").read_bytes() == \
           (run / "sparse_significance.csv").read_bytes()


def test_grid_and_report(dataset, tmp_path):
    run = tmp_path / "grid"
    rc = main(["grid", "--manifest", str(dataset / "manifest.txt"),
               "--views", "para", "--taus", "0.5", "--freeze-options", "both",
               "--fold", "0", "--batch-size", "16", "--pretrain-epochs", "2",
               "--pretrain-patience", "2", "--epochs", "2", "--patience", "2",
               "--out", str(run)])
    assert rc == 0
    table = (run / "grid_table.csv").read_text().splitlines()
    assert len(table) == 4  # header + supervised + tuned + frozen
    assert "rank_val" in table[0]

    rc = main(["report", "--run", str(run)])
    assert rc == 0
    assert (run / "report" / "grid_table.csv").read_bytes() == (run / "grid_table.csv").read_bytes()


def test_pwcca_command(tmp_path, capsys):
    rng = np.random.default_rng(0)
    a, b = tmp_path / "a.mvf", tmp_path / "b.mvf"
    mvf_write(a, rng.normal(size=(300, 16)).astype(np.float32))
    mvf_write(b, rng.normal(size=(300, 16)).astype(np.float32))
    rc = main(["pwcca", "--a", str(a), "--b", str(b), "--out", str(tmp_path / "p.csv")])
    assert rc == 0
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "score,n_correlations,weighted_by"
    score = float(lines[1].split(",")[0])
    assert 0 <= score <= 1


def test_export_reps(dataset, pretrain_run, tmp_path):
    out = tmp_path / "reps.mvf"
    rc = main(["export-reps", "--manifest", str(dataset / "manifest.txt"),
               "--checkpoint", str(pretrain_run / "pretrain_fold0.ckpt"),
               "--view", "para", "--out", str(out)])
    assert rc == 0
    reps = mvf_read(out)
    assert reps.shape == (100, 128)
    rc = main(["export-reps", "--manifest", str(dataset / "manifest.txt"),
               "--checkpoint", str(pretrain_run / "pretrain_fold0.ckpt"),
               "--view", "para", "--out", str(tmp_path / "reps2.mvf")])
    assert rc == 0
    assert out.read_bytes() == (tmp_path / "reps2.mvf").read_bytes()


def test_extract_commands(tmp_path):
    wav_dir = tmp_path / "wavs"
    wav_dir.mkdir()
    t = np.arange(16000) / 16000.0
    for i, freq in enumerate((200, 440)):
        samples = (0.4 * np.sin(2 * np.pi * freq * t)).astype(np.float32)
        write_wav(wav_dir / f"clip{i}.wav", Waveform(samples, 16000))

    mel_out = tmp_path / "mel"
    rc = main(["extract-mel", "--wav-dir", str(wav_dir), "--out", str(mel_out),
               "--seconds", "2"])
    assert rc == 0
    spec = mvf_read(mel_out / "clip0.mel.mvf")
    assert spec.shape[0] == 64
    fragment = (mel_out / "fragment.mel.txt").read_text().splitlines()
    assert fragment[0].startswith("view mel 2 64 ")
    assert fragment[1] == "clip0|mel=clip0.mel.mvf"

    para_out = tmp_path / "para"
    rc = main(["extract-para", "--wav-dir", str(wav_dir), "--out", str(para_out)])
    assert rc == 0
    vec = mvf_read(para_out / "clip0.para.mvf")
    assert vec.shape == (42,)
    header = (para_out / "para.csv").read_text().splitlines()[0]
    assert header.count(",") == 42  # id + 42 feature names


def test_unknown_flag_exit_2(dataset):
    with pytest.raises(SystemExit) as exc:
        main(["pretrain", "--manifest", str(dataset / "manifest.txt"), "--bogus", "1"])
    assert exc.value.code == 2


def test_config_conflict_exit_2(dataset, tmp_path):
    rc = main(["pretrain", "--manifest", str(dataset / "manifest.txt"),
               "--fold", "0", "--batch-size", "4000", "--out", str(tmp_path)])
    assert rc == 2


def test_config_file_with_flag_override(dataset, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("fold = 0\nbatch-size = 16\nepochs = 2\npatience = 2\nseed = 9\n")
    out = tmp_path / "run"
    rc = main(["pretrain", "--manifest", str(dataset / "manifest.txt"),
               "--config", str(cfg), "--seed", "10", "--out", str(out)])
    assert rc == 0
    resolved = (out / "config.resolved").read_text()
    assert "seed = 10" in resolved  # flag wins
    assert "batch-size = 16" in resolved  # file value used
