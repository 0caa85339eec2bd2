"""Command-line experiment harness.

Subcommands: synth, extract-mel, extract-para, pretrain, finetune, eval,
sparse, grid, pwcca, export-reps, report. Options resolve in three layers:
built-in defaults, then a ``key = value`` config file (--config), then
explicit flags. Run directories always receive a ``config.resolved`` copy so
any run can be reproduced bit-exactly. Worker-pool size comes from the
PAIRVIEW_WORKERS environment variable (default 1).
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import analysis, training
from .audio import pad_or_trim, read_audio
from .checkpoint import load_checkpoint
from .data import load_manifest
from .dsp import MelConfig, mel_spectrogram, paralinguistic_vector, write_para_csv
from .encoders import EncoderSpec, ClassifierModel, build_classifier, build_encoder
from .errors import ContractError, PairviewError
from .checkpoint import restore_into
from .mvf import mvf_read, mvf_write
from .synth import SynthConfig, synth_generate
from .training import FinetuneConfig, PretrainConfig

USAGE_EXIT = 2
FAILURE_EXIT = 1


class UsageError(Exception):
    """Bad or conflicting configuration; maps to exit code 2."""


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("PAIRVIEW_WORKERS", "1")))
    except ValueError:
        return 1


def read_config_file(path) -> dict[str, str]:
    values = {}
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{ln}: expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


class Options:
    """Layered option lookup: flags > config file > defaults."""

    def __init__(self, args: argparse.Namespace):
        self.flags = vars(args)
        self.file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
        self.resolved: dict[str, str] = {}

    def get(self, key: str, default=None, cast=str):
        flag = self.flags.get(key.replace("-", "_"))
        if flag is not None:
            value = flag
        elif key in self.file_values:
            value = self.file_values[key]
        else:
            value = default
        if value is not None and not isinstance(value, cast if cast in (int, float, str) else str):
            try:
                value = cast(value)
            except (TypeError, ValueError) as e:
                raise UsageError(f"option {key!r}: cannot read {value!r} as {cast.__name__}") from e
        if value is not None:
            self.resolved[key] = str(value)
        return value

    def get_bool(self, key: str, default: bool = False) -> bool:
        flag = self.flags.get(key.replace("-", "_"))
        if flag is not None:
            value = bool(flag)
        elif key in self.file_values:
            value = self.file_values[key].lower() in ("1", "true", "yes")
        else:
            value = default
        self.resolved[key] = str(value).lower()
        return value

    def write_resolved(self, out_dir: Path):
        out_dir.mkdir(parents=True, exist_ok=True)
        lines = [f"{k} = {self.resolved[k]}" for k in sorted(self.resolved)]
        (out_dir / "config.resolved").write_text("\n".join(lines) + "\n")


def _parse_fold(value: str, n_sessions: int) -> list[int]:
    if value == "all":
        return list(range(n_sessions))
    try:
        folds = [int(v) for v in value.split(",")]
    except ValueError as e:
        raise UsageError(f"--fold must be 'all' or comma-separated integers, got {value!r}") from e
    for f in folds:
        if not 0 <= f < n_sessions:
            raise UsageError(f"fold {f} out of range for {n_sessions} sessions")
    return folds


def _resolve_checkpoint(from_arg: str | None, fold: int):
    if from_arg is None:
        return None
    p = Path(from_arg)
    if p.is_dir():
        ck = p / f"pretrain_fold{fold}.ckpt"
        if not ck.exists():
            raise UsageError(f"{p} has no checkpoint for fold {fold} ({ck.name} missing)")
        return str(ck)
    if not p.exists():
        raise UsageError(f"checkpoint {p} does not exist")
    return str(p)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _parse_view_dims(text: str) -> dict[str, tuple[int, ...]]:
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"bad view spec {part!r}; expected name=DxDxD")
        name, dims = part.split("=", 1)
        out[name.strip()] = tuple(int(d) for d in dims.split("x"))
    return out


def cmd_synth(opts: Options) -> int:
    out = Path(opts.get("out", cast=str))
    cfg = SynthConfig(
        n_per_class=opts.get("n-per-class", 200, int),
        labels=tuple(opts.get("labels", ",".join(SynthConfig().labels)).split(",")),
        latent_dim=opts.get("latent-dim", 8, int),
        n_speakers=opts.get("speakers", 10, int),
        n_sessions=opts.get("sessions", 5, int),
        noise_sigma=opts.get("noise-sigma", 0.4, float),
        speaker_sigma=opts.get("speaker-sigma", 0.6, float),
        view_noise_sigma=opts.get("view-noise-sigma", 0.15, float),
        jitter_sigma=opts.get("jitter-sigma", 0.15, float),
        n_per_ood_class=opts.get("n-per-ood-class", 0, int),
    )
    ood = opts.get("ood-labels", None)
    if ood:
        cfg.ood_labels = tuple(ood.split(","))
    elif cfg.n_per_ood_class > 0:
        from .synth import OOD_LABELS
        cfg.ood_labels = OOD_LABELS[: len(cfg.labels)]
    dims_arg = opts.get("view-dims", None)
    if dims_arg:
        cfg.view_dims = _parse_view_dims(dims_arg)
    seed = opts.get("seed", 0, int)
    manifest = synth_generate(cfg, seed, out)
    opts.write_resolved(out)
    print(f"wrote {len(manifest.records)} records, {len(manifest.views)} views -> {out}")
    return 0


def _iter_wavs(wav_dir: Path):
    wavs = sorted(wav_dir.glob("*.wav"))
    for w in wavs:
        yield w.stem, w


def _write_fragment(path, view: str, dims: tuple[int, ...], entries: list[tuple[str, str]]):
    lines = [f"view {view} {len(dims)} " + " ".join(str(d) for d in dims)]
    lines += [f"{rid}|{view}={rel}" for rid, rel in entries]
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_extract_mel(opts: Options) -> int:
    wav_dir = Path(opts.get("wav-dir", cast=str))
    out_dir = Path(opts.get("out", cast=str))
    seconds = opts.get("seconds", 15.0, float)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = MelConfig()
    entries = []
    dims = None
    for rid, wav in _iter_wavs(wav_dir):
        spec = mel_spectrogram(pad_or_trim(read_audio(wav), seconds), cfg)
        rel = f"{rid}.mel.mvf"
        mvf_write(out_dir / rel, spec.values)
        entries.append((rid, rel))
        dims = spec.values.shape
    if not entries:
        print(f"warning: no .wav files under {wav_dir}", file=sys.stderr)
        return 0
    _write_fragment(out_dir / "fragment.mel.txt", "mel", dims, entries)
    opts.write_resolved(out_dir)
    print(f"extracted mel for {len(entries)} files -> {out_dir}")
    return 0


def cmd_extract_para(opts: Options) -> int:
    wav_dir = Path(opts.get("wav-dir", cast=str))
    out_dir = Path(opts.get("out", cast=str))
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    rows = {}
    for rid, wav in _iter_wavs(wav_dir):
        vec = paralinguistic_vector(read_audio(wav))
        rel = f"{rid}.para.mvf"
        mvf_write(out_dir / rel, vec)
        rows[rid] = vec
        entries.append((rid, rel))
    if not entries:
        print(f"warning: no .wav files under {wav_dir}", file=sys.stderr)
        return 0
    write_para_csv(out_dir / "para.csv", rows)
    _write_fragment(out_dir / "fragment.para.txt", "para", (rows[entries[0][0]].shape[0],), entries)
    opts.write_resolved(out_dir)
    print(f"extracted descriptors for {len(entries)} files -> {out_dir}")
    return 0


def cmd_pretrain(opts: Options) -> int:
    manifest = load_manifest(opts.get("manifest", cast=str))
    views = opts.get("views", ",".join(sorted(manifest.views))).split(",")
    cfg = PretrainConfig(
        views=tuple(views),
        tau=opts.get("tau", 0.5, float),
        batch_size=opts.get("batch-size", 128, int),
        max_epochs=opts.get("epochs", 100, int),
        patience=opts.get("patience", 30, int),
        lr=opts.get("lr", 0.001, float),
        seed=opts.get("seed", 0, int),
    )
    folds = _parse_fold(opts.get("fold", "all"), len(manifest.sessions))
    out = Path(opts.get("out", cast=str))
    results = training.pretrain(manifest, folds, cfg, out_dir=out, workers=_workers())
    opts.write_resolved(out)
    for fold, (_, history) in results.items():
        print(f"fold {fold}: best val loss {history.val_values[history.best_epoch - 1]:.6f} "
              f"at epoch {history.best_epoch} (stopped {history.stop_epoch})")
    return 0


def _finetune_cfg(opts: Options, view: str) -> FinetuneConfig:
    return FinetuneConfig(
        view=view,
        freeze=opts.get_bool("freeze"),
        lr=opts.get("lr", 0.001, float),
        plateau_factor=opts.get("plateau-factor", 0.9, float),
        plateau_epochs=opts.get("plateau-epochs", 5, int),
        max_epochs=opts.get("epochs", 100, int),
        patience=opts.get("patience", 20, int),
        batch_size=opts.get("batch-size", 32, int),
        seed=opts.get("seed", 0, int),
    )


def cmd_finetune(opts: Options) -> int:
    manifest = load_manifest(opts.get("manifest", cast=str))
    view = opts.get("view", cast=str)
    if view not in manifest.views:
        raise UsageError(f"view {view!r} not in manifest ({sorted(manifest.views)})")
    fold = opts.get("fold", 0, int)
    repeats = opts.get("repeats", 1, int)
    fraction = opts.get("p", 1.0, float)
    out = Path(opts.get("out", cast=str))
    ckpt_path = _resolve_checkpoint(opts.get("from", None), fold)
    base = _finetune_cfg(opts, view)
    out.mkdir(parents=True, exist_ok=True)

    if repeats <= 1:
        cfg = base if fraction >= 1.0 else training.replace(base, label_fraction=fraction)
        cfg = training.replace(cfg, checkpoint=ckpt_path)
        res = training.finetune(manifest, fold, cfg)
        training.save_finetune_checkpoint(out / f"finetune_fold{fold}.ckpt", res.model, cfg,
                                          fold, training.class_list(manifest))
        res.history.write(out / f"finetune_fold{fold}.history")
        _write_metrics_csv(out / f"finetune_fold{fold}.metrics.csv", res)
        opts.write_resolved(out)
        print(f"fold {fold}: test UAR {res.test_metrics.uar:.4f} WA {res.test_metrics.wa:.4f}")
        return 0

    # repeated runs of this one arm at one label fraction -> sparse-style CSV
    arm = "pretrained" if ckpt_path else "scratch"
    runs = []
    for rep in range(repeats):
        seed = training.mix_seed(base.seed, "sparse", int(round(fraction * 10000)), rep)
        cfg = training.replace(base, checkpoint=ckpt_path, label_fraction=fraction, seed=seed)
        res = training.finetune(manifest, fold, cfg)
        runs.append(training.SparseRun(fraction, arm, rep, seed, res.test_metrics.uar))
    mean, half = analysis.mean_ci95([r.test_uar for r in runs])
    with open(out / "finetune_repeats.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["p", "arm", "repeat", "seed", "test_uar"])
        for r in runs:
            w.writerow([r.fraction, r.arm, r.repeat, r.seed, repr(r.test_uar)])
    with open(out / "finetune_summary.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["p", "arm", "mean_uar", "ci_half_width", "n"])
        w.writerow([fraction, arm, repr(mean), repr(half), repeats])
    opts.write_resolved(out)
    print(f"{arm} p={fraction}: mean test UAR {mean:.4f} +- {half:.4f} over {repeats} repeats")
    return 0


def _write_metrics_csv(path, res: training.FinetuneResult):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["split", "uar", "wa", "excluded_classes"])
        w.writerow(["val", repr(res.val_metrics.uar), repr(res.val_metrics.wa),
                    ";".join(res.val_metrics.excluded_classes)])
        w.writerow(["test", repr(res.test_metrics.uar), repr(res.test_metrics.wa),
                    ";".join(res.test_metrics.excluded_classes)])


def _classifier_from_checkpoint(path):
    ckpt = load_checkpoint(path)
    if ckpt.meta.get("kind") != "finetune":
        raise UsageError(f"{path} is not a fine-tune checkpoint")
    view = ckpt.meta["view"]
    spec = EncoderSpec.from_dict(ckpt.meta["specs"][view])
    encoder = build_encoder(spec, 0)
    classes = ckpt.meta["classes"]
    head = build_classifier(len(classes), 0, in_dim=spec.output_dim)
    model = ClassifierModel(encoder, head)
    restore_into(model.parameters(include_encoder=True), ckpt)
    return model, classes


def cmd_eval(opts: Options) -> int:
    manifest = load_manifest(opts.get("manifest", cast=str))
    model, classes = _classifier_from_checkpoint(opts.get("checkpoint", cast=str))
    fold = opts.get("fold", 0, int)
    split = opts.get("split", "test")
    train_sessions, val_session, test_session = training.make_cv_splits(manifest, fold)
    session_pick = {"train": train_sessions, "val": [val_session], "test": [test_session]}
    if split not in session_pick:
        raise UsageError(f"--split must be train/val/test, got {split!r}")
    records = manifest.by_session(session_pick[split])
    report = training.evaluate(model, manifest, records, fold=fold)
    print(f"{split} UAR {report.uar:.4f} WA {report.wa:.4f}")
    for name in classes:
        if name in report.per_class_recall:
            print(f"  recall[{name}] = {report.per_class_recall[name]:.4f}")
    if report.excluded_classes:
        print(f"  (classes without support excluded from UAR: {report.excluded_classes})")
    return 0


def cmd_sparse(opts: Options) -> int:
    manifest = load_manifest(opts.get("manifest", cast=str))
    view = opts.get("view", cast=str)
    fold = opts.get("fold", 0, int)
    fractions = tuple(float(p) for p in opts.get("p-grid", "0.02,0.05,0.10,0.25").split(","))
    repeats = opts.get("repeats", 10, int)
    ckpt_path = _resolve_checkpoint(opts.get("from", cast=str), fold)
    out = Path(opts.get("out", cast=str))
    base = _finetune_cfg(opts, view)
    result = training.run_sparse_experiment(manifest, fold, view, ckpt_path,
                                            fractions=fractions, repeats=repeats,
                                            base_cfg=base, workers=_workers())
    out.mkdir(parents=True, exist_ok=True)
    training.write_sparse_csv(result, out / "sparse_runs.csv", out / "sparse_summary.csv",
                              out / "sparse_significance.csv")
    opts.write_resolved(out)
    for s in result.summaries:
        print(f"p={s.fraction} {s.arm}: mean UAR {s.mean_uar:.4f} +- {s.ci_half_width:.4f}")
    for fraction, u, p, method in result.significance:
        print(f"p={fraction}: U={u} p-value={p:.5f} ({method})")
    return 0


def cmd_grid(opts: Options) -> int:
    manifest = load_manifest(opts.get("manifest", cast=str))
    pretrain_views = opts.get("pretrain-views", ",".join(sorted(manifest.views))).split(",")
    views = opts.get("views", ",".join(pretrain_views)).split(",")
    taus = tuple(float(t) for t in opts.get("taus", "0.1,0.25,0.5,1.0").split(","))
    freeze_arg = opts.get("freeze-options", "both")
    freeze_options = {"both": (False, True), "tuned": (False,), "frozen": (True,)}.get(freeze_arg)
    if freeze_options is None:
        raise UsageError("--freeze-options must be both/tuned/frozen")
    folds = _parse_fold(opts.get("fold", "all"), len(manifest.sessions))
    out = Path(opts.get("out", cast=str))
    pt_cfg = PretrainConfig(
        views=tuple(pretrain_views),
        batch_size=opts.get("batch-size", 128, int),
        max_epochs=opts.get("pretrain-epochs", 100, int),
        patience=opts.get("pretrain-patience", 30, int),
        lr=opts.get("lr", 0.001, float),
        seed=opts.get("seed", 0, int),
    )
    ft_cfg = FinetuneConfig(
        view=views[0],
        max_epochs=opts.get("epochs", 100, int),
        patience=opts.get("patience", 20, int),
        batch_size=opts.get("finetune-batch-size", 32, int),
        seed=opts.get("seed", 0, int),
    )
    result = training.run_temperature_grid(manifest, taus, freeze_options, views, folds,
                                           pt_cfg, ft_cfg, workers=_workers())
    out.mkdir(parents=True, exist_ok=True)
    training.write_grid_cells_csv(result.cells, out / "grid_cells.csv")
    training.write_grid_csv(result, out / "grid_table.csv", views)
    opts.write_resolved(out)
    print(f"grid complete: {len(result.rows)} configurations -> {out / 'grid_table.csv'}")
    return 0


def cmd_pwcca(opts: Options) -> int:
    a = mvf_read(opts.get("a", cast=str))
    b = mvf_read(opts.get("b", cast=str))
    report = analysis.pwcca(a, b)
    line = [repr(report.score), str(report.rank), "a"]
    header = ["score", "n_correlations", "weighted_by"]
    out_path = opts.get("out", None)
    text = ",".join(header) + "\n" + ",".join(line) + "\n"
    if out_path:
        Path(out_path).write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_export_reps(opts: Options) -> int:
    manifest = load_manifest(opts.get("manifest", cast=str))
    path = opts.get("checkpoint", cast=str)
    view = opts.get("view", cast=str)
    out = opts.get("out", cast=str)
    split = opts.get("split", "all")
    ckpt = load_checkpoint(path)
    if view not in ckpt.meta.get("specs", {}):
        raise UsageError(f"checkpoint has no encoder for view {view!r}")
    spec = EncoderSpec.from_dict(ckpt.meta["specs"][view])
    encoder = build_encoder(spec, 0)
    restore_into(encoder.params, ckpt)
    if split == "all":
        records = manifest.records
    else:
        fold = opts.get("fold", 0, int)
        train_sessions, val_session, test_session = training.make_cv_splits(manifest, fold)
        pick = {"train": train_sessions, "val": [val_session], "test": [test_session]}
        if split not in pick:
            raise UsageError(f"--split must be all/train/val/test, got {split!r}")
        records = manifest.by_session(pick[split])
    reps = analysis.export_representations(encoder, manifest, records, view, out)
    print(f"wrote {reps.shape[0]}x{reps.shape[1]} representations -> {out}")
    return 0


def cmd_report(opts: Options) -> int:
    run_dir = Path(opts.get("run", cast=str))
    out = Path(opts.get("out", str(run_dir / "report")))
    found = False
    missing = []
    sparse_runs = run_dir / "sparse_runs.csv"
    if sparse_runs.exists():
        found = True
        out.mkdir(parents=True, exist_ok=True)
        result = training.summarize_sparse_runs(training.read_sparse_runs_csv(sparse_runs))
        training.write_sparse_csv(result, out / "sparse_runs.csv", out / "sparse_summary.csv",
                                  out / "sparse_significance.csv")
        print(f"sparse report -> {out}")
    else:
        missing.append(str(sparse_runs))
    cells_csv = run_dir / "grid_cells.csv"
    if cells_csv.exists():
        found = True
        out.mkdir(parents=True, exist_ok=True)
        cells = training.read_grid_cells_csv(cells_csv)
        views = sorted({c.view for c in cells})
        rows = training.aggregate_grid_rows(cells, views)
        training.write_grid_csv(training.GridResult(cells=cells, rows=rows),
                                out / "grid_table.csv", views)
        print(f"grid report -> {out}")
    else:
        missing.append(str(cells_csv))
    if not found:
        print("no run artifacts found; looked for:", file=sys.stderr)
        for m in missing:
            print(f"  {m}", file=sys.stderr)
        return FAILURE_EXIT
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairview",
                                     description="Multi-view contrastive SER experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, flags):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key = value config file")
        for flag, kwargs in flags.items():
            p.add_argument(flag, **kwargs)
        p.set_defaults(func=fn)
        return p

    common_train = {
        "--manifest": dict(required=True),
        "--seed": dict(type=int, default=None),
        "--lr": dict(type=float, default=None),
        "--epochs": dict(type=int, default=None),
        "--patience": dict(type=int, default=None),
        "--batch-size": dict(type=int, default=None),
    }

    add("synth", cmd_synth, {
        "--out": dict(required=True),
        "--seed": dict(type=int, default=None),
        "--n-per-class": dict(type=int, default=None),
        "--labels": dict(default=None),
        "--latent-dim": dict(type=int, default=None),
        "--speakers": dict(type=int, default=None),
        "--sessions": dict(type=int, default=None),
        "--noise-sigma": dict(type=float, default=None),
        "--speaker-sigma": dict(type=float, default=None),
        "--view-noise-sigma": dict(type=float, default=None),
        "--jitter-sigma": dict(type=float, default=None),
        "--view-dims": dict(default=None),
        "--ood-labels": dict(default=None),
        "--n-per-ood-class": dict(type=int, default=None),
    })
    add("extract-mel", cmd_extract_mel, {
        "--wav-dir": dict(required=True),
        "--out": dict(required=True),
        "--seconds": dict(type=float, default=None),
    })
    add("extract-para", cmd_extract_para, {
        "--wav-dir": dict(required=True),
        "--out": dict(required=True),
    })
    add("pretrain", cmd_pretrain, {
        **common_train,
        "--views": dict(default=None),
        "--tau": dict(type=float, default=None),
        "--fold": dict(default=None),
        "--out": dict(required=True),
    })
    add("finetune", cmd_finetune, {
        **common_train,
        "--view": dict(required=True),
        "--from": dict(default=None, dest="from"),
        "--fold": dict(type=int, default=None),
        "--freeze": dict(action="store_true", default=None),
        "--p": dict(type=float, default=None),
        "--repeats": dict(type=int, default=None),
        "--plateau-factor": dict(type=float, default=None),
        "--plateau-epochs": dict(type=int, default=None),
        "--out": dict(required=True),
    })
    add("eval", cmd_eval, {
        "--manifest": dict(required=True),
        "--checkpoint": dict(required=True),
        "--fold": dict(type=int, default=None),
        "--split": dict(default=None),
    })
    add("sparse", cmd_sparse, {
        **common_train,
        "--view": dict(required=True),
        "--from": dict(required=True, dest="from"),
        "--fold": dict(type=int, default=None),
        "--p-grid": dict(default=None),
        "--repeats": dict(type=int, default=None),
        "--freeze": dict(action="store_true", default=None),
        "--plateau-factor": dict(type=float, default=None),
        "--plateau-epochs": dict(type=int, default=None),
        "--out": dict(required=True),
    })
    add("grid", cmd_grid, {
        **common_train,
        "--views": dict(default=None),
        "--pretrain-views": dict(default=None),
        "--taus": dict(default=None),
        "--freeze-options": dict(default=None),
        "--fold": dict(default=None),
        "--pretrain-epochs": dict(type=int, default=None),
        "--pretrain-patience": dict(type=int, default=None),
        "--finetune-batch-size": dict(type=int, default=None),
        "--out": dict(required=True),
    })
    add("pwcca", cmd_pwcca, {
        "--a": dict(required=True),
        "--b": dict(required=True),
        "--out": dict(default=None),
    })
    add("export-reps", cmd_export_reps, {
        "--manifest": dict(required=True),
        "--checkpoint": dict(required=True),
        "--view": dict(required=True),
        "--out": dict(required=True),
        "--split": dict(default=None),
        "--fold": dict(type=int, default=None),
    })
    add("report", cmd_report, {
        "--run": dict(required=True),
        "--out": dict(default=None),
    })
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = Options(args)
        return args.func(opts)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_EXIT
    except ContractError as e:
        # contract violations surface bad configuration, not runtime faults
        print(f"error: {e}", file=sys.stderr)
        return USAGE_EXIT
    except PairviewError as e:
        print(f"error: {e}", file=sys.stderr)
        return FAILURE_EXIT


if __name__ == "__main__":
    sys.exit(main())
