"""Pre-training and fine-tuning loops, metrics, and experiment runners.

Everything here is deterministic given (seed, manifest, config): shuffles,
initialisation, and sampling all derive from seeded generators, and batch
reductions run in fixed order. Test-session data is only ever touched by the
final evaluation call, never by an update or stopping decision.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .checkpoint import Checkpoint, load_checkpoint, restore_into, save_checkpoint
from .contrastive import pairwise_multiview_loss
from .data import (
    LabelMap,
    Manifest,
    SparseLabelConfig,
    UtteranceRecord,
    load_view_matrix,
    make_cv_splits,
    sample_sparse_labels,
)
from .encoders import (
    ClassifierModel,
    EncoderSpec,
    Module,
    MultiViewModel,
    build_classifier,
    build_encoder,
    build_projection_head,
)
from .errors import ContractError, SchemaError
from .optim import Adam
from .tensor import Tensor, backward, gather_cols, log_sum_exp_rows, mean_all, no_grad, sub
from .analysis import mann_whitney_u, mean_ci95


def mix_seed(*parts) -> int:
    """Stable derived seed from heterogeneous parts."""
    ints = []
    for p in parts:
        if isinstance(p, str):
            ints.extend(p.encode())
        else:
            ints.append(int(p))
    return int(np.random.SeedSequence(tuple(ints)).generate_state(1)[0])


def spec_for_view(view: str, dims: tuple[int, ...], output_dim: int = 128) -> EncoderSpec:
    """Map a view's dims to its encoder family by rank."""
    kind = {3: "w2v2_pointwise", 2: "spec_cnn", 1: "vector_mlp"}.get(len(dims))
    if kind is None:
        raise ContractError(f"no encoder for rank-{len(dims)} view {view!r}")
    return EncoderSpec(view=view, kind=kind, input_dims=tuple(dims), output_dim=output_dim)


# ---------------------------------------------------------------------------
# configs / reports
# ---------------------------------------------------------------------------


@dataclass
class PretrainConfig:
    views: tuple[str, ...]
    tau: float = 0.5
    batch_size: int = 128
    max_epochs: int = 100
    patience: int = 30
    lr: float = 0.001
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 2:
            raise ContractError("contrastive batches need at least 2 instances")
        if self.patience > self.max_epochs:
            raise ContractError("patience exceeds the epoch budget")


@dataclass
class FinetuneConfig:
    view: str
    checkpoint: str | None = None
    freeze: bool = False
    lr: float = 0.001
    plateau_factor: float = 0.9
    plateau_epochs: int = 5
    max_epochs: int = 100
    patience: int = 20
    label_fraction: float = 1.0
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise ContractError("learning rate must be positive")
        if not 0 < self.label_fraction <= 1:
            raise ContractError("label fraction must be in (0, 1]")


@dataclass
class MetricsReport:
    uar: float
    wa: float
    confusion: np.ndarray
    per_class_recall: dict[str, float]
    classes: list[str]
    excluded_classes: list[str]
    fold: int
    seed: int


@dataclass
class TrainHistory:
    metric_name: str
    train_values: list[float] = field(default_factory=list)
    val_values: list[float] = field(default_factory=list)
    lr_values: list[float] = field(default_factory=list)
    best_epoch: int = 0
    stop_epoch: int = 0

    def write(self, path):
        lines = []
        for i, (tr, va, lr) in enumerate(zip(self.train_values, self.val_values, self.lr_values), 1):
            lines.append(f"epoch {i} train_{self.metric_name} {tr!r}")
            lines.append(f"epoch {i} val_{self.metric_name} {va!r}")
            lines.append(f"epoch {i} lr {lr!r}")
        lines.append(f"best_epoch {self.best_epoch}")
        lines.append(f"stop_epoch {self.stop_epoch}")
        Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class FinetuneResult:
    model: ClassifierModel
    val_metrics: MetricsReport
    test_metrics: MetricsReport
    history: TrainHistory


# ---------------------------------------------------------------------------
# shared pieces
# ---------------------------------------------------------------------------


def _mapped_label(r: UtteranceRecord, label_map: LabelMap | None) -> str | None:
    return label_map.apply(r.label) if label_map else r.label


def class_list(manifest: Manifest, label_map: LabelMap | None = None) -> list[str]:
    mapped = {label_map.apply(l) if label_map else l for l in manifest.labels}
    return sorted(mapped)


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean softmax cross-entropy against integer class labels."""
    return mean_all(sub(log_sum_exp_rows(logits), gather_cols(logits, labels)))


def evaluate_arrays(model: ClassifierModel, x: np.ndarray, y: np.ndarray,
                    classes: list[str], fold: int = -1, seed: int = -1) -> MetricsReport:
    """Confusion-matrix metrics from argmax predictions.

    Classes absent from the evaluation set are excluded from the recall mean
    (recall is undefined on zero support) and listed in the report.
    """
    c = len(classes)
    confusion = np.zeros((c, c), dtype=np.int64)
    with no_grad():
        for start in range(0, len(y), 256):
            preds = model.predict(Tensor(x[start : start + 256]))
            for t, p in zip(y[start : start + 256], preds):
                confusion[t, p] += 1
    support = confusion.sum(axis=1)
    recalls = {}
    excluded = []
    for i, name in enumerate(classes):
        if support[i] == 0:
            excluded.append(name)
        else:
            recalls[name] = float(confusion[i, i] / support[i])
    if not recalls:
        raise ContractError("evaluation set has no labeled instances")
    uar = float(np.mean([recalls[k] for k in sorted(recalls)]))
    wa = float(np.trace(confusion) / confusion.sum())
    return MetricsReport(uar=uar, wa=wa, confusion=confusion, per_class_recall=recalls,
                         classes=classes, excluded_classes=excluded, fold=fold, seed=seed)


def evaluate(model: ClassifierModel, manifest: Manifest, records: list[UtteranceRecord],
             label_map: LabelMap | None = None, fold: int = -1, seed: int = -1) -> MetricsReport:
    classes = class_list(manifest, label_map)
    labeled = [r for r in records if _mapped_label(r, label_map) is not None]
    if not labeled:
        raise ContractError("no labeled records to evaluate")
    x = load_view_matrix(manifest, labeled, model.view)
    y = np.array([classes.index(_mapped_label(r, label_map)) for r in labeled])
    return evaluate_arrays(model, x, y, classes, fold=fold, seed=seed)


def _snapshot(params) -> list[np.ndarray]:
    return [p.data.copy() for p in params]


def _restore(params, snap) -> None:
    for p, s in zip(params, snap):
        p.data[...] = s


# ---------------------------------------------------------------------------
# pre-training
# ---------------------------------------------------------------------------


def build_pretrain_model(manifest: Manifest, views, seed: int) -> MultiViewModel:
    encoders: dict[str, Module] = {}
    heads = {}
    for view in views:
        spec = spec_for_view(view, manifest.views[view])
        encoders[view] = build_encoder(spec, seed)
        heads[view] = build_projection_head(view, seed)
    return MultiViewModel(encoders, heads)


def _contrastive_epoch_loss(model: MultiViewModel, arrays: dict[str, np.ndarray],
                            idx_batches: list[np.ndarray], tau: float) -> float:
    losses = []
    with no_grad():
        for idx in idx_batches:
            zs = [model.project(v, Tensor(arrays[v][idx])) for v in model.views]
            losses.append(pairwise_multiview_loss(zs, tau).item())
    return float(np.mean(losses))


def _full_batches(n: int, batch_size: int, order: np.ndarray | None = None) -> list[np.ndarray]:
    """Index batches of exactly batch_size (remainder dropped); if the set is
    smaller than one batch, a single all-of-it batch."""
    idx = order if order is not None else np.arange(n)
    if n < batch_size:
        return [idx]
    return [idx[s : s + batch_size] for s in range(0, n - batch_size + 1, batch_size)]


def pretrain_fold(manifest: Manifest, fold: int, cfg: PretrainConfig
                  ) -> tuple[MultiViewModel, TrainHistory]:
    """Contrastive pre-training on one fold's training sessions.

    Labels are never read. Minibatches hold all views of the same instances;
    the final incomplete batch of each epoch is dropped so every loss sees a
    constant candidate count.
    """
    train_sessions, val_session, _ = make_cv_splits(manifest, fold)
    train_records = manifest.by_session(train_sessions)
    val_records = manifest.by_session([val_session])
    if cfg.batch_size > len(train_records):
        raise ContractError(
            f"batch size {cfg.batch_size} exceeds the {len(train_records)}-record training set"
        )

    views = list(cfg.views)
    for v in views:
        if v not in manifest.views:
            raise ContractError(f"view {v!r} is not in the manifest")
    train_arrays = {v: load_view_matrix(manifest, train_records, v) for v in views}
    val_arrays = {v: load_view_matrix(manifest, val_records, v) for v in views}

    model = build_pretrain_model(manifest, views, mix_seed(cfg.seed, fold, "init"))
    params = model.parameters()
    opt = Adam(params, lr=cfg.lr)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, fold, 0x5F)))

    history = TrainHistory(metric_name="loss")
    best_val = np.inf
    best_snap = _snapshot(params)
    best_epoch = 0
    bad_epochs = 0
    n_train = len(train_records)
    val_batches = _full_batches(len(val_records), cfg.batch_size)

    for epoch in range(1, cfg.max_epochs + 1):
        order = shuffle_rng.permutation(n_train)
        batch_losses = []
        for idx in _full_batches(n_train, cfg.batch_size, order):
            zs = [model.project(v, Tensor(train_arrays[v][idx])) for v in views]
            loss = pairwise_multiview_loss(zs, cfg.tau)
            opt.zero_grad()
            backward(loss)
            opt.step()
            batch_losses.append(loss.item())
        val_loss = _contrastive_epoch_loss(model, val_arrays, val_batches, cfg.tau)
        history.train_values.append(float(np.mean(batch_losses)))
        history.val_values.append(val_loss)
        history.lr_values.append(opt.lr)
        history.stop_epoch = epoch
        if val_loss < best_val:
            best_val = val_loss
            best_snap = _snapshot(params)
            best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= max(1, cfg.patience):
                break

    _restore(params, best_snap)
    history.best_epoch = best_epoch
    return model, history


def _pmap(fn, tasks: list, workers: int) -> list:
    """Run tasks via a process pool when workers > 1; results keep task order,
    so worker count never changes any output."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _pretrain_task(args):
    manifest, fold, cfg = args
    return pretrain_fold(manifest, fold, cfg)


def pretrain(manifest: Manifest, folds, cfg: PretrainConfig, out_dir=None,
             workers: int = 1) -> dict[int, tuple[MultiViewModel, TrainHistory]]:
    """Run pre-training over the requested folds; optionally save artifacts."""
    folds = list(folds)
    outputs = _pmap(_pretrain_task, [(manifest, fold, cfg) for fold in folds], workers)
    results = {}
    for fold, (model, history) in zip(folds, outputs):
        results[fold] = (model, history)
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            save_pretrain_checkpoint(out / f"pretrain_fold{fold}.ckpt", manifest, model, cfg,
                                     fold, history)
            history.write(out / f"pretrain_fold{fold}.history")
    return results


def save_pretrain_checkpoint(path, manifest: Manifest, model: MultiViewModel,
                             cfg: PretrainConfig, fold: int, history: TrainHistory) -> None:
    meta = {
        "kind": "pretrain",
        "views": model.views,
        "specs": {v: model.encoders[v].spec.to_dict() for v in model.views},
        "tau": cfg.tau,
        "seed": cfg.seed,
        "fold": fold,
        "best_epoch": history.best_epoch,
        "best_val_loss": history.val_values[history.best_epoch - 1] if history.val_values else None,
    }
    save_checkpoint(path, model.parameters(), meta)


# ---------------------------------------------------------------------------
# fine-tuning
# ---------------------------------------------------------------------------


def _encoder_from_checkpoint(ckpt: Checkpoint, view: str, seed: int) -> Module:
    specs = ckpt.meta.get("specs", {})
    if view not in specs:
        raise SchemaError(f"checkpoint has no encoder for view {view!r}")
    encoder = build_encoder(EncoderSpec.from_dict(specs[view]), seed)
    restore_into(encoder.params, ckpt)
    return encoder


def finetune(manifest: Manifest, fold: int, cfg: FinetuneConfig,
             label_map: LabelMap | None = None,
             train_ids: list[str] | None = None) -> FinetuneResult:
    """Supervised training of one view with an optional pre-trained encoder.

    The projection head is dropped: a fresh linear classifier sits directly
    on the encoder output. ``freeze`` stops all encoder updates. The learning
    rate decays by plateau_factor after every plateau_epochs consecutive
    epochs without a validation-UAR improvement. ``train_ids`` overrides the
    sparse sampling with an explicit subset (used for paired experiments).
    Records without labels are ignored for supervised parts.
    """
    classes = class_list(manifest, label_map)
    train_sessions, val_session, test_session = make_cv_splits(manifest, fold)

    def labeled(records):
        return [r for r in records if _mapped_label(r, label_map) is not None]

    train_records = labeled(manifest.by_session(train_sessions))
    val_records = labeled(manifest.by_session([val_session]))
    test_records = labeled(manifest.by_session([test_session]))
    if not train_records or not val_records or not test_records:
        raise ContractError("train/val/test parts all need labeled records")

    if train_ids is not None:
        wanted = set(train_ids)
        train_records = [r for r in train_records if r.id in wanted]
        if not train_records:
            raise ContractError("train_ids selected no records")
    elif cfg.label_fraction < 1.0:
        train_records = sample_sparse_labels(
            train_records, SparseLabelConfig(cfg.label_fraction),
            seed=mix_seed(cfg.seed, fold, "labels"), label_map=label_map)

    init_seed = mix_seed(cfg.seed, fold, "finetune")
    if cfg.checkpoint is not None:
        ckpt = cfg.checkpoint if isinstance(cfg.checkpoint, Checkpoint) else load_checkpoint(cfg.checkpoint)
        encoder = _encoder_from_checkpoint(ckpt, cfg.view, init_seed)
    else:
        encoder = build_encoder(spec_for_view(cfg.view, manifest.views[cfg.view]), init_seed)
    head = build_classifier(len(classes), init_seed, in_dim=encoder.spec.output_dim)
    model = ClassifierModel(encoder, head)

    if cfg.freeze:
        for p in encoder.params:
            p.requires_grad = False
    trainable = model.parameters(include_encoder=not cfg.freeze)
    opt = Adam(trainable, lr=cfg.lr)

    x_train = load_view_matrix(manifest, train_records, cfg.view)
    y_train = np.array([classes.index(_mapped_label(r, label_map)) for r in train_records])
    x_val = load_view_matrix(manifest, val_records, cfg.view)
    y_val = np.array([classes.index(_mapped_label(r, label_map)) for r in val_records])

    shuffle_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, fold, 0xF7)))
    history = TrainHistory(metric_name="uar")
    best_uar = -np.inf
    all_params = model.parameters(include_encoder=True)
    best_snap = _snapshot(all_params)
    best_epoch = 0
    bad_epochs = 0

    for epoch in range(1, cfg.max_epochs + 1):
        order = shuffle_rng.permutation(len(train_records))
        epoch_losses = []
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            logits = model.logits(Tensor(x_train[idx]))
            loss = cross_entropy(logits, y_train[idx])
            opt.zero_grad()
            backward(loss)
            opt.step()
            epoch_losses.append(loss.item())
        val_uar = evaluate_arrays(model, x_val, y_val, classes).uar
        history.train_values.append(float(np.mean(epoch_losses)))
        history.val_values.append(val_uar)
        history.lr_values.append(opt.lr)
        history.stop_epoch = epoch
        if val_uar > best_uar:
            best_uar = val_uar
            best_snap = _snapshot(all_params)
            best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs % cfg.plateau_epochs == 0:
                opt.lr *= cfg.plateau_factor
            if bad_epochs >= max(1, cfg.patience):
                break

    _restore(all_params, best_snap)
    history.best_epoch = best_epoch
    val_metrics = evaluate_arrays(model, x_val, y_val, classes, fold=fold, seed=cfg.seed)
    x_test = load_view_matrix(manifest, test_records, cfg.view)
    y_test = np.array([classes.index(_mapped_label(r, label_map)) for r in test_records])
    test_metrics = evaluate_arrays(model, x_test, y_test, classes, fold=fold, seed=cfg.seed)
    return FinetuneResult(model=model, val_metrics=val_metrics, test_metrics=test_metrics,
                          history=history)


def save_finetune_checkpoint(path, model: ClassifierModel, cfg: FinetuneConfig,
                             fold: int, classes: list[str]) -> None:
    meta = {
        "kind": "finetune",
        "view": model.view,
        "specs": {model.view: model.encoder.spec.to_dict()},
        "classes": classes,
        "freeze": cfg.freeze,
        "seed": cfg.seed,
        "fold": fold,
    }
    save_checkpoint(path, model.parameters(include_encoder=True), meta)


# ---------------------------------------------------------------------------
# experiment runners
# ---------------------------------------------------------------------------


@dataclass
class SparseRun:
    fraction: float
    arm: str
    repeat: int
    seed: int
    test_uar: float


@dataclass
class SparseSummary:
    fraction: float
    arm: str
    mean_uar: float
    ci_half_width: float
    n: int


@dataclass
class SparseResult:
    runs: list[SparseRun]
    summaries: list[SparseSummary]
    significance: list[tuple[float, float, float, str]]  # (p_fraction, U, p_value, method)

    def uars(self, fraction: float, arm: str) -> list[float]:
        return [r.test_uar for r in self.runs if r.fraction == fraction and r.arm == arm]


SPARSE_FRACTIONS = (0.02, 0.05, 0.10, 0.25)


def _sparse_task(args) -> SparseRun:
    manifest, fold, label_map, base, fraction, rep, seed, ids, arm, ckpt = args
    cfg = replace(base, checkpoint=ckpt, label_fraction=1.0, seed=seed)
    result = finetune(manifest, fold, cfg, label_map=label_map, train_ids=ids)
    return SparseRun(fraction, arm, rep, seed, result.test_metrics.uar)


def run_sparse_experiment(manifest: Manifest, fold: int, view: str, checkpoint,
                          fractions=SPARSE_FRACTIONS, repeats: int = 10,
                          base_cfg: FinetuneConfig | None = None,
                          label_map: LabelMap | None = None,
                          workers: int = 1) -> SparseResult:
    """Paired sparse-annotation comparison of pre-trained vs from-scratch.

    For every (fraction, repeat) one label subset is drawn and handed to both
    arms, so the comparison is paired by construction. The pre-trained arm
    loads ``checkpoint``; the scratch arm trains the same architecture from
    a fresh seeded init.
    """
    base = base_cfg or FinetuneConfig(view=view)
    ckpt = checkpoint if isinstance(checkpoint, Checkpoint) else load_checkpoint(checkpoint)
    train_sessions, _, _ = make_cv_splits(manifest, fold)
    train_records = [r for r in manifest.by_session(train_sessions)
                     if _mapped_label(r, label_map) is not None]

    tasks = []
    for fraction in fractions:
        for rep in range(repeats):
            seed = mix_seed(base.seed, "sparse", int(round(fraction * 10000)), rep)
            subset = sample_sparse_labels(train_records, SparseLabelConfig(fraction),
                                          seed=seed, label_map=label_map)
            ids = [r.id for r in subset]
            for arm, ck in (("pretrained", ckpt), ("scratch", None)):
                tasks.append((manifest, fold, label_map, base, fraction, rep, seed, ids, arm, ck))

    runs = _pmap(_sparse_task, tasks, workers)
    return summarize_sparse_runs(runs)


def write_sparse_csv(result: SparseResult, runs_path, summary_path, significance_path) -> None:
    with open(runs_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["p", "arm", "repeat", "seed", "test_uar"])
        for r in result.runs:
            w.writerow([r.fraction, r.arm, r.repeat, r.seed, repr(r.test_uar)])
    with open(summary_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["p", "arm", "mean_uar", "ci_half_width", "n"])
        for s in result.summaries:
            w.writerow([s.fraction, s.arm, repr(s.mean_uar), repr(s.ci_half_width), s.n])
    with open(significance_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["p", "u_statistic", "p_value", "method"])
        for fraction, u, p, method in result.significance:
            w.writerow([fraction, repr(u), repr(p), method])


@dataclass
class GridCell:
    method: str       # "supervised" | "pretrained"
    tau: float | None
    frozen: bool | None
    view: str
    val_uar: float
    val_wa: float
    test_uar: float
    test_wa: float


@dataclass
class GridResult:
    cells: list[GridCell]
    rows: list[dict]  # aggregated per (method, tau, frozen) with rank columns


def _rank_desc(scores: np.ndarray) -> np.ndarray:
    """Rank 1 = best score; ties get the average rank."""
    order = np.argsort(-scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    pos = 0
    while pos < len(scores):
        end = pos
        while end + 1 < len(scores) and scores[order[end + 1]] == scores[order[pos]]:
            end += 1
        ranks[order[pos : end + 1]] = 0.5 * (pos + end) + 1.0
        pos = end + 1
    return ranks


def average_ranks(rows: list[dict], views: list[str]) -> None:
    """Attach per-row average ranks over the val and test metric columns."""
    for split in ("val", "test"):
        cols = [f"{v}_{split}_{m}" for v in views for m in ("uar", "wa")]
        col_ranks = []
        for col in cols:
            scores = np.array([row[col] for row in rows])
            col_ranks.append(_rank_desc(scores))
        per_row = np.mean(col_ranks, axis=0)
        for row, r in zip(rows, per_row):
            row[f"rank_{split}"] = float(r)


def aggregate_grid_rows(cells: list[GridCell], views: list[str]) -> list[dict]:
    """Fold-averaged rows per (method, tau, frozen), with rank columns."""
    keys: list[tuple] = []
    grouped: dict[tuple, list[GridCell]] = {}
    for c in cells:
        key = (c.method, c.tau, c.frozen)
        if key not in grouped:
            grouped[key] = []
            keys.append(key)
        grouped[key].append(c)
    rows = []
    for method, tau, frozen in keys:
        row = {"method": method, "tau": tau, "frozen": frozen}
        mine = grouped[(method, tau, frozen)]
        for v in views:
            vc = [c for c in mine if c.view == v]
            row[f"{v}_val_uar"] = float(np.mean([c.val_uar for c in vc]))
            row[f"{v}_val_wa"] = float(np.mean([c.val_wa for c in vc]))
            row[f"{v}_test_uar"] = float(np.mean([c.test_uar for c in vc]))
            row[f"{v}_test_wa"] = float(np.mean([c.test_wa for c in vc]))
        rows.append(row)
    average_ranks(rows, views)
    return rows


def run_temperature_grid(manifest: Manifest, taus, freeze_options, views, folds,
                         pretrain_cfg: PretrainConfig, finetune_cfg: FinetuneConfig,
                         label_map: LabelMap | None = None, workers: int = 1) -> GridResult:
    """Pre-train per temperature, fine-tune per (tau, freeze, view), and rank.

    ``views`` are the fine-tuned/reported views and must be a subset of the
    pre-training views in ``pretrain_cfg``. Adds a supervised-from-scratch
    baseline row. Metrics are averaged over folds; ranks are computed per
    metric column (descending, average ties) and averaged per row separately
    for validation and test columns.
    """
    views = list(views)
    if not set(views) <= set(pretrain_cfg.views):
        raise ContractError(f"grid views {views} not all pre-trained ({pretrain_cfg.views})")
    cells: list[GridCell] = []

    for view in views:
        for fold in folds:
            cfg = replace(finetune_cfg, view=view, checkpoint=None, freeze=False)
            res = finetune(manifest, fold, cfg, label_map=label_map)
            cells.append(GridCell("supervised", None, None, view,
                                  res.val_metrics.uar, res.val_metrics.wa,
                                  res.test_metrics.uar, res.test_metrics.wa))

    for tau in taus:
        pt_cfg = replace(pretrain_cfg, tau=tau)
        pretrained = pretrain(manifest, folds, pt_cfg, workers=workers)
        for frozen in freeze_options:
            for view in views:
                for fold in folds:
                    model, history = pretrained[fold]
                    ckpt = _in_memory_checkpoint(manifest, model, pt_cfg, fold, history)
                    cfg = replace(finetune_cfg, view=view, checkpoint=ckpt, freeze=frozen)
                    res = finetune(manifest, fold, cfg, label_map=label_map)
                    cells.append(GridCell("pretrained", tau, frozen, view,
                                          res.val_metrics.uar, res.val_metrics.wa,
                                          res.test_metrics.uar, res.test_metrics.wa))

    return GridResult(cells=cells, rows=aggregate_grid_rows(cells, views))


def _in_memory_checkpoint(manifest: Manifest, model: MultiViewModel, cfg: PretrainConfig,
                          fold: int, history: TrainHistory) -> Checkpoint:
    return Checkpoint(
        params={p.name: p.data.copy() for p in model.parameters()},
        meta={"kind": "pretrain",
              "views": model.views,
              "specs": {v: model.encoders[v].spec.to_dict() for v in model.views},
              "tau": cfg.tau, "seed": cfg.seed, "fold": fold},
    )


def write_grid_csv(result: GridResult, path, views: list[str]) -> None:
    cols = ["method", "tau", "frozen"]
    for v in views:
        cols += [f"{v}_val_uar", f"{v}_val_wa", f"{v}_test_uar", f"{v}_test_wa"]
    include_ranks = len(result.rows) >= 2
    if include_ranks:
        cols += ["rank_val", "rank_test"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(cols)
        for row in result.rows:
            out = []
            for c in cols:
                v = row.get(c)
                out.append(repr(v) if isinstance(v, float) else ("" if v is None else v))
            w.writerow(out)


def write_grid_cells_csv(cells: list[GridCell], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["method", "tau", "frozen", "view", "val_uar", "val_wa", "test_uar", "test_wa"])
        for c in cells:
            w.writerow([c.method, "" if c.tau is None else repr(c.tau),
                        "" if c.frozen is None else int(c.frozen), c.view,
                        repr(c.val_uar), repr(c.val_wa), repr(c.test_uar), repr(c.test_wa)])


def read_grid_cells_csv(path) -> list[GridCell]:
    cells = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            cells.append(GridCell(
                method=row["method"],
                tau=float(row["tau"]) if row["tau"] else None,
                frozen=bool(int(row["frozen"])) if row["frozen"] else None,
                view=row["view"],
                val_uar=float(row["val_uar"]), val_wa=float(row["val_wa"]),
                test_uar=float(row["test_uar"]), test_wa=float(row["test_wa"])))
    return cells


def read_sparse_runs_csv(path) -> list[SparseRun]:
    runs = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            runs.append(SparseRun(float(row["p"]), row["arm"], int(row["repeat"]),
                                  int(row["seed"]), float(row["test_uar"])))
    return runs


def summarize_sparse_runs(runs: list[SparseRun]) -> SparseResult:
    """Rebuild summaries and significance from raw per-repeat results."""
    fractions = sorted({r.fraction for r in runs})
    summaries = []
    significance = []
    for fraction in fractions:
        per_arm = {arm: [r.test_uar for r in runs if r.fraction == fraction and r.arm == arm]
                   for arm in ("pretrained", "scratch")}
        n = len(per_arm["pretrained"])
        for arm in ("pretrained", "scratch"):
            mean, half = mean_ci95(per_arm[arm])
            summaries.append(SparseSummary(fraction, arm, mean, half, n))
        sig = mann_whitney_u(per_arm["pretrained"], per_arm["scratch"])
        significance.append((fraction, sig.u, sig.p_value, sig.method))
    return SparseResult(runs=runs, summaries=summaries, significance=significance)
