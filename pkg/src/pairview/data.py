"""Dataset manifests, cross-validation splits, and label sampling.

A manifest is a plain text file, one record per line, so that dataset
definitions stay diff-able:

    view w2v2 3 13 12 768
    view spec 2 64 16
    view para 1 42
    labels neutral,angry,sad,happy
    utt0000|1|spk00|neutral|w2v2=feats/utt0000.w2v2.mvf;spec=...;para=...

View paths are relative to the manifest's directory. An empty label field
means the record is unlabeled (usable for pre-training only).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    ContractError,
    EmptyClassError,
    EmptyDatasetError,
    MissingViewError,
    SchemaError,
)
from .mvf import mvf_dims, mvf_read


@dataclass(frozen=True)
class UtteranceRecord:
    id: str
    session: int
    speaker: str
    label: str | None
    view_paths: dict[str, str]


@dataclass
class Manifest:
    records: list[UtteranceRecord]
    views: dict[str, tuple[int, ...]]  # view name -> dims
    labels: list[str]
    root: Path = field(default_factory=Path)

    @property
    def sessions(self) -> list[int]:
        return sorted({r.session for r in self.records})

    def view_path(self, record: UtteranceRecord, view: str) -> Path:
        return self.root / record.view_paths[view]

    def by_session(self, sessions) -> list[UtteranceRecord]:
        wanted = set(sessions)
        return [r for r in self.records if r.session in wanted]


@dataclass(frozen=True)
class LabelMap:
    """Raw-label to target-class mapping, e.g. excited -> happy."""

    mapping: dict[str, str]

    def apply(self, label: str | None) -> str | None:
        if label is None:
            return None
        return self.mapping.get(label, label)


@dataclass
class SparseLabelConfig:
    fraction: float
    seeds: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 < self.fraction <= 1:
            raise ContractError(f"label fraction must be in (0, 1], got {self.fraction}")


def save_manifest(manifest: Manifest, path) -> None:
    path = Path(path)
    lines = []
    for name, dims in manifest.views.items():
        lines.append(f"view {name} {len(dims)} " + " ".join(str(d) for d in dims))
    lines.append("labels " + ",".join(manifest.labels))
    for r in manifest.records:
        views = ";".join(f"{v}={p}" for v, p in r.view_paths.items())
        lines.append(f"{r.id}|{r.session}|{r.speaker}|{r.label or ''}|{views}")
    path.write_text("\n".join(lines) + "\n")


def _parse_manifest_text(text: str, root: Path) -> Manifest:
    views: dict[str, tuple[int, ...]] = {}
    labels: list[str] = []
    records: list[UtteranceRecord] = []
    ids = set()
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("view "):
            parts = line.split()
            if len(parts) < 4:
                raise SchemaError(f"line {ln}: malformed view declaration")
            name, rank = parts[1], int(parts[2])
            dims = tuple(int(d) for d in parts[3:])
            if len(dims) != rank or any(d <= 0 for d in dims):
                raise SchemaError(f"line {ln}: view {name} rank/dims disagree")
            views[name] = dims
        elif line.startswith("labels "):
            labels = [t for t in line[len("labels "):].split(",") if t]
        else:
            fields = line.split("|")
            if len(fields) != 5:
                raise SchemaError(f"line {ln}: expected 5 |-separated fields")
            rid, session, speaker, label, view_part = fields
            if rid in ids:
                raise SchemaError(f"line {ln}: duplicate record id {rid!r}")
            ids.add(rid)
            view_paths = {}
            for chunk in view_part.split(";"):
                if not chunk:
                    continue
                if "=" not in chunk:
                    raise SchemaError(f"line {ln}: malformed view path {chunk!r}")
                vname, vpath = chunk.split("=", 1)
                view_paths[vname] = vpath
            records.append(UtteranceRecord(rid, int(session), speaker, label or None, view_paths))
    return Manifest(records=records, views=views, labels=labels, root=root)


def load_manifest(path, check_files: bool = True) -> Manifest:
    """Parse and validate a manifest; every referenced view file must exist
    and carry the cataloged dims."""
    path = Path(path)
    manifest = _parse_manifest_text(path.read_text(), root=path.parent)
    if not manifest.records:
        raise EmptyDatasetError(f"{path}: no records")
    sessions = manifest.sessions
    if sessions != list(range(1, len(sessions) + 1)):
        raise SchemaError(f"{path}: sessions {sessions} are not contiguous from 1")
    for r in manifest.records:
        for view, dims in manifest.views.items():
            if view not in r.view_paths:
                raise MissingViewError(f"record {r.id}: view {view!r} not declared")
            if check_files:
                fpath = manifest.view_path(r, view)
                if not fpath.exists():
                    raise MissingViewError(f"record {r.id}: view {view!r} file missing: {fpath}")
                actual = mvf_dims(fpath)
                if tuple(actual) != dims:
                    raise SchemaError(
                        f"record {r.id}: view {view!r} has dims {actual}, catalog says {dims}"
                    )
    return manifest


def make_cv_splits(manifest: Manifest, fold: int) -> tuple[list[int], int, int]:
    """Leave-one-session-out split: (train sessions, val session, test session).

    The test session is session[fold]; the validation session is the next
    one cyclically; everything else trains. The same split drives both
    pre-training and fine-tuning so no session leaks between stages.
    """
    sessions = manifest.sessions
    s = len(sessions)
    if s < 3:
        raise ContractError(f"need at least 3 sessions for a split, got {s}")
    if not 0 <= fold < s:
        raise ContractError(f"fold {fold} out of range for {s} sessions")
    test = sessions[fold]
    val = sessions[(fold + 1) % s]
    train = [x for x in sessions if x not in (test, val)]
    return train, val, test


def sample_sparse_labels(records: list[UtteranceRecord], cfg: SparseLabelConfig,
                         seed: int, label_map: LabelMap | None = None) -> list[UtteranceRecord]:
    """Per-class sampling of max(1, round(p * n_c)) records, seeded.

    Records are ordered by id before drawing, so the subset depends only on
    (seed, record ids), not on manifest line order. Rounding is half-up.
    """
    by_class: dict[str, list[UtteranceRecord]] = {}
    for r in sorted(records, key=lambda r: r.id):
        label = label_map.apply(r.label) if label_map else r.label
        if label is None:
            raise ContractError(f"record {r.id} has no label")
        by_class.setdefault(label, []).append(r)
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x5B13)))
    chosen: list[UtteranceRecord] = []
    for label in sorted(by_class):
        pool = by_class[label]
        if not pool:
            raise EmptyClassError(f"class {label!r} has no records")
        n_sel = max(1, int(np.floor(cfg.fraction * len(pool) + 0.5)))
        idx = rng.choice(len(pool), size=n_sel, replace=False)
        chosen.extend(pool[i] for i in sorted(idx))
    return chosen


def filter_by_labels(manifest: Manifest, keep, label_map: LabelMap | None = None) -> Manifest:
    """Keep records whose (mapped) label is in ``keep``."""
    keep = set(keep)
    if not keep:
        raise ContractError("keep set is empty")
    kept = []
    for r in manifest.records:
        label = label_map.apply(r.label) if label_map else r.label
        if label in keep:
            kept.append(r)
    if not kept:
        raise EmptyDatasetError(f"no records with labels in {sorted(keep)}")
    labels = [l for l in manifest.labels if l in keep] or sorted(keep)
    return replace(manifest, records=kept, labels=labels)


def load_view_matrix(manifest: Manifest, records: list[UtteranceRecord], view: str) -> np.ndarray:
    """Stack one view across records into an (N, *dims) float32 block."""
    dims = manifest.views[view]
    out = np.empty((len(records),) + dims, dtype=np.float32)
    for i, r in enumerate(records):
        out[i] = mvf_read(manifest.view_path(r, view))
    return out
