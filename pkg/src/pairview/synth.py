"""Synthetic multi-view dataset generator.

Each utterance draws a shared latent (class mean + noise). Every view
observes it through a fixed seeded nonlinear mixing of an extended per-view
latent [shared; nuisance; private-class; speaker], where the nuisance block
is loud view-private variation, the private block is a weak view-specific
class signal, and the speaker block is a per-view speaker signature. The
construction pins down the qualitative regime of interest: with all labels
the data is linearly separable from the raw views, but a handful of labels
cannot tell nuisance or speaker directions from class directions (and the
test session holds unseen speakers), whereas cross-view alignment on
unlabeled data strips both because neither is shared between views.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Manifest, UtteranceRecord, save_manifest
from .mvf import mvf_write

DEFAULT_VIEW_DIMS: dict[str, tuple[int, ...]] = {
    "w2v2": (13, 6, 64),
    "spec": (64, 16),
    "para": (42,),
}

DEFAULT_LABELS = ("neutral", "angry", "sad", "happy")
OOD_LABELS = ("frustrated", "surprised", "fearful", "disgusted", "calm", "bored")


@dataclass
class SynthConfig:
    n_per_class: int = 200
    labels: tuple[str, ...] = DEFAULT_LABELS
    latent_dim: int = 8
    n_speakers: int = 10
    n_sessions: int = 5
    view_dims: dict[str, tuple[int, ...]] = field(
        default_factory=lambda: dict(DEFAULT_VIEW_DIMS)
    )
    noise_sigma: float = 0.4        # shared-latent per-utterance spread
    speaker_dim: int = 4            # per-view speaker signature block
    speaker_sigma: float = 1.2
    nuisance_dim: int = 16          # view-private structured variation
    nuisance_sigma: float = 1.6
    private_dim: int = 4            # view-private class signal
    private_scale: float = 0.5
    private_noise: float = 0.3
    view_noise_sigma: float = 0.15  # observation noise added after mixing
    jitter_sigma: float = 0.15      # temporal modulation of sequence views
    ood_labels: tuple[str, ...] = ()  # extra classes for unlabeled pre-training
    n_per_ood_class: int = 0

    @property
    def all_labels(self) -> tuple[str, ...]:
        return self.labels + self.ood_labels

    @property
    def n_classes(self) -> int:
        return len(self.all_labels)


def _class_means(rng: np.random.Generator, cfg: SynthConfig) -> np.ndarray:
    means = rng.normal(size=(cfg.n_classes, cfg.latent_dim))
    dists = [
        float(np.linalg.norm(means[i] - means[j]))
        for i in range(cfg.n_classes)
        for j in range(i + 1, cfg.n_classes)
    ]
    floor = 2.0 * cfg.noise_sigma
    if min(dists) < floor:
        means *= floor / min(dists)
    return means


class _ViewMixer:
    """Fixed per-view nonlinear projection of the extended latent."""

    def __init__(self, rng: np.random.Generator, cfg: SynthConfig, dims: tuple[int, ...]):
        self.dims = dims
        # feature axis: the vector itself (rank 1), mel bins (rank 2), or the
        # trailing feature dim of a (layers, frames, feat) stack (rank 3)
        feat = dims[0] if len(dims) <= 2 else dims[-1]
        n_layers = dims[0] if len(dims) == 3 else 1
        ext = cfg.latent_dim + cfg.nuisance_dim + cfg.private_dim + cfg.speaker_dim
        self.w = rng.normal(scale=1.0 / np.sqrt(ext), size=(n_layers, ext, feat))
        self.b = rng.normal(scale=0.1, size=(n_layers, feat))
        # one private class prototype per class, this view only
        self.private_means = cfg.private_scale * rng.normal(
            size=(cfg.n_classes, cfg.private_dim))
        # how this view renders each speaker
        self.speaker_offsets = cfg.speaker_sigma * rng.normal(
            size=(cfg.n_speakers, cfg.speaker_dim))

    def emit(self, rng: np.random.Generator, z: np.ndarray, class_idx: int,
             speaker_idx: int, cfg: SynthConfig) -> np.ndarray:
        nuisance = rng.normal(scale=cfg.nuisance_sigma, size=cfg.nuisance_dim)
        private = self.private_means[class_idx] + rng.normal(
            scale=cfg.private_noise, size=cfg.private_dim)
        ext = np.concatenate([z, nuisance, private, self.speaker_offsets[speaker_idx]])
        base = np.tanh(np.einsum("lkf,k->lf", self.w, ext) + self.b)  # (layers, feat)
        if len(self.dims) == 1:
            out = base[0] + rng.normal(scale=cfg.view_noise_sigma, size=self.dims)
        elif len(self.dims) == 2:
            frames = self.dims[-1]
            jitter = 1.0 + rng.normal(scale=cfg.jitter_sigma, size=frames)
            out = base[0][:, None] * jitter[None, :]
            out += rng.normal(scale=cfg.view_noise_sigma, size=out.shape)
        else:
            n_layers, frames, feat = self.dims
            jitter = 1.0 + rng.normal(scale=cfg.jitter_sigma, size=(n_layers, frames))
            out = base[:, None, :] * jitter[:, :, None]
            out += rng.normal(scale=cfg.view_noise_sigma, size=out.shape)
        return out.astype(np.float32)


def synth_generate(cfg: SynthConfig, seed: int, out_dir) -> Manifest:
    """Write one synthetic dataset (manifest + MVF files) under ``out_dir``.

    The same (cfg, seed) always produces bit-identical files.
    """
    out_dir = Path(out_dir)
    feat_dir = out_dir / "feats"
    feat_dir.mkdir(parents=True, exist_ok=True)

    root = np.random.SeedSequence((int(seed), 0x53_59_4E))
    struct_seed, sample_seed = root.spawn(2)
    struct_rng = np.random.default_rng(struct_seed)
    means = _class_means(struct_rng, cfg)
    mixers = {
        name: _ViewMixer(struct_rng, cfg, dims)
        for name, dims in sorted(cfg.view_dims.items())
    }

    sample_rng = np.random.default_rng(sample_seed)
    records: list[UtteranceRecord] = []
    uid = 0
    counts = [cfg.n_per_class] * len(cfg.labels) + [cfg.n_per_ood_class] * len(cfg.ood_labels)
    for ci, (label, count) in enumerate(zip(cfg.all_labels, counts)):
        for i in range(count):
            speaker_idx = i % cfg.n_speakers
            session = speaker_idx % cfg.n_sessions + 1
            z = means[ci] + sample_rng.normal(scale=cfg.noise_sigma, size=cfg.latent_dim)
            rid = f"utt{uid:04d}"
            uid += 1
            view_paths = {}
            for name in sorted(cfg.view_dims):
                values = mixers[name].emit(sample_rng, z, ci, speaker_idx, cfg)
                rel = f"feats/{rid}.{name}.mvf"
                mvf_write(out_dir / rel, values)
                view_paths[name] = rel
            records.append(UtteranceRecord(rid, session, f"spk{speaker_idx:02d}", label, view_paths))

    manifest = Manifest(records=records, views=dict(sorted(cfg.view_dims.items())),
                        labels=list(cfg.all_labels), root=out_dir)
    save_manifest(manifest, out_dir / "manifest.txt")
    return manifest
