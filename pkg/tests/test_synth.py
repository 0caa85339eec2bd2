"""Synthetic generator: determinism, balance, and linear separability."""

import numpy as np

from pairview.data import load_manifest, load_view_matrix
from pairview.synth import SynthConfig, synth_generate

from conftest import small_synth_config


def test_balanced_labels_and_counts(small_suite):
    counts = {}
    for r in small_suite.records:
        counts[r.label] = counts.get(r.label, 0) + 1
    assert counts == {l: 25 for l in ("neutral", "angry", "sad", "happy")}
    assert small_suite.sessions == [1, 2, 3, 4, 5]


def test_same_seed_bit_identical(tmp_path):
    cfg = SynthConfig(n_per_class=5, view_dims={"para": (10,)})
    m1 = synth_generate(cfg, 3, tmp_path / "a")
    m2 = synth_generate(cfg, 3, tmp_path / "b")
    assert (tmp_path / "a/manifest.txt").read_text() == (tmp_path / "b/manifest.txt").read_text()
    for r in m1.records:
        a = (tmp_path / "a" / r.view_paths["para"]).read_bytes()
        b = (tmp_path / "b" / r.view_paths["para"]).read_bytes()
        assert a == b


def test_different_seed_differs(tmp_path):
    cfg = SynthConfig(n_per_class=5, view_dims={"para": (10,)})
    synth_generate(cfg, 3, tmp_path / "a")
    synth_generate(cfg, 4, tmp_path / "b")
    assert (tmp_path / "a/feats/utt0000.para.mvf").read_bytes() != \
           (tmp_path / "b/feats/utt0000.para.mvf").read_bytes()


def test_manifest_loads_and_validates(small_suite):
    reloaded = load_manifest(small_suite.root / "manifest.txt")
    assert len(reloaded.records) == len(small_suite.records)


def _assert_class_means_differ(manifest):
    for view in manifest.views:
        block = load_view_matrix(manifest, manifest.records, view)
        flat = block.reshape(len(block), -1)
        means = {}
        for label in manifest.labels:
            idx = [i for i, r in enumerate(manifest.records) if r.label == label]
            means[label] = flat[idx].mean(axis=0)
        labels = list(means)
        for i in range(len(labels)):
            for j in range(i + 1, len(labels)):
                assert np.linalg.norm(means[labels[i]] - means[labels[j]]) > 0


def test_per_class_view_means_differ(small_suite):
    _assert_class_means_differ(small_suite)


def test_per_class_view_means_differ_across_seeds(tmp_path):
    cfg = SynthConfig(n_per_class=10, view_dims={"spec": (16, 8), "para": (10,)})
    for seed in (1, 2, 3, 4, 5):
        _assert_class_means_differ(synth_generate(cfg, seed, tmp_path / f"s{seed}"))


def _ridge_probe_uar(x, y, n_classes, lam=1e-3):
    """Closed-form one-hot ridge regression probe; independent of the
    training stack."""
    x = np.concatenate([x, np.ones((len(x), 1))], axis=1)
    onehot = np.eye(n_classes)[y]
    w = np.linalg.solve(x.T @ x + lam * np.eye(x.shape[1]), x.T @ onehot)
    preds = (x @ w).argmax(axis=1)
    recalls = [np.mean(preds[y == c] == c) for c in range(n_classes)]
    return float(np.mean(recalls))


def test_linear_probe_separability(acceptance_suite):
    m = acceptance_suite
    labels = sorted(m.labels)
    y = np.array([labels.index(r.label) for r in m.records])
    feats = []
    for view in sorted(m.views):
        block = load_view_matrix(m, m.records, view)
        if block.ndim == 4:
            block = block.mean(axis=(1, 2))
        elif block.ndim == 3:
            block = block.mean(axis=2)
        feats.append(block.reshape(len(block), -1))
    x = np.concatenate(feats, axis=1)
    uar = _ridge_probe_uar(x, y, len(labels))
    assert uar > 0.9, f"generator seed suite is not separable enough (UAR {uar:.3f})"
