import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pairview.data import filter_by_labels
from pairview.synth import DEFAULT_LABELS, OOD_LABELS, SynthConfig, synth_generate

SUITE_SEED = 11


def small_synth_config() -> SynthConfig:
    """A fast dataset for unit tests: 5 sessions, 100 records."""
    return SynthConfig(
        n_per_class=25,
        view_dims={"w2v2": (5, 4, 16), "spec": (16, 8), "para": (10,)},
    )


def acceptance_synth_config() -> SynthConfig:
    """The seeded suite for direction-level replication: an 800-utterance
    4-class target set plus out-of-distribution classes that only ever feed
    unlabeled pre-training (the full-corpus vs 4-class-subset protocol)."""
    return SynthConfig(n_per_class=200, ood_labels=OOD_LABELS[:4], n_per_ood_class=300)


@pytest.fixture(scope="session")
def small_suite(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth_small")
    manifest = synth_generate(small_synth_config(), SUITE_SEED, out)
    return manifest


@pytest.fixture(scope="session")
def acceptance_full_suite(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth_acceptance")
    return synth_generate(acceptance_synth_config(), SUITE_SEED, out)


@pytest.fixture(scope="session")
def acceptance_suite(acceptance_full_suite):
    """The 4-class, ~800-utterance target subset used for fine-tuning."""
    return filter_by_labels(acceptance_full_suite, set(DEFAULT_LABELS))
