"""Multi-view contrastive pre-training for speech emotion recognition.

The package is organised around a small numpy-backed autodiff substrate
(``tensor``, ``optim``), audio feature extraction (``audio``, ``dsp``), a
manifest/MVF data layer (``data``, ``mvf``, ``synth``), the view encoders and
contrastive objective (``encoders``, ``contrastive``), training loops and
experiment runners (``training``), alignment/statistics (``analysis``), and
the ``pairview`` CLI (``cli``).
"""

from .tensor import Tensor, Parameter, apply_primitive, backward, grad_check, no_grad
from .optim import Adam
from .contrastive import (
    ContrastiveConfig,
    cosine_similarity_matrix,
    nt_xent_directed,
    pair_loss,
    pairwise_multiview_loss,
)
from .mvf import mvf_read, mvf_write
from .data import (
    LabelMap,
    Manifest,
    SparseLabelConfig,
    UtteranceRecord,
    filter_by_labels,
    load_manifest,
    make_cv_splits,
    sample_sparse_labels,
    save_manifest,
)
from .synth import SynthConfig, synth_generate
from .audio import Waveform, pad_or_trim, read_audio
from .dsp import (
    MelConfig,
    MelSpec,
    PARA_FEATURE_NAMES,
    estimate_f0,
    mel_spectrogram,
    paralinguistic_vector,
)
from .encoders import (
    ClassifierHead,
    ClassifierModel,
    EncoderSpec,
    MlpEncoder,
    MultiViewModel,
    ProjectionHead,
    SpecCnnEncoder,
    W2v2PointwiseEncoder,
    build_classifier,
    build_encoder,
    build_projection_head,
)
from .checkpoint import Checkpoint, load_checkpoint, restore_into, save_checkpoint
from .training import (
    FinetuneConfig,
    MetricsReport,
    PretrainConfig,
    TrainHistory,
    evaluate,
    finetune,
    pretrain,
    run_sparse_experiment,
    run_temperature_grid,
)
from .analysis import (
    AlignmentReport,
    SignificanceResult,
    cca,
    export_representations,
    mann_whitney_u,
    mean_ci95,
    pwcca,
)

__version__ = "0.1.0"
