"""Feature-space dataset dissimilarity measures and a desk-scale non-IID
semi-supervised learning sandbox."""

from .analysis import (
    RunAggregate,
    aggregate,
    correlate,
    feature_density_export,
    report_csv,
    report_matrix,
    report_text,
)
from .dissimilarity import (
    DissimilarityReport,
    Histogram,
    cosine_distance,
    density_dissimilarity,
    dissimilarity,
    js_divergence,
    make_histogram,
    minkowski_dissimilarity,
    nn_minkowski,
    rank_candidates,
)
from .errors import DataError
from .features import (
    FeatureMatrix,
    LabeledFeatureSet,
    SubsampleSpec,
    load_features,
    load_labeled,
    load_labels,
    save_features,
    save_labels,
    standardize,
    subsample,
)
from .mixmatch import (
    MixMatchConfig,
    ToyModel,
    TrainingDiverged,
    augment,
    mixmatch_loss,
    mixup,
    pseudo_label,
    sharpen,
    train,
)
from .rng import Stream
from .sandbox import (
    RunData,
    SandboxConfig,
    build_run,
    check_reference_grid,
    gen_gaussian_noise,
    gen_salt_pepper,
    gen_synthetic_clusters,
    split_other_half,
)
from .signed_rank import wilcoxon_signed_rank
from .study import CellConfig, StudyResult, expand_grid, run_grid, synthetic_study

__version__ = "0.1.0"
