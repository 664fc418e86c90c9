"""Detect view disagreement with conditional view entropy and bootstrap multi-view classifiers around it."""

from .bootstrap import BootstrapConfig, cotrain_baseline, cross_modality_bootstrap, multiview_bootstrap
from .classifier import GaussianBayesClassifier
from .dataset import (
    BACKGROUND,
    MultiViewDataset,
    MultiViewSample,
    SyntheticConfig,
    generate_synthetic,
    inject_view_disagreement,
    load_dataset,
    save_dataset,
    split_labeled_unlabeled,
)
from .density import KdeModel, conditional_prob, kde_eval, silverman_bandwidth
from .disagreement import (
    EntropyTable,
    Verdict,
    build_entropy_table,
    classify_pair,
    classify_sample,
    conditional_view_entropy,
    detection_roc,
    indicator_m,
)
from .evaluation import ccr, run_sweep, run_trial

__version__ = "0.1.0"
