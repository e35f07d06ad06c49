"""Block representation, normalization, manifests and data collection."""

from __future__ import annotations

from cutmpc.dataset.blocks import (
    Block,
    BlockSequence,
    blockify,
    reconstruct_positions,
    relative_positions,
)
from cutmpc.dataset.collect import (
    TrainingData,
    collect_dataset,
    load_training_data,
    sample_trial_setup,
)
from cutmpc.dataset.manifest import DatasetManifest, TrialEntry, split, split_indices
from cutmpc.dataset.normalization import (
    NormStats,
    apply_norm,
    fit_norm_stats,
    invert_norm,
    normalize_sequence,
)


__all__ = [
    "Block",
    "BlockSequence",
    "DatasetManifest",
    "NormStats",
    "TrainingData",
    "TrialEntry",
    "apply_norm",
    "blockify",
    "collect_dataset",
    "fit_norm_stats",
    "invert_norm",
    "load_training_data",
    "normalize_sequence",
    "reconstruct_positions",
    "relative_positions",
    "sample_trial_setup",
    "split",
    "split_indices",
]
