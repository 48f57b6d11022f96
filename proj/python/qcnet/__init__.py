# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2026 The qcnet Authors
"""Quotient-complex crystal property models."""

from ._qcnet import (
    EDGE_FEATURE_DIM,
    HIDDEN_DIM,
    TRIANGLE_FEATURE_DIM,
    VERTEX_FEATURE_DIM,
    AtomFeatureTable,
    Edge,
    Error,
    Model,
    ModelConfig,
    PeriodicGraph,
    QuotientComplex,
    Structure,
    TrainConfig,
    Triangle,
    betti,
    brute_force_neighbors,
    build_complex,
    compute_metrics,
    kfold_split,
    neighbor_list,
    raw_features,
    rbf_expand,
    train,
    verify_theorem,
)

__version__ = "0.1.0"
