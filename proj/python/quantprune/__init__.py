# SPDX-License-Identifier: Apache-2.0
"""Quantization-aware visual token scoring and pruning."""

from quantprune._core import (  # noqa: F401
    ConfigError,
    DataError,
    FormatError,
    IoError,
    __version__,
    adversarial_instance,
    eval_downstream_error,
    fuse_scores,
    gen_synthetic_tokens,
    group_quant_error,
    hybrid_sensitivity,
    metric_score,
    minmax_normalize,
    outlier_intensity,
    partition_groups,
    prune,
    quantize_asymmetric,
    quantized_matmul_proxy,
    select_topk,
    semantic_score_cosine,
    simulate_symmetric,
)

METRICS = (
    "linf_norm",
    "l1_norm",
    "l2_norm",
    "variance",
    "tokenwise_absmax",
    "clip_absmax",
    "groupwise_absmax",
    "outlier_intensity",
    "combine",
)
