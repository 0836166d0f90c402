# Copyright 2026 The cprune Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Structured filter and cluster pruning."""

from cprune._core import (  # noqa: F401
    ConfigError,
    Error,
    FormatError,
    LaneAlignedModel,
    LatencyModel,
    LookupError,
    MeasuredTraceModel,
    Network,
    NumericError,
    PruneError,
    ShapeError,
    TemporalModel,
    WeightDims,
    cluster_prune,
    compute_gain,
    count_macs,
    count_params,
    detect_period,
    fidelity,
    filter_prune,
    format_percent,
    layer_scores,
    load_model,
    mobilenet_from_widths,
    optimal_cluster_size,
    parse_model,
    prunable_layers,
    remove_filters,
    run_cli,
    save_model,
    serialize_model,
    synth_model,
)

__version__ = "0.1.0"
