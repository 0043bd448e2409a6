# Copyright (c) 2026 The asgscore Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Auxiliary speakers graph scoring for speaker verification."""

from asgscore._asgscore import (
    AsgError,
    EdgeScorerParams,
    cohort_normalize,
    contribution_weights,
    cosine,
    edge_score,
    eer,
    fixed_point,
    generate_speakers,
    load_embeddings,
    pair_score,
    refine,
    save_embeddings,
    train_ghosts,
    weight_matrix,
)

__all__ = [
    "AsgError",
    "EdgeScorerParams",
    "cohort_normalize",
    "contribution_weights",
    "cosine",
    "edge_score",
    "eer",
    "fixed_point",
    "generate_speakers",
    "load_embeddings",
    "pair_score",
    "refine",
    "save_embeddings",
    "train_ghosts",
    "weight_matrix",
]
