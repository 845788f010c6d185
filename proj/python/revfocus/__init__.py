# Copyright 2026 The revfocus Authors.
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

"""Focus-level comparison of human and LLM peer reviews."""

from ._core import (
    DEFAULT_EPSILON,
    TOKENIZER_VERSION,
    RevfocusError,
    bleu_4,
    cohens_kappa,
    evaluate_run,
    f1_from_counts,
    load_config,
    render_radar_csv,
    render_table,
    rouge_l,
    smoothed_kl,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_EPSILON",
    "TOKENIZER_VERSION",
    "RevfocusError",
    "bleu_4",
    "cohens_kappa",
    "evaluate_run",
    "f1_from_counts",
    "load_config",
    "render_radar_csv",
    "render_table",
    "rouge_l",
    "smoothed_kl",
    "tokenize",
]
