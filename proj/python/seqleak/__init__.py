#
# Copyright 2026 The seqleak Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""Extraction-probability metrics for language models (C++ core)."""

from ._core import (  # noqa: F401
    ConfigError,
    DatasetError,
    Error,
    InfeasibleError,
    LanguageModel,
    ModelError,
    NGramModel,
    ProtocolError,
    TableModel,
    __version__,
    classify_trend,
    cumulative_isp,
    effective_distribution,
    estimate_leak_freq,
    exact_sample_log_probability,
    exact_sample_probability,
    extraction_rate,
    is_memorized_greedy,
    leakage_curve,
    n_isp,
    n_isp_bruteforce,
    run_cli,
    token_probabilities,
    train_ngram,
)
