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

import json
import math
import os
import pathlib

import pytest

import seqleak

DATA = pathlib.Path(__file__).resolve().parents[2] / "data" / "toy"


def toy_table():
    m = seqleak.TableModel(3, [0.5, 0.3, 0.2], "toy")
    m.set_entry([0], [0.2, 0.6, 0.2])
    return m


def test_distributions():
    p = seqleak.effective_distribution([math.log(2.0), 0.0])
    assert p == pytest.approx([2 / 3, 1 / 3])
    assert seqleak.effective_distribution([0.5, 0.2, 0.1], decode="topk:1") == [1.0, 0.0, 0.0]
    with pytest.raises(seqleak.ConfigError):
        seqleak.effective_distribution([0.0, 0.0], decode="topk:0")


def test_esp_and_isp():
    m = toy_table()
    esp = seqleak.exact_sample_probability(m, [2], [0, 1])
    assert esp == pytest.approx(0.3)
    assert seqleak.token_probabilities(m, [2], [0, 1]) == pytest.approx([0.5, 0.6])
    exact = seqleak.n_isp_bruteforce(m, [2], [0, 1], 1)
    res = seqleak.n_isp(m, [2], [0, 1], 1)
    assert res["eps"] == 0.0
    assert res["value"] == pytest.approx(exact)
    assert sum(res["breakdown"].values()) == pytest.approx(exact)
    narrow = seqleak.n_isp(m, [2], [0, 1], 1, branch_width=1)
    assert narrow["value"] <= exact <= narrow["upper"] + 1e-12
    total, eps = seqleak.cumulative_isp(m, [2], [0, 1], 2)
    assert total == pytest.approx(1.0)
    assert seqleak.is_memorized_greedy(m, [2], [0, 1])


def test_models():
    g = seqleak.train_ngram([0, 1, 0, 1, 0], 2, 1.0, 2)
    assert g.conditional([0])[1] == pytest.approx(0.75)
    t = seqleak.TableModel.load(str(DATA / "table.json"))
    assert t.vocab_size == 8
    back = seqleak.TableModel.from_json(t.to_json())
    assert json.loads(back.to_json()) == json.loads(t.to_json())
    with pytest.raises(seqleak.DatasetError):
        t.next_logits([9])


def test_analysis():
    assert seqleak.extraction_rate([1, 0, 0, 0]) == 0.25
    curve = dict(seqleak.leakage_curve([1.0, 0.4, 0.05], 20))
    assert curve[1] == pytest.approx(1 / 3)
    assert curve[20] == 1.0
    assert seqleak.classify_trend([0.3, 0.5, 0.2]) == ("inverted-u-dec", False)


def test_sampling():
    m = toy_table()
    freq, se = seqleak.estimate_leak_freq(m, [2], [0, 1], trials=20000, seed=1)
    assert abs(freq - 0.3) <= 4 * se


def test_cli(tmp_path):
    code, out, err = seqleak.run_cli([
        "score", "--data", str(DATA / "dataset.jsonl"),
        "--model", "table:" + str(DATA / "table.json"), "--out", str(tmp_path)])
    assert code == 0, err
    assert (tmp_path / "score.csv").read_text().startswith("id,prefix_len")
    code, _, err = seqleak.run_cli(["score", "--data", "/nonexistent",
                                    "--model", "table:" + str(DATA / "table.json"),
                                    "--out", str(tmp_path)])
    assert code == 3
    assert json.loads(err)["error"]["kind"] == "dataset"
