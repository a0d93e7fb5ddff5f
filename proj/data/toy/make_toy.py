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

"""Regenerates the bundled toy corpus, table model and dataset.

The outputs are committed; running this again reproduces them exactly.
"""

import json
import random

V = 8
rng = random.Random(20240611)


def peaked_row(top):
    # most mass on `top`, the rest spread unevenly
    rest = [rng.random() + 0.05 for _ in range(V)]
    rest[top] = 0.0
    scale = 0.45 / sum(rest)
    row = [round(x * scale, 6) for x in rest]
    row[top] = round(1.0 - sum(row), 6)
    return row


# first-order chain driving both the corpus and the table model
successor = [rng.randrange(V) for _ in range(V)]
chain = {t: peaked_row(successor[t]) for t in range(V)}

tokens = [0]
for _ in range(799):
    row = chain[tokens[-1]]
    tokens.append(rng.choices(range(V), weights=row)[0])

with open("corpus.txt", "w") as f:
    f.write("# toy corpus drawn from a peaked first-order chain\n")
    f.write(f"#vocab_size: {V}\n")
    for i in range(0, len(tokens), 20):
        f.write(" ".join(map(str, tokens[i:i + 20])) + "\n")

table = {
    "vocab_size": V,
    "name": "toy-table",
    "default": [round(1.0 / V, 6) for _ in range(V - 1)] + [round(1.0 - (V - 1) * round(1.0 / V, 6), 6)],
    "entries": [{"context": [t], "probs": chain[t]} for t in range(V)],
}
with open("table.json", "w") as f:
    json.dump(table, f, indent=1)
    f.write("\n")

PREFIX, SUFFIX = 4, 3
with open("dataset.jsonl", "w") as f:
    for i in range(12):
        if i < 8:
            start = rng.randrange(len(tokens) - PREFIX - SUFFIX)
            window = tokens[start:start + PREFIX + SUFFIX]
            origin = "corpus"
        else:
            window = [rng.randrange(V) for _ in range(PREFIX + SUFFIX)]
            origin = "random"
        rec = {"id": f"toy-{i:02d}", "prefix": window[:PREFIX],
               "suffix": window[PREFIX:], "tags": {"origin": origin}}
        f.write(json.dumps(rec, separators=(",", ":")) + "\n")
