#!/usr/bin/env python3
# Copyright 2026 The normforge Authors
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

"""Builds the 12-concept fixture and its expected results.

    generate.py                      base fixture + expected.json
    generate.py --responses T.tsv    triadic responses for the triplets in T.tsv

Expectations are computed here from the design tables, independently of the
C++ implementation.
"""
import argparse
import json
import random
import re
from pathlib import Path

HERE = Path(__file__).resolve().parent

CONCEPTS = ["dog", "cat", "horse", "eagle", "sparrow", "salmon",
            "shark", "car", "truck", "bicycle", "apple", "banana"]

FEATURES = [
    "has four legs", "has fur", "barks", "meows", "has a tail", "is a pet",
    "has hooves", "can be ridden", "has wings", "has feathers", "can fly",
    "lays eggs", "has a beak", "lives in water", "has fins", "has scales",
    "is a predator", "has wheels", "has an engine", "is a vehicle",
    "has pedals", "carries cargo", "is made of metal", "is a fruit",
    "is sweet", "is yellow", "grows on trees", "is red", "is edible",
    "has seeds",
]

# variant phrase -> canonical feature
VARIANTS = {
    "has 4 legs": "has four legs", "is furry": "has fur",
    "has a motor": "has an engine", "flies": "can fly",
    "has wing": "has wings", "is tasty": "is sweet",
    "swims in water": "lives in water", "has tires": "has wheels",
    "is a pet animal": "is a pet", "can be eaten": "is edible",
}

# concept -> list of (phrase, participants)
ELICITATION = {
    "dog": [("has four legs", "p1 p2"), ("has 4 legs", "p3"), ("barks", "p1 p2 p4"),
            ("has fur", "p2"), ("is furry", "p5"), ("is a pet", "p1 p3"), ("has a tail", "p4")],
    "cat": [("has four legs", "p1"), ("meows", "p1 p2 p3"), ("has fur", "p1 p3"),
            ("is a pet", "p1"), ("is a pet animal", "p2")],
    "horse": [("has hooves", "p1 p4"), ("can be ridden", "p2"), ("has four legs", "p2")],
    "eagle": [("has wings", "p2"), ("has feathers", "p1"), ("can fly", "p1"),
              ("is a predator", "p2 p3"), ("flies", "p3")],
    "sparrow": [("has wings", "p1"), ("has wing", "p3"), ("has a beak", "p2"),
                ("can fly", "p1 p2"), ("lays eggs", "p4")],
    "salmon": [("lives in water", "p1"), ("has fins", "p1 p2"), ("swims in water", "p2"),
               ("is edible", "p1 p3"), ("has scales", "p4")],
    "shark": [("lives in water", "p1 p2"), ("has fins", "p3"), ("is a predator", "p1")],
    "car": [("has wheels", "p1 p2"), ("has an engine", "p1 p3"), ("has a motor", "p2"),
            ("is a vehicle", "p3")],
    "truck": [("has wheels", "p1"), ("carries cargo", "p1 p2"), ("has tires", "p3"),
              ("is made of metal", "p4")],
    "bicycle": [("has wheels", "p2"), ("has pedals", "p1 p2"), ("can be ridden", "p3")],
    "apple": [("is a fruit", "p1 p2"), ("is red", "p1"), ("grows on trees", "p3"),
              ("can be eaten", "p2"), ("has seeds", "p4")],
    "banana": [("is a fruit", "p1"), ("is yellow", "p1 p2"), ("is sweet", "p1 p2"),
               ("is tasty", "p3")],
}

STAGE1 = "mock-llama"
STAGE2 = "mock-gpt4"

# Absent cells with scripted answers: (concept, feature) -> (stage1 raw, stage2 raw).
# Everything else answers "False" for both models.
CASCADE = {
    ("dog", "can be ridden"): ("True", "No"),
    ("cat", "has a tail"): ("True.", "True"),
    ("cat", "is a predator"): ("yes", "False."),
    ("horse", "has a tail"): ("True", "Yes, it does."),
    ("horse", "has fur"): ("TRUE", "true"),
    ("horse", "is edible"): ("Yes", "False"),
    ("horse", "is a vehicle"): ("I would say that it is True", "True"),
    ("eagle", "has a beak"): ("True", "True"),
    ("eagle", "lays eggs"): ("Yes!", "Yes"),
    ("sparrow", "has feathers"): ("True", "True"),
    ("sparrow", "is a pet"): ("Not really, no.", "True"),
    ("salmon", "lays eggs"): ("The answer is True", "True"),
    ("salmon", "is a predator"): ("True", "True"),
    ("shark", "has scales"): ("True", "yes"),
    ("shark", "is edible"): ("True", "True"),
    ("shark", "has a tail"): ("True", "True"),
    ("car", "is made of metal"): ("True", "True"),
    ("car", "carries cargo"): ("True", "No."),
    ("truck", "has an engine"): ("True", "True"),
    ("truck", "is a vehicle"): ("Yes", "True"),
    ("bicycle", "is a vehicle"): ("True", "True"),
    ("bicycle", "is made of metal"): ("True", "True"),
    ("bicycle", "has an engine"): ("False", "True"),
    ("apple", "is sweet"): ("True", "True"),
    ("apple", "is yellow"): ("True", "No."),
    ("banana", "is edible"): ("True", "True"),
    ("banana", "grows on trees"): ("True", "True"),
    ("banana", "has seeds"): ("True", "False"),
}

# Human verification judgments: (concept, feature) -> answers of h1..h6.
JUDGMENTS = {
    ("dog", "barks"): "TTTTT.", ("cat", "meows"): "TTTTTT", ("eagle", "can fly"): "TTTTT.",
    ("cat", "has a tail"): "TTTTTT", ("horse", "has a tail"): "TTTTT.",
    ("shark", "is edible"): "TTSTTT", ("car", "has wheels"): "TTTTT.",
    ("truck", "has an engine"): "TTTTTT", ("banana", "is yellow"): "TTTTT.",
    ("apple", "is sweet"): "TTTTST", ("horse", "is edible"): "TTTTT.",
    ("sparrow", "is a pet"): "TTTTT.",
    ("car", "has feathers"): "FFFFF.", ("apple", "barks"): "FFFFFF",
    ("truck", "meows"): "FFFFF.", ("dog", "can be ridden"): "FFFFFF",
    ("cat", "is a predator"): "FFFFF.", ("car", "carries cargo"): "FFFFSF",
    ("banana", "has seeds"): "FFFFF.", ("bicycle", "has an engine"): "FFFFFF",
    ("horse", "is a vehicle"): "FFFFF.", ("salmon", "has wheels"): "FFFFF.",
    ("eagle", "is red"): "TFTTT.", ("shark", "has scales"): "TTFTT.",
    ("apple", "is yellow"): "FTFFT.", ("sparrow", "has fins"): "TTTT..",
}

WORD_VECTORS = {
    # animal, pet, bird, water, vehicle, fruit
    "dog": [0.9, 0.8, 0.0, 0.0, 0.1, 0.0], "cat": [0.9, 0.9, 0.1, 0.0, 0.0, 0.0],
    "horse": [0.9, 0.3, 0.0, 0.0, 0.4, 0.0], "eagle": [0.7, 0.0, 0.9, 0.0, 0.0, 0.0],
    "sparrow": [0.7, 0.2, 0.9, 0.0, 0.0, 0.1], "salmon": [0.6, 0.0, 0.0, 0.9, 0.0, 0.2],
    "shark": [0.7, 0.0, 0.0, 0.9, 0.0, 0.0], "car": [0.0, 0.0, 0.0, 0.0, 0.9, 0.0],
    "truck": [0.0, 0.0, 0.0, 0.1, 0.9, 0.0], "bicycle": [0.0, 0.2, 0.0, 0.0, 0.8, 0.0],
    "apple": [0.0, 0.0, 0.0, 0.0, 0.0, 0.9], "banana": [0.0, 0.1, 0.0, 0.0, 0.0, 0.9],
}


def parse_oracle(raw):
    """Table-driven reading of a model answer: first five words, punctuation off."""
    table = {"true": True, "yes": True, "false": False, "no": False}
    for word in raw.split()[:5]:
        w = re.sub(r"[^\w]", "", word).lower()
        if w in table:
            return table[w]
    return False


def vectors():
    dim = 32
    out = {}
    for k, f in enumerate(FEATURES):
        v = [0.0] * dim
        v[k] = 1.0
        out[f] = v
    for j, (variant, base) in enumerate(sorted(VARIANTS.items())):
        v = list(out[base])
        v[30 + j % 2] = 0.2
        out[variant] = v
    return dim, out


def fmt(x):
    return repr(float(x)) if x != int(x) else str(int(x)) if abs(x) < 1e15 else repr(x)


def human_cells():
    cells = set()
    for c, items in ELICITATION.items():
        for phrase, _ in items:
            cells.add((c, VARIANTS.get(phrase, phrase)))
    return cells


def write_base():
    lines = ["# participant\tconcept\tphrase"]
    for c in CONCEPTS:
        for phrase, who in ELICITATION[c]:
            for p in who.split():
                label = "Dog" if (c == "dog" and p == "p4") else c
                lines.append(f"{p}\t{label}\t{phrase}")
    (HERE / "elicitation.tsv").write_text("\n".join(lines) + "\n")

    dim, vecs = vectors()
    lines = ["# mock embedding script", f"dimension\t{dim}"]
    for phrase in sorted(vecs):
        lines.append(phrase + "\t" + ",".join(fmt(x) for x in vecs[phrase]))
    (HERE / "embeddings.tsv").write_text("\n".join(lines) + "\n")

    human = human_cells()
    lines = ["# model\tconcept\tfeature\tanswer", "default\tFalse"]
    for (c, f), (a1, a2) in sorted(CASCADE.items()):
        assert (c, f) not in human, (c, f)
        lines.append(f"{STAGE1}\t{c}\t{f}\t{a1}")
        lines.append(f"{STAGE2}\t{c}\t{f}\t{a2}")
    # Human cells are never queried by imputation; evaluation may ask about them.
    for c, f in sorted(human):
        lines.append(f"*\t{c}\t{f}\tTrue")
    (HERE / "chat_script.tsv").write_text("\n".join(lines) + "\n")

    lines = ["# participant\tconcept\tfeature\tresponse"]
    names = {"T": "true", "F": "false", "S": "skip"}
    for (c, f), answers in JUDGMENTS.items():
        for i, a in enumerate(answers):
            if a != ".":
                lines.append(f"h{i + 1}\t{c}\t{f}\t{names[a]}")
    (HERE / "judgments.tsv").write_text("\n".join(lines) + "\n")

    lines = [f"{len(WORD_VECTORS)} 6"]
    for w, v in WORD_VECTORS.items():
        lines.append(w + " " + " ".join(fmt(x) for x in v))
    (HERE / "word_vectors.vec").write_text("\n".join(lines) + "\n")

    lines = ["# concept\tfeature"]
    for c in CONCEPTS[:5]:
        for f in FEATURES[:4]:
            lines.append(f"{c}\t{f}")
    (HERE / "verification_items.tsv").write_text("\n".join(lines) + "\n")

    # ---- expectations ----
    absent = len(CONCEPTS) * len(FEATURES) - len(human)
    stage1_true = [k for k, (a1, _) in CASCADE.items() if parse_oracle(a1)]
    final_true = sorted(k for k in stage1_true if parse_oracle(CASCADE[k][1]))

    gold = {}
    for k, answers in JUDGMENTS.items():
        votes = [a for a in answers if a in "TF"]
        if len(votes) >= 5 and len(set(votes)) == 1:
            gold[k] = votes[0] == "T"

    def answer(model, k):
        if k in CASCADE:
            return CASCADE[k][0 if model == STAGE1 else 1]
        return "True" if k in human else "False"

    evals = {}
    for model in (STAGE1, STAGE2):
        raw = {k: parse_oracle(answer(model, k)) for k in gold}
        conf = {k: raw[k] and parse_oracle(answer(STAGE2, k)) for k in gold}
        for name, preds in (("raw", raw), ("reverified", conf)):
            h = sum(1 for k in gold if gold[k] and preds[k])
            m = sum(1 for k in gold if gold[k] and not preds[k])
            fa = sum(1 for k in gold if not gold[k] and preds[k])
            cr = sum(1 for k in gold if not gold[k] and not preds[k])
            evals[f"{model}/{name}"] = [h, m, fa, cr]

    full = human | set(final_true)
    per_concept_h = [sum(1 for f in FEATURES if (c, f) in human) for c in CONCEPTS]
    per_concept_f = [sum(1 for f in FEATURES if (c, f) in full) for c in CONCEPTS]
    per_feature_h = [sum(1 for c in CONCEPTS if (c, f) in human) for f in FEATURES]
    per_feature_f = [sum(1 for c in CONCEPTS if (c, f) in full) for f in FEATURES]
    expected = {
        "concepts": CONCEPTS,
        "features": sorted(FEATURES),
        "raw_phrases": len(FEATURES) + len(VARIANTS),
        "label_collisions": ["Dog"],
        "human_cells": sorted([c, f] for c, f in human),
        "ai_cells": [[c, f] for c, f in final_true],
        "absent_cells": absent,
        "stage1_true": len(stage1_true),
        "final_true": len(final_true),
        "gold_pairs": len(gold),
        "gold_true": sum(gold.values()),
        "eval_counts": evals,
        "human_mean_features": sum(per_concept_h) / len(CONCEPTS),
        "full_mean_features": sum(per_concept_f) / len(CONCEPTS),
        "human_singleton_fraction": sum(1 for n in per_feature_h if n == 1) / len(FEATURES),
        "full_singleton_fraction": sum(1 for n in per_feature_f if n == 1) / len(FEATURES),
    }
    (HERE / "expected.json").write_text(json.dumps(expected, indent=2) + "\n")


def write_responses(triplets_path):
    """Seven participants; the majority follows the AI-space prediction except
    on every fifth triplet, where it follows the human-space prediction."""
    rows = [l.split("\t") for l in Path(triplets_path).read_text().splitlines()
            if l and not l.startswith("#")]
    rng = random.Random(1234)
    lines = ["# participant\ttriplet_id\tchoice"]
    majority = []
    for t, row in enumerate(rows):
        human_pred, ai_pred = row[4], row[5]
        pick = human_pred if t % 5 == 4 else ai_pred
        if pick == "Tie":
            pick = "A"
        other = "B" if pick == "A" else "A"
        n_major = 4 + rng.randrange(4)  # 4..7 of 7
        answers = [pick] * n_major + [other] * (7 - n_major)
        rng.shuffle(answers)
        for p, a in enumerate(answers):
            lines.append(f"r{p + 1}\t{t}\t{a}")
        majority.append(pick)
    (HERE / "triadic_responses.tsv").write_text("\n".join(lines) + "\n")
    exp = json.loads((HERE / "expected.json").read_text())
    agree = {}
    for space, col in (("human", 4), ("ai", 5)):
        k = sum(1 for t, row in enumerate(rows) if row[col] == majority[t])
        n = sum(1 for row in rows if row[col] != "Tie")
        agree[space] = [k, n]
    exp["triplets"] = len(rows)
    exp["agreement"] = agree
    (HERE / "expected.json").write_text(json.dumps(exp, indent=2) + "\n")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--responses", help="triplets.tsv produced by mine-triplets")
    args = ap.parse_args()
    if args.responses:
        write_responses(args.responses)
    else:
        write_base()
