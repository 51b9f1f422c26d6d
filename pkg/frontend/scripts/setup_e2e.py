#!/usr/bin/env python3
"""Prepare a miniature service workspace for the console e2e tests.

Usage: setup_e2e.py <workdir>

Writes a small labeled dataset and dialogue corpus, trains a model, and
emits two service configs sharing the checkpoint: one that never flags
(threshold 1e9) and one that always flags (threshold -1). Prints a JSON
object with the config paths.
"""

import csv
import json
import os
import sys

import numpy as np

CLASSES = {
    "alpha fever": [
        "burning fever with shaking chills", "soaked in sweat overnight",
        "fever spiking every evening", "teeth chattering chills",
    ],
    "beta rash": [
        "itchy red rash on my arms", "spreading skin rash",
        "raised itchy welts", "red blotches across my chest",
    ],
    "gamma cough": [
        "dry hacking cough", "coughing fits all night",
        "tickly persistent cough", "chesty cough with wheeze",
    ],
    "delta stomach": [
        "cramping stomach pain", "burning pain in my stomach",
        "stomach ache after meals", "gnawing belly pain",
    ],
}

DIALOGUES = [
    ("e2e-fever-0", "burning fever and chills", "Rest, fluids, and paracetamol for the fever.", "alpha fever"),
    ("e2e-fever-1", "fever spikes at night", "Take paracetamol and tepid sponging.", "alpha fever"),
    ("e2e-rash-0", "itchy spreading rash", "Apply calamine and take cetirizine for the itching rash.", "beta rash"),
    ("e2e-cough-0", "bad cough at night", "Honey, fluids, and rest for the cough.", "gamma cough"),
    ("e2e-stomach-0", "burning stomach pain", "Start omeprazole and avoid NSAIDs for stomach pain.", "delta stomach"),
    ("e2e-stomach-1", "belly pain after meals", "Omeprazole before breakfast and smaller meals.", "delta stomach"),
]


def main() -> int:
    workdir = sys.argv[1]
    os.makedirs(workdir, exist_ok=True)
    rng = np.random.default_rng(5)
    frames = ["I have {s}.", "Suffering from {s} lately.", "My problem is {s}."]

    dataset = os.path.join(workdir, "mini.csv")
    with open(dataset, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", "text"])
        for label, pool in CLASSES.items():
            for _ in range(12):
                k = int(rng.integers(1, 4))
                picks = [pool[i] for i in rng.choice(len(pool), size=k, replace=False)]
                writer.writerow([label, frames[int(rng.integers(len(frames)))]
                                 .format(s=" and ".join(picks))])

    corpus = os.path.join(workdir, "dialogues.jsonl")
    with open(corpus, "w", encoding="utf-8") as fh:
        for entry_id, patient, doctor, disease in DIALOGUES:
            fh.write(json.dumps({"id": entry_id, "patient": patient,
                                 "doctor": doctor, "disease": disease}) + "\n")

    def config(name: str, threshold: float, journal: str) -> str:
        body = {
            "seed": 99,
            "featurizer": {"dimension": 256},
            "paths": {
                "dataset": "mini.csv",
                "corpus": "dialogues.jsonl",
                "model": "mini.ckpt",
                "embeddings": f"embeddings-{name}.txt",
                "calibration": "calibration.json",
                "history": "history.csv",
                "queue_journal": journal,
                "reports_dir": f"reports-{name}",
            },
            "training": {"epochs": 6, "batch_size": 8, "trunk_hidden": 64,
                         "vit_hidden": 16, "dropout_rate": 0.15, "smote_k": 2},
            "inference": {"passes": 6, "threshold": threshold},
            "retrieval": {"k": 3, "min_score": 0.15},
        }
        path = os.path.join(workdir, f"config-{name}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(body, fh, indent=2)
        return path

    pass_config = config("pass", 1e9, "queue-pass.jsonl")
    flag_config = config("flag", -1.0, "queue-flag.jsonl")

    from clintriage.cli import main as cli_main

    code = cli_main(["--config", pass_config, "train"])
    if code != 0:
        return code
    print(json.dumps({"workdir": workdir, "pass_config": pass_config,
                      "flag_config": flag_config}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
