"""Shared fixtures: a fast miniature pipeline setup and the full desk-scale run."""

from __future__ import annotations

import csv
import json
import os

import numpy as np
import pytest

from clintriage.config import load_config
from clintriage.pipeline import (PipelineEngine, calibrate_from_config,
                                 train_from_config)

MINI_CLASSES = {
    "alpha fever": [
        "burning fever with shaking chills", "soaked in sweat overnight",
        "fever spiking every evening", "teeth chattering chills",
    ],
    "beta rash": [
        "itchy red rash on my arms", "spreading skin rash", "raised itchy welts",
        "red blotches across my chest",
    ],
    "gamma cough": [
        "dry hacking cough", "coughing fits all night", "tickly persistent cough",
        "chesty cough with wheeze",
    ],
    "delta stomach": [
        "cramping stomach pain", "burning pain in my stomach",
        "stomach ache after meals", "gnawing belly pain",
    ],
}

MINI_DIALOGUES = [
    ("mini-fever-0", "burning fever and chills", "Rest, fluids, and paracetamol for the fever.", "alpha fever"),
    ("mini-fever-1", "fever spikes at night", "Take paracetamol and tepid sponging; return if it lasts.", "alpha fever"),
    ("mini-rash-0", "itchy spreading rash", "Apply calamine and take cetirizine for the itching rash.", "beta rash"),
    ("mini-rash-1", "red welts on skin", "Loratadine daily settles most itchy welts.", "beta rash"),
    ("mini-cough-0", "bad cough at night", "Honey, fluids, and rest for the cough; no antibiotics needed.", "gamma cough"),
    ("mini-cough-1", "cough with wheeze", "Try a salbutamol inhaler for the wheezy cough.", "gamma cough"),
    ("mini-stomach-0", "burning stomach pain", "Start omeprazole and avoid NSAIDs for stomach pain.", "delta stomach"),
    ("mini-stomach-1", "belly pain after meals", "Omeprazole before breakfast and smaller meals.", "delta stomach"),
]


def write_mini_dataset(path: str, per_class: int = 12, seed: int = 5) -> None:
    rng = np.random.default_rng(seed)
    frames = ["I have {s}.", "Suffering from {s} lately.", "My problem is {s}."]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", "text", "temperature", "spo2", "heart_rate",
                         "age", "sex"])
        for label, pool in MINI_CLASSES.items():
            for _ in range(per_class):
                k = int(rng.integers(1, 4))
                picks = [pool[i] for i in rng.choice(len(pool), size=k, replace=False)]
                text = frames[int(rng.integers(len(frames)))].format(
                    s=" and ".join(picks))
                writer.writerow([label, text, "", "", "", "", ""])


def write_mini_corpus(path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry_id, patient, doctor, disease in MINI_DIALOGUES:
            fh.write(json.dumps({"id": entry_id, "patient": patient,
                                 "doctor": doctor, "disease": disease}) + "\n")


def write_mini_config(tmp_path, threshold=None, passes: int = 8,
                      generation: dict | None = None,
                      min_score: float = 0.15) -> str:
    """Write a small self-contained config dir; returns the config path."""
    dataset = os.path.join(tmp_path, "mini.csv")
    corpus = os.path.join(tmp_path, "mini_dialogues.jsonl")
    write_mini_dataset(dataset)
    write_mini_corpus(corpus)
    config = {
        "seed": 99,
        "featurizer": {"dimension": 256},
        "paths": {
            "dataset": "mini.csv",
            "corpus": "mini_dialogues.jsonl",
            "model": "mini.ckpt",
            "embeddings": "mini_embeddings.txt",
            "calibration": "mini_calibration.json",
            "history": "mini_history.csv",
            "queue_journal": "mini_queue.jsonl",
            "reports_dir": "mini_reports",
        },
        "training": {"epochs": 6, "batch_size": 8, "trunk_hidden": 64,
                     "vit_hidden": 16, "dropout_rate": 0.15, "smote_k": 2},
        "inference": {"passes": passes, "target_flag_rate": 0.2},
        "retrieval": {"k": 3, "min_score": min_score},
    }
    if threshold is not None:
        config["inference"]["threshold"] = threshold
    if generation is not None:
        config["generation"] = generation
    path = os.path.join(tmp_path, "config.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2)
    return path


@pytest.fixture(scope="session")
def mini_assets(tmp_path_factory):
    """Trained miniature model + calibration, shared across tests."""
    tmp = tmp_path_factory.mktemp("mini")
    config_path = write_mini_config(str(tmp))
    config = load_config(config_path)
    model, history, train_ds, val_ds = train_from_config(config)
    calibration = calibrate_from_config(config)
    return {"config_path": config_path, "config": config, "model": model,
            "history": history, "train_ds": train_ds, "val_ds": val_ds,
            "calibration": calibration, "dir": str(tmp)}


def make_engine(tmp_path, mini_assets, threshold=None, generation=None,
                passes: int = 8, min_score: float = 0.15) -> PipelineEngine:
    """Fresh engine (own queue journal) reusing the session-trained mini model."""
    import shutil

    config_path = write_mini_config(str(tmp_path), threshold=threshold,
                                    passes=passes, generation=generation,
                                    min_score=min_score)
    src = mini_assets["config"]
    shutil.copy(src.resolve(src.paths.model), os.path.join(tmp_path, "mini.ckpt"))
    shutil.copy(src.resolve(src.paths.calibration),
                os.path.join(tmp_path, "mini_calibration.json"))
    return PipelineEngine.from_config(load_config(config_path))


@pytest.fixture(scope="session")
def desk_assets(tmp_path_factory):
    """Full bundled-dataset training run used by the acceptance suite."""
    import time

    tmp = tmp_path_factory.mktemp("desk")
    config = {
        "seed": 1234,
        "paths": {
            "model": "model.ckpt",
            "embeddings": "embeddings.txt",
            "calibration": "calibration.json",
            "history": "history.csv",
            "queue_journal": "queue.jsonl",
            "reports_dir": "reports",
        },
        "retrieval": {"k": 5, "min_score": 0.25},
    }
    config_path = os.path.join(str(tmp), "config.json")
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2)
    cfg = load_config(config_path)
    t0 = time.perf_counter()
    model, history, train_ds, val_ds = train_from_config(cfg)
    train_seconds = time.perf_counter() - t0
    return {"config_path": config_path, "config": cfg, "model": model,
            "history": history, "train_ds": train_ds, "val_ds": val_ds,
            "train_seconds": train_seconds, "dir": str(tmp)}
