"""Command-line interface.

Subcommands: train, calibrate, index-build, index-import, evaluate, run-case,
serve. Exit codes: 0 ok, 1 usage error, 2 data/validation error, 3 runtime
error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional

from .config import SystemConfig, load_config
from .errors import ClinTriageError, ValidationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="clintriage",
                     description="Symptom triage and treatment-suggestion pipeline")
    parser.add_argument("--config", default=None,
                        help="path to a JSON config file (defaults to bundled data)")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="enable info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("train", help="train the classifier and write the checkpoint")

    p_cal = sub.add_parser("calibrate",
                           help="calibrate the triage threshold on the validation split")
    p_cal.add_argument("--target", type=float, default=None,
                       help="target flag rate (default from config)")

    sub.add_parser("index-build",
                   help="embed the dialogue corpus and write the embedding file")

    p_imp = sub.add_parser("index-import",
                           help="validate an external embedding file and install it")
    p_imp.add_argument("file", help="embedding file to import")

    sub.add_parser("evaluate", help="run the evaluation bundle and write reports")

    p_run = sub.add_parser("run-case", help="run one case and print the outcome JSON")
    p_run.add_argument("--text", required=True, help="free-text symptoms")
    p_run.add_argument("--id", default="cli-case", help="case id")
    p_run.add_argument("--temperature", type=float, default=None)
    p_run.add_argument("--spo2", type=float, default=None)
    p_run.add_argument("--heart-rate", type=float, default=None)
    p_run.add_argument("--age", type=float, default=None)
    p_run.add_argument("--sex", default=None, choices=["male", "female", "unspecified"])
    p_run.add_argument("--reference", default=None,
                       help="reference treatment text for scoring")

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default=None)
    p_serve.add_argument("--port", type=int, default=None)
    return parser


def _cmd_train(config: SystemConfig) -> int:
    from .pipeline import train_from_config

    model, history, train_ds, val_ds = train_from_config(config)
    last = history[-1]
    print(f"trained on {len(train_ds)} records, validated on {len(val_ds)}")
    print(f"final epoch: train_loss={last['train_loss']:.5f} "
          f"val_loss={last['val_loss']:.5f} val_acc={last['val_acc']:.4f}")
    print(f"checkpoint: {config.resolve(config.paths.model)}")
    print(f"history: {config.resolve(config.paths.history)}")
    return EXIT_OK


def _cmd_calibrate(config: SystemConfig, target: Optional[float]) -> int:
    from .pipeline import calibrate_from_config

    payload = calibrate_from_config(config, target)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_index_build(config: SystemConfig) -> int:
    from .classifier import load_checkpoint
    from .preprocess import load_synonyms
    from . import retrieval

    model = load_checkpoint(config.resolve(config.paths.model))
    synonyms = None
    if config.paths.synonyms:
        synonyms = load_synonyms(config.resolve(config.paths.synonyms))
    corpus = retrieval.load_corpus_jsonl(config.resolve(config.paths.corpus))
    embedder = retrieval.make_builtin_embedder(model.featurizer, synonyms)
    index = retrieval.build_index(corpus, embedder,
                                  embed_fields=config.retrieval.embed_fields)
    retrieval.save_embeddings(index, config.resolve(config.paths.embeddings))
    print(f"indexed {len(index)} entries at dimension {index.dimension}")
    print(f"embeddings: {config.resolve(config.paths.embeddings)}")
    return EXIT_OK


def _cmd_index_import(config: SystemConfig, file: str) -> int:
    from . import retrieval

    index = retrieval.load_external_embeddings(file)
    retrieval.save_embeddings(index, config.resolve(config.paths.embeddings))
    print(f"imported {len(index)} vectors at dimension {index.dimension} "
          f"(provenance: {index.provenance})")
    return EXIT_OK


def _cmd_evaluate(config: SystemConfig) -> int:
    from .pipeline import evaluate_from_config

    bundle = evaluate_from_config(config)
    cls = bundle["classification"]
    print(f"accuracy={cls['accuracy']:.4f} macro_f1={cls['macro_f1']:.4f} "
          f"val_size={bundle['val_size']}")
    if bundle.get("flag_rate") is not None:
        print(f"flag_rate={bundle['flag_rate']:.4f}")
    if bundle.get("retrieval"):
        r = bundle["retrieval"]
        print(f"P@{r['k']}={r['precision_at_k']:.4f} MRR={r['mrr']:.4f} "
              f"({r['queries']} queries)")
    print(f"reports: {config.resolve(config.paths.reports_dir)}")
    return EXIT_OK


def _cmd_run_case(config: SystemConfig, args: argparse.Namespace) -> int:
    from .domain import PatientRecord, Vitals
    from .pipeline import PipelineEngine, outcome_to_dict

    engine = PipelineEngine.from_config(config)
    vitals = Vitals(temperature=args.temperature, spo2=args.spo2,
                    heart_rate=args.heart_rate, age=args.age, sex=args.sex)
    vitals.validate()
    record = PatientRecord(id=args.id, symptom_text=args.text, vitals=vitals)
    outcome = engine.run_case(record, reference=args.reference)
    print(json.dumps(outcome_to_dict(outcome, engine.model.label_set), indent=2))
    return EXIT_OK if outcome.status != "failed" else EXIT_RUNTIME


def _cmd_serve(config: SystemConfig, host: Optional[str], port: Optional[int]) -> int:
    import uvicorn

    from .pipeline import PipelineEngine
    from .service import create_app

    engine = PipelineEngine.from_config(config)
    app = create_app(engine)
    uvicorn.run(app, host=host or config.service.host,
                port=port or config.service.port, log_level="warning")
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        if args.command == "train":
            return _cmd_train(config)
        if args.command == "calibrate":
            return _cmd_calibrate(config, args.target)
        if args.command == "index-build":
            return _cmd_index_build(config)
        if args.command == "index-import":
            return _cmd_index_import(config, args.file)
        if args.command == "evaluate":
            return _cmd_evaluate(config)
        if args.command == "run-case":
            return _cmd_run_case(config, args)
        if args.command == "serve":
            return _cmd_serve(config, args.host, args.port)
        parser.error(f"unknown command {args.command!r}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ClinTriageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
