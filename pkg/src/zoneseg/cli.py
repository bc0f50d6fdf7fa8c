"""Command-line interface: train, predict, evaluate, agreement, encode, synth.

Exit codes: 0 on success, 1 on runtime failures (I/O, transport), 2 on
usage or validation errors. Flag defaults may be overridden by a JSON
config file (``--config``, a flat object keyed by flag name); explicit
command-line flags always win. ``ZONESEG_LOG`` sets the log level. The
effective configuration is echoed to the log before any work starts,
and every output file is written atomically, so re-running a command
with the same flags, seed, and inputs reproduces its outputs byte for
byte.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .corpus import Corpus, map_corpus, read_corpus, write_corpus
from .emails import AnnotatedEmail, Email, builtin_taxonomy, load_taxonomy, split_lines
from .encoders import ServiceEncoder, make_encoder
from .exceptions import DimensionMismatchError, ValidationError, ZonesegError
from .lemb import write_embedding_file
from .metrics import agreement_report, evaluate, render_agreement_table, render_eval_report
from .model import load_model, predict, save_model
from .synth import generate_synthetic_corpus
from .training import TrainConfig, train_on_corpora

log = logging.getLogger("zoneseg")

_DEFAULTS: dict[str, dict] = {
    "train": {
        "train": None,
        "dev": None,
        "encoder": "features",
        "dev_encoder": None,
        "encoder_dim": None,
        "model_out": None,
        "log_out": None,
        "taxonomy_file": None,
        "hidden": 64,
        "dropout": 0.25,
        "lr": 0.001,
        "epochs": 500,
        "patience": 20,
        "seed": 0,
        "no_crf": False,
    },
    "predict": {
        "model": None,
        "input": None,
        "encoder": "features",
        "encoder_dim": None,
        "out": None,
        "raw": False,
        "lang": "en",
        "email_id": None,
        "taxonomy_file": None,
        "no_crf": False,
    },
    "evaluate": {
        "gold": None,
        "pred": None,
        "model": None,
        "encoder": "features",
        "encoder_dim": None,
        "map_taxonomy": None,
        "f1_average": "macro",
        "report_out": None,
        "taxonomy_file": None,
        "no_crf": False,
    },
    "agreement": {
        "a1": None,
        "a2": None,
        "f1_average": "macro",
        "report_out": None,
        "taxonomy_file": None,
    },
    "encode": {
        "corpus": None,
        "service_url": None,
        "out": None,
        "parallel": 1,
        "timeout": 30.0,
        "encoder_dim": None,
        "taxonomy_file": None,
    },
    "synth": {
        "n": 10,
        "seed": 0,
        "domain": "a",
        "taxonomy": "gmane15",
        "out": None,
    },
}


def _sup(parser: argparse.ArgumentParser, *names, **kwargs):
    kwargs.setdefault("default", argparse.SUPPRESS)
    parser.add_argument(*names, **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zoneseg",
        description="Email zoning: train and run a line-level zone labeler.",
    )
    parser.add_argument("--config", default=None, help="JSON file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a labeler on an annotated corpus")
    _sup(t, "--train", help="training corpus (JSONL)")
    _sup(t, "--dev", help="development corpus for early stopping (JSONL)")
    _sup(t, "--encoder", help="features | file:PATH | service:URL (default features)")
    _sup(t, "--dev-encoder", dest="dev_encoder",
         help="encoder for the dev corpus, e.g. its own file:PATH (default: --encoder)")
    _sup(t, "--encoder-dim", dest="encoder_dim", type=int, help="declared service dim")
    _sup(t, "--model-out", dest="model_out", help="output model file")
    _sup(t, "--log-out", dest="log_out", help="training log JSON (default MODEL.trainlog.json)")
    _sup(t, "--taxonomy-file", dest="taxonomy_file", help="custom taxonomy JSON")
    _sup(t, "--hidden", type=int, help="BiLSTM hidden units per direction (default 64)")
    _sup(t, "--dropout", type=float, help="dropout rate before projection (default 0.25)")
    _sup(t, "--lr", type=float, help="RMSprop learning rate (default 0.001)")
    _sup(t, "--epochs", type=int, help="maximum epochs (default 500)")
    _sup(t, "--patience", type=int, help="early-stop patience in epochs (default 20)")
    _sup(t, "--seed", type=int, help="seed for init, shuffling, dropout (default 0)")
    _sup(t, "--no-crf", dest="no_crf", action="store_true", help="disable the CRF layer")

    p = sub.add_parser("predict", help="label a corpus or a raw email body")
    _sup(p, "--model", help="model file")
    _sup(p, "--input", help="corpus JSONL, or a raw text file with --raw/.txt")
    _sup(p, "--encoder", help="features | file:PATH | service:URL (default features)")
    _sup(p, "--encoder-dim", dest="encoder_dim", type=int, help="declared service dim")
    _sup(p, "--out", help="output corpus JSONL with predicted zones")
    _sup(p, "--raw", action="store_true", help="treat input as one raw email body")
    _sup(p, "--lang", help="language tag for raw input (default en)")
    _sup(p, "--email-id", dest="email_id", help="email id for raw input (default file stem)")
    _sup(p, "--taxonomy-file", dest="taxonomy_file", help="custom taxonomy JSON")
    _sup(p, "--no-crf", dest="no_crf", action="store_true", help="argmax decoding, no CRF")

    e = sub.add_parser("evaluate", help="score predictions against gold annotations")
    _sup(e, "--gold", help="gold corpus (JSONL)")
    _sup(e, "--pred", help="predicted corpus (JSONL); or use --model")
    _sup(e, "--model", help="model file: predict on the gold emails, then score")
    _sup(e, "--encoder", help="encoder for --model mode (default features)")
    _sup(e, "--encoder-dim", dest="encoder_dim", type=int, help="declared service dim")
    _sup(e, "--map-taxonomy", dest="map_taxonomy", help="project both sides onto this taxonomy")
    _sup(e, "--f1-average", dest="f1_average", choices=("macro", "micro"), help="F1 averaging")
    _sup(e, "--report-out", dest="report_out", help="write the JSON report here")
    _sup(e, "--taxonomy-file", dest="taxonomy_file", help="custom taxonomy JSON")
    _sup(e, "--no-crf", dest="no_crf", action="store_true", help="argmax decoding, no CRF")

    a = sub.add_parser("agreement", help="inter-annotator agreement between two corpora")
    _sup(a, "--a1", help="first annotator's corpus (JSONL)")
    _sup(a, "--a2", help="second annotator's corpus (JSONL)")
    _sup(a, "--f1-average", dest="f1_average", choices=("macro", "micro"), help="F1 averaging")
    _sup(a, "--report-out", dest="report_out", help="write the JSON report here")
    _sup(a, "--taxonomy-file", dest="taxonomy_file", help="custom taxonomy JSON")

    c = sub.add_parser("encode", help="embed a corpus via a service into an embedding file")
    _sup(c, "--corpus", help="corpus to embed (JSONL)")
    _sup(c, "--service-url", dest="service_url", help="embedding service base URL")
    _sup(c, "--out", help="output embedding file (sidecar index written next to it)")
    _sup(c, "--parallel", type=int, help="max concurrent service requests (default 1)")
    _sup(c, "--timeout", type=float, help="request timeout in seconds (default 30)")
    _sup(c, "--encoder-dim", dest="encoder_dim", type=int, help="declared service dim")
    _sup(c, "--taxonomy-file", dest="taxonomy_file", help="custom taxonomy JSON")

    s = sub.add_parser("synth", help="generate a synthetic annotated corpus")
    _sup(s, "--n", type=int, help="number of emails (default 10)")
    _sup(s, "--seed", type=int, help="generator seed (default 0)")
    _sup(s, "--domain", choices=("a", "b"), help="surface lexicon set (default a)")
    _sup(s, "--taxonomy", help="taxonomy name for the corpus (default gmane15)")
    _sup(s, "--out", help="output corpus JSONL")
    return parser


def _resolve_config(args: argparse.Namespace) -> dict:
    command = args.command
    cfg = dict(_DEFAULTS[command])
    if args.config:
        try:
            overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ValidationError(f"--config {args.config}: {e}") from e
        if not isinstance(overrides, dict):
            raise ValidationError(f"--config {args.config}: expected a JSON object")
        unknown = sorted(set(overrides) - set(cfg))
        if unknown:
            raise ValidationError(f"--config {args.config}: unknown keys {unknown}")
        cfg.update(overrides)
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        cfg[key] = value
    return cfg


def _require(cfg: dict, *keys: str):
    for key in keys:
        if cfg.get(key) in (None, ""):
            raise ValidationError(f"missing required flag --{key.replace('_', '-')}")


def _read_corpus_arg(path: str, taxonomy_file: str | None) -> Corpus:
    taxonomy = load_taxonomy(taxonomy_file) if taxonomy_file else None
    return read_corpus(path, taxonomy=taxonomy)


def _resolve_taxonomy(name: str, taxonomy_file: str | None):
    if taxonomy_file:
        taxonomy = load_taxonomy(taxonomy_file)
        if taxonomy.name != name:
            raise ValidationError(
                f"taxonomy file declares {taxonomy.name!r}, expected {name!r}"
            )
        return taxonomy
    return builtin_taxonomy(name)


def _atomic_write_text(path: str | Path, text: str):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def cmd_train(cfg: dict) -> int:
    _require(cfg, "train", "dev", "model_out")
    train_corpus = _read_corpus_arg(cfg["train"], cfg["taxonomy_file"])
    dev_corpus = _read_corpus_arg(cfg["dev"], cfg["taxonomy_file"])
    encoder = make_encoder(cfg["encoder"], dim=cfg["encoder_dim"])
    dev_encoder = (
        make_encoder(cfg["dev_encoder"], dim=cfg["encoder_dim"])
        if cfg["dev_encoder"]
        else None
    )
    config = TrainConfig(
        hidden=cfg["hidden"],
        dropout_rate=cfg["dropout"],
        learning_rate=cfg["lr"],
        epochs=cfg["epochs"],
        patience=cfg["patience"],
        seed=cfg["seed"],
        use_crf=not cfg["no_crf"],
    )
    result = train_on_corpora(train_corpus, dev_corpus, encoder, config, dev_encoder)
    save_model(result.params, cfg["model_out"])
    log_out = cfg["log_out"] or cfg["model_out"] + ".trainlog.json"
    _atomic_write_text(log_out, json.dumps(result.log_dict(), indent=2) + "\n")
    log.info(
        "trained %s: best dev accuracy %.4f at epoch %d (%d epochs run)",
        cfg["model_out"],
        result.best_dev_accuracy,
        result.best_epoch,
        len(result.epochs),
    )
    print(
        f"model {cfg['model_out']}: best dev accuracy {result.best_dev_accuracy:.4f} "
        f"at epoch {result.best_epoch}"
    )
    return 0


def _load_input_emails(cfg: dict) -> list[Email]:
    path = Path(cfg["input"])
    if cfg["raw"] or path.suffix == ".txt":
        body = path.read_text(encoding="utf-8")
        email_id = cfg["email_id"] or path.stem
        return [Email(id=email_id, lang=cfg["lang"], lines=tuple(split_lines(body)))]
    corpus = _read_corpus_arg(cfg["input"], cfg["taxonomy_file"])
    return [a.email for a in corpus.emails]


def cmd_predict(cfg: dict) -> int:
    _require(cfg, "model", "input", "out")
    params = load_model(cfg["model"])
    taxonomy = _resolve_taxonomy(params.taxonomy_name, cfg["taxonomy_file"])
    if len(taxonomy.zones) != params.n_labels:
        raise ValidationError(
            f"taxonomy {taxonomy.name!r} has {len(taxonomy.zones)} zones, model "
            f"expects {params.n_labels}"
        )
    encoder = make_encoder(cfg["encoder"], dim=cfg["encoder_dim"])
    emails = _load_input_emails(cfg)
    annotated = []
    for email in emails:
        matrix = encoder.encode_email(email)
        if matrix.shape[1] != params.input_dim:
            raise DimensionMismatchError(
                f"encoder dim {matrix.shape[1]} does not match model input_dim "
                f"{params.input_dim}"
            )
        labels = predict(params, matrix, use_crf=not cfg["no_crf"])
        zones = tuple(taxonomy.zones[i] for i in labels)
        annotated.append(AnnotatedEmail(email=email, zones=zones, annotator=None))
    out = Path(cfg["out"])
    write_corpus(Corpus(name=out.stem, taxonomy=taxonomy, emails=tuple(annotated)), out)
    log.info("wrote %d predicted emails to %s", len(annotated), out)
    return 0


def cmd_evaluate(cfg: dict) -> int:
    _require(cfg, "gold")
    if not cfg["pred"] and not cfg["model"]:
        raise ValidationError("evaluate needs either --pred or --model")
    gold = _read_corpus_arg(cfg["gold"], cfg["taxonomy_file"])

    if cfg["pred"]:
        pred = _read_corpus_arg(cfg["pred"], cfg["taxonomy_file"])
        if pred.taxonomy.name != gold.taxonomy.name:
            raise ValidationError(
                f"gold and predictions use different taxonomies: "
                f"{gold.taxonomy.name!r} vs {pred.taxonomy.name!r}"
            )
    else:
        params = load_model(cfg["model"])
        if params.taxonomy_name != gold.taxonomy.name:
            raise ValidationError(
                f"model taxonomy {params.taxonomy_name!r} does not match gold "
                f"taxonomy {gold.taxonomy.name!r}"
            )
        encoder = make_encoder(cfg["encoder"], dim=cfg["encoder_dim"])
        annotated = []
        for a in gold.emails:
            matrix = encoder.encode_email(a.email)
            if matrix.shape[1] != params.input_dim:
                raise DimensionMismatchError(
                    f"encoder dim {matrix.shape[1]} does not match model input_dim "
                    f"{params.input_dim}"
                )
            labels = predict(params, matrix, use_crf=not cfg["no_crf"])
            zones = tuple(gold.taxonomy.zones[i] for i in labels)
            annotated.append(AnnotatedEmail(email=a.email, zones=zones, annotator=None))
        pred = Corpus(name="predictions", taxonomy=gold.taxonomy, emails=tuple(annotated))

    taxonomy = gold.taxonomy
    if cfg["map_taxonomy"]:
        target = builtin_taxonomy(cfg["map_taxonomy"])
        mapping = taxonomy.mapping_to(target)
        gold = map_corpus(gold, mapping)
        pred = map_corpus(pred, mapping)
        taxonomy = target
    report = evaluate(gold.emails, pred.emails, taxonomy, f1_average=cfg["f1_average"])
    print(render_eval_report(report))
    if cfg["report_out"]:
        _atomic_write_text(cfg["report_out"], report.to_json() + "\n")
        log.info("wrote evaluation report to %s", cfg["report_out"])
    return 0


def cmd_agreement(cfg: dict) -> int:
    _require(cfg, "a1", "a2")
    a1 = _read_corpus_arg(cfg["a1"], cfg["taxonomy_file"])
    a2 = _read_corpus_arg(cfg["a2"], cfg["taxonomy_file"])
    a2_by_id = a2.by_id()

    reports = {}
    langs = sorted({a.email.lang for a in a1.emails})
    for lang in langs:
        ids = {a.email.id for a in a1.emails if a.email.lang == lang}
        sub1 = Corpus(
            name=f"{a1.name}-{lang}",
            taxonomy=a1.taxonomy,
            emails=tuple(a for a in a1.emails if a.email.id in ids),
        )
        sub2_emails = tuple(a2_by_id[i] for i in sorted(ids) if i in a2_by_id)
        sub2 = Corpus(name=f"{a2.name}-{lang}", taxonomy=a2.taxonomy, emails=sub2_emails)
        reports[lang] = agreement_report(sub1, sub2, f1_average=cfg["f1_average"])
    reports["all"] = agreement_report(a1, a2, f1_average=cfg["f1_average"])

    print(render_agreement_table(reports))
    if cfg["report_out"]:
        payload = {group: r.to_json_dict() for group, r in reports.items()}
        _atomic_write_text(cfg["report_out"], json.dumps(payload, indent=2) + "\n")
        log.info("wrote agreement report to %s", cfg["report_out"])
    return 0


def cmd_encode(cfg: dict) -> int:
    _require(cfg, "corpus", "service_url", "out")
    if cfg["parallel"] < 1:
        raise ValidationError("--parallel must be >= 1")
    corpus = _read_corpus_arg(cfg["corpus"], cfg["taxonomy_file"])
    encoder = ServiceEncoder(
        cfg["service_url"], dim=cfg["encoder_dim"], timeout=cfg["timeout"]
    )

    def embed(annotated) -> tuple[str, np.ndarray]:
        return annotated.email.id, encoder.encode_email(annotated.email)

    if cfg["parallel"] == 1:
        entries = [embed(a) for a in corpus.emails]
    else:
        # executor.map preserves submission order, so row order is stable
        # no matter how requests interleave.
        with ThreadPoolExecutor(max_workers=cfg["parallel"]) as pool:
            entries = list(pool.map(embed, corpus.emails))
    write_embedding_file(cfg["out"], entries)
    total = sum(rows.shape[0] for _, rows in entries)
    log.info("embedded %d lines from %d emails into %s", total, len(entries), cfg["out"])
    print(f"wrote {total} rows (dim {encoder.dim}) for {len(entries)} emails to {cfg['out']}")
    return 0


def cmd_synth(cfg: dict) -> int:
    _require(cfg, "out")
    if cfg["n"] < 1:
        raise ValidationError("--n must be >= 1")
    taxonomy = builtin_taxonomy(cfg["taxonomy"])
    corpus = generate_synthetic_corpus(cfg["n"], taxonomy, cfg["seed"], domain=cfg["domain"])
    write_corpus(corpus, cfg["out"])
    log.info("wrote %d synthetic emails to %s", len(corpus), cfg["out"])
    return 0


_COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "agreement": cmd_agreement,
    "encode": cmd_encode,
    "synth": cmd_synth,
}


def _configure_logging():
    level_name = os.environ.get("ZONESEG_LOG", "INFO").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = _resolve_config(args)
        log.info("effective config for %s: %s", args.command, json.dumps(cfg, sort_keys=True))
        return _COMMANDS[args.command](cfg)
    except ValidationError as e:
        log.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ZonesegError, OSError) as e:
        log.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
