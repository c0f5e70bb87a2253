"""Command-line pipeline: build-vocab, train, embed, eval.

Driven by a flat ``key = value`` config file; flags override config keys.
Exit codes: 0 success, 2 validation error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import embedding, evaluate, imageset, vocab
from .autoencoder import (
    AutoencoderModel,
    CheckpointError,
    TrainConfig,
    load_checkpoint,
    save_checkpoint,
    train,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

_PATH_KEYS = {
    "base_vocab",
    "dictionary",
    "stopwords",
    "checkpoint",
    "table",
    "loss_csv",
    "vocab_out",
    "skip_report",
    "coverage_report",
    "benchmark",
    "report",
}
_INT_KEYS = {"epochs", "batch_size", "seed", "eval_seed", "lr_halving_period", "restarts"}
_FLOAT_KEYS = {"lr0"}
_OTHER_KEYS = {"image_source", "table_format"}


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    """Flat ``key = value`` file with ``#`` comments."""
    cfg = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: missing '=' at line {lineno}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PATH_KEYS | _INT_KEYS | _FLOAT_KEYS | _OTHER_KEYS:
            raise ConfigError(f"{path}: unknown key '{key}' at line {lineno}")
        if key in _INT_KEYS:
            try:
                cfg[key] = int(value)
            except ValueError:
                raise ConfigError(f"{path}: key '{key}' must be an integer") from None
        elif key in _FLOAT_KEYS:
            try:
                cfg[key] = float(value)
            except ValueError:
                raise ConfigError(f"{path}: key '{key}' must be a number") from None
        else:
            cfg[key] = value
    return cfg


def _require(cfg, key):
    if key not in cfg:
        raise ConfigError(f"config key '{key}' is required")
    return cfg[key]


def _require_file(cfg, key):
    value = _require(cfg, key)
    if not Path(value).is_file():
        raise ConfigError(f"config key '{key}': file not found: {value}")
    return value


def _stopword_policy(cfg):
    if "stopwords" in cfg:
        if not Path(cfg["stopwords"]).is_file():
            raise ConfigError(f"stopword file not found: {cfg['stopwords']}")
        return vocab.StopwordPolicy.from_file(cfg["stopwords"])
    return vocab.StopwordPolicy()


def _build_vocabulary(cfg):
    base = vocab.load_word_list(_require_file(cfg, "base_vocab"))
    dictionary = vocab.load_dictionary(_require_file(cfg, "dictionary"))
    return vocab.build_vocabulary(base, dictionary, _stopword_policy(cfg))


def _image_source(cfg):
    spec = _require(cfg, "image_source")
    if spec.startswith("synthetic:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad synthetic source seed in '{spec}'") from None
        return imageset.SyntheticSource(seed)
    if not Path(spec).is_dir():
        raise ConfigError(f"image root not found: {spec}")
    return imageset.DirectorySource(spec)


def _log(args, message):
    if not args.quiet:
        print(message)


def cmd_build_vocab(cfg, args) -> int:
    voc = _build_vocabulary(cfg)
    out = _require(cfg, "vocab_out")
    vocab.save_vocabulary(voc, out)
    if "skip_report" in cfg:
        vocab.save_skip_report(voc.skipped, cfg["skip_report"])
    _log(args, f"vocabulary: {len(voc.base_words)} base words, "
               f"{len(voc.all_words)} total, {len(voc.skipped)} skipped -> {out}")
    return EXIT_OK


def _train_config(cfg, args):
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    return TrainConfig(
        epochs=cfg.get("epochs", 25),
        lr0=cfg.get("lr0", 0.00215),
        lr_halving_period=cfg.get("lr_halving_period", 5),
        batch_size=cfg.get("batch_size", 64),
        seed=seed,
    )


def _image_pool(voc, source):
    """All distinct images across all image-sets, deduplicated by (term, slot):
    one 5-image block per vocabulary term, plus the blank block if any
    definition is padded."""
    blocks = [np.stack(source.images_for(term)) for term in voc.all_words]
    if any(e.real_term_count < vocab.MAX_DEFINITION_TERMS for e in voc.entries.values()):
        blocks.append(np.stack([imageset.blank_image()] * imageset.IMAGES_PER_TERM))
    return np.concatenate(blocks, axis=0)


def cmd_train(cfg, args) -> int:
    voc = _build_vocabulary(cfg)
    source = _image_source(cfg)
    tc = _train_config(cfg, args)
    pool = _image_pool(voc, source)
    if pool.shape[0] == 0:
        raise ConfigError("empty image pool")
    _log(args, f"training on {pool.shape[0]} images, {tc.epochs} epochs, "
               f"batch {tc.batch_size}, seed {tc.seed}")
    model = AutoencoderModel(seed=tc.seed)
    result = train(model, pool, tc)
    save_checkpoint(model, _require(cfg, "checkpoint"))
    loss_csv = _require(cfg, "loss_csv")
    with open(loss_csv, "w", encoding="utf-8") as fh:
        fh.write("epoch,lr,mean_loss\n")
        for epoch, (lr, loss) in enumerate(zip(result.epoch_lrs, result.epoch_losses)):
            fh.write(f"{epoch},{lr:.9g},{loss:.9g}\n")
    if "coverage_report" in cfg and hasattr(source, "write_coverage_report"):
        source.write_coverage_report(cfg["coverage_report"])
    _log(args, f"final epoch mean loss {result.epoch_losses[-1]:.6f} "
               f"-> {cfg['checkpoint']}")
    return EXIT_OK


def cmd_embed(cfg, args) -> int:
    voc = _build_vocabulary(cfg)
    source = _image_source(cfg)
    model, _ = load_checkpoint(_require_file(cfg, "checkpoint"))
    table = embedding.embed_vocabulary(model, voc, source)
    fmt = cfg.get("table_format", "text")
    embedding.save_table(table, _require(cfg, "table"), fmt=fmt)
    _log(args, f"embedded {len(table.rows)} words (dim {table.dim}) "
               f"-> {cfg['table']} ({fmt})")
    return EXIT_OK


def cmd_eval(cfg, args) -> int:
    table = embedding.load_table(_require_file(cfg, "table"))
    benchmark = _require_file(cfg, "benchmark")
    seed = args.seed if args.seed is not None else cfg.get("eval_seed", 0)
    if args.task == "similarity":
        report = evaluate.eval_similarity(table, evaluate.load_similarity_pairs(benchmark))
    elif args.task == "outlier":
        report = evaluate.eval_outliers(table, evaluate.load_outlier_instances(benchmark))
    elif args.task == "categorize":
        ds = evaluate.load_categorization(benchmark)
        report = evaluate.eval_categorization(
            table, ds, seed=seed, restarts=cfg.get("restarts", 10)
        )
    else:  # argparse restricts choices; defensive only
        raise ConfigError(f"unknown task '{args.task}'")
    out = _require(cfg, "report")
    Path(out).write_text(report.to_text(), encoding="utf-8")
    Path(out + ".kv").write_text(report.to_kv(), encoding="utf-8")
    _log(args, report.to_text().rstrip())
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="defvec",
        description="Definition-image word vectors: vocabulary, training, "
                    "embedding and benchmark evaluation.",
    )
    parser.add_argument("--config", required=True, help="path to key=value config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("build-vocab", help="build and export the vocabulary")
    sub.add_parser("train", help="train the autoencoder and write a checkpoint")
    sub.add_parser("embed", help="write the embedding table from a checkpoint")
    p_eval = sub.add_parser("eval", help="score the embedding table on a benchmark")
    p_eval.add_argument("task", choices=["similarity", "outlier", "categorize"])
    return parser


_COMMANDS = {
    "build-vocab": cmd_build_vocab,
    "train": cmd_train,
    "embed": cmd_embed,
    "eval": cmd_eval,
}

_VALIDATION_ERRORS = (
    ConfigError,
    vocab.VocabError,
    embedding.TableFormatError,
    evaluate.EvalError,
    CheckpointError,
    FileNotFoundError,
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
