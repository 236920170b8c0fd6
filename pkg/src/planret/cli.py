"""Command-line surface: gen, train, index, query, eval.

Exit codes: 0 success, 2 configuration/usage, 3 data, 4 numeric failure,
5 I/O or file-format failure. Every command echoes its fully resolved
configuration into the output directory before writing results.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import index as plan_index
from .config import ConfigError, load_config
from .evalmetrics import (LabeledRanking, evaluate_rankings, pca_project_2d,
                          write_comparison_csv, write_metrics_csv,
                          write_projection_csv)
from .models import EncoderConfig, LossWeights
from .training import (CheckpointError, NonFiniteLossError, TrainConfig,
                       embed_dataset, load_checkpoint, save_checkpoint, train)
from .autodiff import OptimConfig
from .volumes import CaseDataset, assemble_channels, generate_dataset, read_case
from .volumes.phantom import PhantomGeometryError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_IO = 5


class DataError(RuntimeError):
    pass


def _default_threads():
    env = os.environ.get("PLANRET_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="planret",
        description="Plan retrieval from learned volumetric embeddings")
    parser.add_argument("--config", help="key-value config file")
    parser.add_argument("--seed", type=int, help="master RNG seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int,
                        help="worker threads for embedding (env PLANRET_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a phantom dataset")
    gen.add_argument("--per-class", type=int, dest="n_per_class")
    gen.add_argument("--dim", type=int, dest="volume_dim")

    tr = sub.add_parser("train", help="train an encoder family")
    tr.add_argument("--model", dest="model_kind",
                    choices=("vanilla_autoencoder", "info_vae", "siamese_triplet",
                             "simsiam", "multitask"))
    tr.add_argument("--data", dest="data_dir")
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--batch-size", type=int, dest="batch_size")
    tr.add_argument("--lr", type=float, dest="learning_rate")

    ix = sub.add_parser("index", help="build the plan database for a checkpoint")
    ix.add_argument("--checkpoint", required=True)
    ix.add_argument("--data", dest="data_dir")
    ix.add_argument("--split", dest="db_split")

    qr = sub.add_parser("query", help="retrieve nearest plans for one case")
    qr.add_argument("--index", required=True)
    qr.add_argument("--checkpoint", required=True)
    qr.add_argument("--data", dest="data_dir")
    qr.add_argument("--case", help="case id inside the data directory")
    qr.add_argument("--volume", help="path prefix of raw case files (alternative to --case)")
    qr.add_argument("-k", type=int, default=5)
    qr.add_argument("--filter", default="",
                    help="comma-separated meta equalities, e.g. body_site=prostate")
    qr.add_argument("--slices", action="store_true",
                    help="write mid-plane CT/dose extracts of query and results")

    ev = sub.add_parser("eval", help="score retrieval and clustering quality")
    ev.add_argument("--checkpoint", action="append", required=True,
                    help="repeatable; model name is the file stem")
    ev.add_argument("--index", help="prebuilt index (single checkpoint only)")
    ev.add_argument("--data", dest="data_dir")
    ev.add_argument("--db-split", dest="db_split")
    ev.add_argument("--query-split", dest="query_split")
    return parser


def _resolve_config(args):
    overrides = {}
    for key in ("seed", "out", "threads", "n_per_class", "volume_dim", "model_kind",
                "data_dir", "epochs", "batch_size", "learning_rate", "db_split",
                "query_split"):
        if hasattr(args, key):
            overrides[key] = getattr(args, key)
    config = load_config(args.config, overrides)
    if args.threads is None and "PLANRET_THREADS" in os.environ:
        config.threads = _default_threads()
    return config


def _dataset(config):
    try:
        return CaseDataset(config.data_dir)
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from exc


def _encoder_config(config):
    return EncoderConfig(stage_channels=tuple(config.stage_channels),
                         groups=config.groups,
                         negative_slope=config.negative_slope,
                         embed_dim=config.embed_dim,
                         volume_dim=config.volume_dim)


def _loss_weights(config):
    return LossWeights(alpha=config.alpha, lam=config.lam, margin=config.margin,
                       beta=config.beta, gamma=config.gamma,
                       symmetric_simsiam=config.symmetric_simsiam)


def cmd_gen(config):
    if config.n_per_class < 3:
        raise ConfigError(f"per-class count {config.n_per_class} cannot satisfy the "
                          "split and triplet preconditions; need at least 3")
    out = Path(config.out)
    config.echo(out)
    generate_dataset(out, config.n_per_class, config.seed,
                     fractions=config.split_fractions(), dims=config.dims(),
                     spacing=config.spacing(), prescription=config.prescription_gy)
    print(f"wrote {config.n_per_class * 32} cases to {out}")
    return EXIT_OK


def cmd_train(config):
    out = Path(config.out)
    config.echo(out)
    dataset = _dataset(config)
    train_config = TrainConfig(
        model_kind=config.model_kind, epochs=config.epochs,
        batch_size=config.batch_size, seed=config.seed,
        optimizer=OptimConfig(kind=config.optimizer, lr=config.learning_rate,
                              betas=(config.adam_beta1, config.adam_beta2),
                              eps=config.adam_eps),
        weights=_loss_weights(config), encoder=_encoder_config(config))
    model, report = train(dataset, train_config)
    ckpt = out / f"{config.model_kind}.ckpt"
    save_checkpoint(model, ckpt)
    report.dump(out / "train_report.txt")
    print(f"trained {config.model_kind}: epoch losses "
          f"{report.epoch_losses[0]:.4f} -> {report.epoch_losses[-1]:.4f}, "
          f"checkpoint {ckpt}")
    return EXIT_OK


def _build_index(model, dataset, split, threads, data_dir):
    ids = dataset.ids(split)
    if not ids:
        raise DataError(f"split {split!r} has no cases")
    matrix, ordered = embed_dataset(model, dataset, ids, threads=threads)
    idx = plan_index.PlanIndex(matrix.shape[1])
    for row, cid in zip(matrix, ordered):
        _, meta = dataset.load_case(cid)
        idx.insert(plan_index.EmbeddingRecord(
            cid, row, meta, dose_path=str(Path(data_dir) / f"{cid}.dose.vol")))
    return idx


def cmd_index(config, args):
    out = Path(config.out)
    config.echo(out)
    dataset = _dataset(config)
    model = load_checkpoint(args.checkpoint)
    idx = _build_index(model, dataset, config.db_split, config.threads,
                       config.data_dir)
    plan_index.save_index(idx, out / "index.plix")
    print(f"indexed {len(idx)} cases (dim {idx.dim}, split {config.db_split}) "
          f"-> {out / 'index.plix'}")
    return EXIT_OK


def _parse_filter(spec):
    if not spec:
        return None, "all"
    wanted = {}
    for part in spec.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise ConfigError(f"bad filter term {part!r}, expected key=value")
        key = key.strip()
        value = value.strip()
        if key == "multi_target":
            value = value == "true"
        elif key == "class_id":
            value = int(value)
        wanted[key] = value
    return plan_index.criteria_filter(**wanted), spec


def _write_pgm(path, plane):
    """8-bit ASCII portable graymap of a [0, 1] image plane."""
    arr = np.clip(np.asarray(plane, dtype=np.float64), 0.0, 1.0)
    pixels = np.round(arr * 255).astype(int)
    lines = ["P2", f"{pixels.shape[1]} {pixels.shape[0]}", "255"]
    for row in pixels:
        lines.append(" ".join(str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _write_slices(out, tag, volume, meta):
    mid = volume.dims[0] // 2
    ct = assemble_channels(volume, "anatomy")[0][mid]
    _write_pgm(out / f"{tag}_ct.pgm", ct)
    if volume.dose.max() > 0:
        dose = assemble_channels(volume, "dose", prescription=meta.prescription)[0][mid]
        _write_pgm(out / f"{tag}_dose.pgm", dose)


def cmd_query(config, args):
    out = Path(config.out)
    config.echo(out)
    model = load_checkpoint(args.checkpoint)
    idx = plan_index.load_index(args.index)
    if args.case:
        dataset = _dataset(config)
        try:
            volume, meta = dataset.load_case(args.case)
        except FileNotFoundError as exc:
            raise DataError(f"case {args.case!r} not found in {config.data_dir}") from exc
    elif args.volume:
        prefix = Path(args.volume)
        volume, meta = read_case(prefix.parent, prefix.name)
    else:
        raise ConfigError("query needs --case or --volume")

    q = model.encode(assemble_channels(volume, "anatomy")[None])[0]
    predicate, description = _parse_filter(args.filter)
    view = idx.filter(predicate, description)
    result = view.query_knn(q, args.k)

    lines = ["rank\tcase_id\tdistance\tclass_id\tdose_path"]
    for rank, (cid, dist) in enumerate(zip(result.case_ids, result.distances), 1):
        record = view.record_by_id(cid)
        lines.append(f"{rank}\t{cid}\t{dist!r}\t{record.meta.class_id}\t{record.dose_path}")
    if result.truncated:
        lines.append(f"# truncated: only {len(result.case_ids)} records matched "
                     f"the filter ({description})")
    text = "\n".join(lines)
    (out / "query_result.tsv").write_text(text + "\n")
    print(text)

    if args.slices:
        _write_slices(out, f"query_{meta.case_id}", volume, meta)
        for rank, cid in enumerate(result.case_ids, 1):
            record = view.record_by_id(cid)
            rroot = Path(record.dose_path).parent
            rvol, rmeta = read_case(rroot, cid)
            _write_slices(out, f"rank{rank}_{cid}", rvol, rmeta)
    return EXIT_OK


def cmd_eval(config, args):
    out = Path(config.out)
    config.echo(out)
    dataset = _dataset(config)
    query_ids = dataset.ids(config.query_split)
    if not query_ids:
        raise DataError(f"query split {config.query_split!r} has no cases")
    if args.index and len(args.checkpoint) != 1:
        raise ConfigError("--index applies to exactly one --checkpoint")

    reports = []
    for ckpt_path in args.checkpoint:
        name = Path(ckpt_path).stem
        model = load_checkpoint(ckpt_path)
        if args.index:
            idx = plan_index.load_index(args.index)
        else:
            idx = _build_index(model, dataset, config.db_split, config.threads,
                               config.data_dir)
        matrix, ordered = embed_dataset(model, dataset, query_ids,
                                        threads=config.threads)
        class_by_id = {r.case_id: r.meta.class_id for r in idx.records}
        rankings = []
        for row, cid in zip(matrix, ordered):
            result = idx.query_knn(row, config.k_max)
            rankings.append(LabeledRanking(
                true_class=dataset.class_of(cid),
                retrieved_classes=[class_by_id[r] for r in result.case_ids]))
        report = evaluate_rankings(name, rankings, k_max=config.k_max,
                                   base=config.score_base, offset=config.score_offset)
        report.dump(out / f"metrics_{name}.txt")
        coords = pca_project_2d(matrix)
        write_projection_csv(ordered, coords,
                             [dataset.class_of(c) for c in ordered],
                             out / f"pca_{name}.csv")
        reports.append(report)
        print(f"{name}: accuracy retrieval score "
              f"{report.retrieval_scores['accuracy']:.4f}, "
              f"top-1 accuracy {report.at_k[1]['accuracy']:.4f}")

    write_metrics_csv(reports, out / "metrics.csv")
    write_comparison_csv(reports, out / "comparison.csv")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
        if args.command == "gen":
            return cmd_gen(config)
        if args.command == "train":
            return cmd_train(config)
        if args.command == "index":
            return cmd_index(config, args)
        if args.command == "query":
            return cmd_query(config, args)
        if args.command == "eval":
            return cmd_eval(config, args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, plan_index.EmptyDatabaseError, PhantomGeometryError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NonFiniteLossError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CheckpointError, plan_index.IndexFormatError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
