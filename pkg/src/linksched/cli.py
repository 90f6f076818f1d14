"""Command-line front end.

    linksched [--config PATH] [--seed N] [--out DIR] [--threads N] [--quiet] COMMAND ...

Commands: generate, label, train, eval, sweep, bench-labeling, validate,
init-config.  Exit codes: 0 success, 2 configuration error, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config
from .data import DataError, DatasetFile, generate_dataset, label_dataset
from .evaluation import evaluate, generalization_rows
from .gnn import checkpoint_dict, load_checkpoint, model_from_dict, save_checkpoint
from .rates import ScheduleSizeError, benchmark_csv, label_timing_benchmark
from .studies import (
    STUDY_COLUMNS,
    convergence_rows,
    rows_to_csv,
    sample_complexity_rows,
    sum_rate_rows,
    training_subset,
)
from .training import REGIMES, NumericalFailure, TrainingRegime, train

log = logging.getLogger("linksched")

EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


class MissingInputs(DataError):
    pass


def _write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def dataset_path(out: Path, k: int, split: str) -> Path:
    return out / "data" / f"k{k}_{split}.jsonl"


def load_dataset(path, config: ExperimentConfig, require_labels=False) -> DatasetFile:
    ds = DatasetFile.read(path)
    if ds.header.get("config_digest") != config.data_digest():
        raise DataError(
            f"{path} was produced by config digest {ds.header.get('config_digest')}, "
            f"current config has {config.data_digest()}"
        )
    if require_labels and not ds.labeled:
        raise DataError(f"{path} is not fully labeled (run `linksched label {path}`)")
    return ds


def _executor(threads):
    return ThreadPoolExecutor(threads) if threads and threads > 1 else None


# ---------------------------------------------------------------- commands


def cmd_generate(args, config):
    out = Path(args.out)
    ks = args.k or list(config.experiment.k_values)
    splits = [args.split] if args.split else ["train", "test"]
    for k in ks:
        for split in splits:
            ds = generate_dataset(config, k, split, args.n)
            if args.label:
                label_dataset(ds, config.experiment.k_max_exhaustive, _executor(args.threads))
            path = dataset_path(out, k, split)
            _write_atomic(path, ds.dumps())
            log.info("wrote %s (%d samples)", path, len(ds.records))
    return 0


def cmd_label(args, config):
    for path in args.paths:
        ds = DatasetFile.read(path)
        n = label_dataset(ds, config.experiment.k_max_exhaustive, _executor(args.threads))
        if n:
            _write_atomic(Path(path), ds.dumps())
        log.info("%s: labeled %d records (%d already labeled)", path, n, len(ds.records) - n)
    return 0


def _log_csv(history) -> str:
    lines = ["epoch,train_loss,test_norm_sum_rate"]
    lines += [f"{r['epoch']},{r['train_loss']!r},{r['test_norm_sum_rate']!r}" for r in history]
    return "\n".join(lines) + "\n"


def cmd_train(args, config):
    out = Path(args.out)
    k = args.k
    train_p = Path(args.train) if args.train else dataset_path(out, k, "train")
    test_p = Path(args.test) if args.test else dataset_path(out, k, "test")
    missing = [str(p) for p in (train_p, test_p) if not p.exists()]
    if missing:
        raise MissingInputs(f"missing datasets: {', '.join(missing)}")
    regime = TrainingRegime.from_config(config, args.regime)
    if args.epochs is not None:
        regime = dataclasses.replace(regime, epochs=args.epochs)
    train_ds = load_dataset(train_p, config, require_labels=regime.supervised)
    test_ds = load_dataset(test_p, config, require_labels=True)
    train_set = train_ds.to_sample_set(regime.supervised)
    if args.n_train:
        train_set = training_subset(train_set, args.n_train)
    test_set = test_ds.to_sample_set(True)
    meta = {"config_digest": config.digest(), "data_digest": config.data_digest(), "regime": regime.kind, "k": k}
    for seed in config.experiment.seeds:
        run_dir = out / "runs" / f"{regime.kind}_k{k}_s{seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        t0 = time.perf_counter()
        res = train(train_set, test_set, regime, seed)
        wall = time.perf_counter() - t0
        _write_atomic(run_dir / "log.csv", _log_csv(res.log))
        save_checkpoint(run_dir / "final.json", res.model, extra={**meta, "seed": seed, "epoch": regime.epochs})
        save_checkpoint(
            run_dir / "best.json", res.best_model, extra={**meta, "seed": seed, "epoch": res.best_epoch}
        )
        manifest = {**meta, "seed": seed, "wallclock_s": wall, "best_epoch": res.best_epoch,
                    "best_metric": res.best_metric, "config": config.to_dict()}
        _write_atomic(run_dir / "manifest.json", json.dumps(manifest, indent=1) + "\n")
        log.info("%s seed %s: best normalized sum-rate %.4f at epoch %s", regime.kind, seed,
                 res.best_metric, res.best_epoch)
    return 0


def cmd_eval(args, config):
    test_ds = load_dataset(args.test, config, require_labels=True)
    test_set = test_ds.to_sample_set(True)
    rows = []
    for ck in args.checkpoint:
        model, _, meta = load_checkpoint(ck)
        if meta.get("data_digest") not in (None, config.data_digest()):
            raise DataError(f"{ck} was trained on data from a different config digest")
        rep = evaluate(model, test_set, meta.get("seed"), meta.get("k"))
        rows.append(
            {"checkpoint": str(ck), "k_train": meta.get("k"), "k_test": test_set.k, "seed": meta.get("seed"),
             "normalized": rep.normalized, "mean_of_ratios": rep.mean_of_ratios,
             "all_on_normalized": rep.all_on_normalized}
        )
    cols = list(rows[0])
    text = ",".join(cols) + "\n" + "".join(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c])
                                                    for c in cols) + "\n" for r in rows)
    if args.csv:
        _write_atomic(Path(args.csv), text)
    if not args.quiet:
        sys.stdout.write(text)
    return 0


# ------------------------------------------------------------------- sweep


def _cells_for(study, config, regimes):
    exp = config.experiment
    full = exp.n_train
    base = [r for r in regimes if not r.startswith("ssl_")]
    if study == "fig2a":
        return [(k, r, full) for k in exp.k_values for r in base]
    if study == "fig2b":
        return [(k, r, full) for k in exp.k_values for r in regimes]
    if study == "fig2c":
        return [(k, r, n) for k in exp.k_sample_complexity for r in base for n in exp.sample_sizes]
    if study == "fig2d":
        return [(k, r, full) for k in exp.k_train_generalization for r in base]
    raise ValueError(study)


def _cell_path(out, k, regime, n, seed):
    return out / "cells" / f"k{k}_{regime}_n{n}_s{seed}.json"


def _run_cell_job(job):
    config_dict, out, k, regime_kind, n, seed = job
    config = ExperimentConfig.from_dict(config_dict)
    out = Path(out)
    regime = TrainingRegime.from_config(config, regime_kind)
    train_set = load_dataset(dataset_path(out, k, "train"), config, regime.supervised).to_sample_set(
        regime.supervised
    )
    test_set = load_dataset(dataset_path(out, k, "test"), config, True).to_sample_set(True)
    res = train(training_subset(train_set, n), test_set, regime, seed)
    cell = {
        "config_digest": config.digest(),
        "k": k, "regime": regime_kind, "n_train": n, "seed": seed,
        "best_metric": res.best_metric, "best_epoch": res.best_epoch,
        "metrics": res.metrics, "train_loss": [r["train_loss"] for r in res.log],
        "best_checkpoint": checkpoint_dict(res.best_model),
    }
    _write_atomic(_cell_path(out, k, regime_kind, n, seed), json.dumps(cell) + "\n")
    return str(_cell_path(out, k, regime_kind, n, seed))


def _load_cell(path, config):
    cell = json.loads(Path(path).read_text())
    if cell["config_digest"] != config.digest():
        raise DataError(f"{path} belongs to config digest {cell['config_digest']}, not {config.digest()}")
    return cell


def cmd_sweep(args, config):
    out = Path(args.out)
    studies = list(STUDY_COLUMNS) if args.study == "all" else [args.study]
    regimes = args.regimes or list(REGIMES)
    seeds = list(config.experiment.seeds)
    cells = sorted({c for s in studies for c in _cells_for(s, config, regimes)})
    needed_k = {k for k, _, _ in cells}
    if "fig2d" in studies:
        needed_k |= set(config.experiment.k_values)
    needs_labels = any(TrainingRegime(kind=r).supervised for r in regimes)
    missing = []
    for k in sorted(needed_k):
        for split in ("train", "test"):
            p = dataset_path(out, k, split)
            if not p.exists():
                missing.append(str(p))
    if missing:
        raise MissingInputs("missing datasets:\n  " + "\n  ".join(missing))
    for k in sorted(needed_k):
        for split in ("train", "test"):
            ds = load_dataset(dataset_path(out, k, split), config)
            if (split == "test" or needs_labels) and not ds.labeled:
                raise MissingInputs(f"{dataset_path(out, k, split)} is not labeled")

    jobs = []
    for k, r, n in cells:
        for seed in seeds:
            p = _cell_path(out, k, r, n, seed)
            if p.exists():
                _load_cell(p, config)
                continue
            jobs.append((config.to_dict(), str(out), k, r, n, seed))
    log.info("%d cells total, %d to run", len(cells) * len(seeds), len(jobs))
    if args.threads and args.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.threads) as ex:
            for p in ex.map(_run_cell_job, jobs):
                log.info("finished %s", p)
    else:
        for job in jobs:
            log.info("finished %s", _run_cell_job(job))

    def cell(k, r, n, s):
        return _load_cell(_cell_path(out, k, r, n, s), config)

    full = config.experiment.n_train
    for study in studies:
        cs = _cells_for(study, config, regimes)
        if study == "fig2a":
            rows = sum_rate_rows({(k, r): {s: cell(k, r, n, s)["best_metric"] for s in seeds} for k, r, n in cs})
        elif study == "fig2b":
            rows = convergence_rows(
                {(k, r): {s: cell(k, r, n, s)["metrics"] for s in seeds} for k, r, n in cs},
                config.experiment.convergence_threshold,
            )
        elif study == "fig2c":
            rows = sample_complexity_rows(
                {(k, n, r): {s: cell(k, r, n, s)["best_metric"] for s in seeds} for k, r, n in cs}
            )
        else:
            test_sets = {
                kt: load_dataset(dataset_path(out, kt, "test"), config, True).to_sample_set(True)
                for kt in config.experiment.k_values
            }
            rows = []
            for k, r, n in cs:
                models = {s: model_from_dict(cell(k, r, full, s)["best_checkpoint"]) for s in seeds}
                rows += generalization_rows(models, test_sets, k, r)
        path = out / f"{study}.csv"
        _write_atomic(path, rows_to_csv(rows, study))
        log.info("wrote %s", path)
    return 0


def cmd_bench(args, config):
    exp = config.experiment
    rows = label_timing_benchmark(
        args.k or list(exp.bench_k_values), args.n or exp.bench_samples,
        config.system, config.geometry, config.pathloss, exp.master_seed,
    )
    text = benchmark_csv(rows)
    path = Path(args.csv) if args.csv else Path(args.out) / "fig1.csv"
    _write_atomic(path, text)
    if not args.quiet:
        sys.stdout.write(text)
    return 0


def cmd_validate(args, config):
    status = 0
    for path in args.paths:
        try:
            text = Path(path).read_text()
            first = json.loads(text.splitlines()[0]) if text.strip() else {}
            if str(first.get("format", "")).startswith("linksched-checkpoint"):
                model_from_dict(first)
                kind = "checkpoint"
            else:
                ds = DatasetFile.loads(text)
                ds.validate(check_optimality=args.optimality)
                if ds.dumps() != text:
                    raise DataError("file does not round-trip byte-exactly")
                kind = f"dataset k={ds.k} n={len(ds.records)} labeled={ds.labeled}"
            log.info("%s: ok (%s)", path, kind)
        except (DataError, ValueError, KeyError, json.JSONDecodeError) as exc:
            log.error("%s: invalid: %s", path, exc)
            status = EXIT_DATA
    return status


def cmd_init_config(args, config):
    _write_atomic(Path(args.path), config.to_toml())
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linksched", description="GNN link scheduling experiments")
    p.add_argument("--config", help="TOML experiment config (defaults if omitted)")
    p.add_argument("--seed", type=int, help="run a single training seed instead of the configured list")
    p.add_argument("--out", help="output directory (default: experiment.out_dir)")
    p.add_argument("--threads", type=int, default=1, help="parallel workers for labeling and sweeps")
    p.add_argument("--quiet", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate channel datasets")
    g.add_argument("--k", type=int, action="append", help="link count (repeatable; default experiment.k_values)")
    g.add_argument("--split", choices=["train", "test"])
    g.add_argument("--n", type=int, help="number of samples")
    g.add_argument("--label", action="store_true", help="label right away by exhaustive search")
    g.set_defaults(func=cmd_generate)

    lb = sub.add_parser("label", help="attach exhaustive-search labels (resumable)")
    lb.add_argument("paths", nargs="+")
    lb.set_defaults(func=cmd_label)

    t = sub.add_parser("train", help="train one regime for every configured seed")
    t.add_argument("--regime", choices=REGIMES, required=True)
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--train")
    t.add_argument("--test")
    t.add_argument("--epochs", type=int)
    t.add_argument("--n-train", type=int)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate checkpoints on a labeled test set")
    e.add_argument("--checkpoint", action="append", required=True)
    e.add_argument("--test", required=True)
    e.add_argument("--csv")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="run a comparison study (resumable per cell)")
    s.add_argument("--study", choices=[*STUDY_COLUMNS, "all"], required=True)
    s.add_argument("--regimes", nargs="+", choices=REGIMES)
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bench-labeling", help="wall-clock cost of unlabeled vs labeled samples")
    b.add_argument("--k", type=int, action="append")
    b.add_argument("--n", type=int)
    b.add_argument("--csv")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("validate", help="check dataset or checkpoint files")
    v.add_argument("paths", nargs="+")
    v.add_argument("--optimality", action="store_true", help="re-derive every label by exhaustive search")
    v.set_defaults(func=cmd_validate)

    ic = sub.add_parser("init-config", help="write the default config as TOML")
    ic.add_argument("path")
    ic.set_defaults(func=cmd_init_config)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = config.replace("experiment", seeds=(args.seed,))
        if args.out is None:
            args.out = config.experiment.out_dir
        return args.func(args, config)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (DataError, ScheduleSizeError, FileNotFoundError) as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA
    except (NumericalFailure, FloatingPointError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
