"""Datasets in memory and on disk.

On disk a dataset is line-delimited JSON: a header line followed by one
record per sample.  Floats are written with Python's shortest round-trip
repr, so ``write -> read -> write`` reproduces the same bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    SPLIT_TAGS,
    ChannelRealization,
    Deployment,
    SystemParams,
    generate_channel,
)
from .graph import GraphBatch, build_batch
from .rates import exhaustive_search, sum_rate

__all__ = ["DataError", "SampleSet", "DatasetFile", "generate_dataset", "label_dataset"]

DATASET_FORMAT = "linksched-dataset/1"


class DataError(ValueError):
    pass


@dataclass
class SampleSet:
    """Stacked same-size samples, ready for batched training and evaluation."""

    gain_sq: np.ndarray  # (N, K, K)
    noise_over_pmax: float
    labels: np.ndarray | None = None  # (N, K) int8
    optimal_rates: np.ndarray | None = None  # (N,)
    _graphs: GraphBatch | None = field(default=None, repr=False)

    def __post_init__(self):
        self.gain_sq = np.asarray(self.gain_sq, dtype=float)
        if self.gain_sq.ndim != 3:
            raise DataError("gain_sq must be (N, K, K)")

    @classmethod
    def from_channels(cls, channels, sys: SystemParams | float, label: bool = False):
        n0 = sys.noise_over_pmax if isinstance(sys, SystemParams) else float(sys)
        gains = np.stack([c.gain_sq for c in channels])
        if not label:
            return cls(gains, n0)
        labs = [exhaustive_search(c, n0) for c in channels]
        return cls(
            gains,
            n0,
            np.stack([l.optimal_schedule for l in labs]),
            np.array([l.optimal_sum_rate for l in labs]),
        )

    def __len__(self):
        return self.gain_sq.shape[0]

    @property
    def k(self) -> int:
        return self.gain_sq.shape[1]

    @property
    def labeled(self) -> bool:
        return self.labels is not None

    @property
    def graphs(self) -> GraphBatch:
        if self._graphs is None:
            self._graphs = build_batch(self.gain_sq, self.noise_over_pmax)
        return self._graphs

    def subset(self, idx) -> "SampleSet":
        if not isinstance(idx, slice):
            idx = np.asarray(idx)
        g = self._graphs[idx] if self._graphs is not None else None
        return SampleSet(
            self.gain_sq[idx],
            self.noise_over_pmax,
            None if self.labels is None else self.labels[idx],
            None if self.optimal_rates is None else self.optimal_rates[idx],
            g,
        )


def _record_channel(rec) -> ChannelRealization:
    dep = None
    if "tx" in rec:
        dep = Deployment(float(rec.get("area_side", 0.0)), np.array(rec["tx"]), np.array(rec["rx"]))
    return ChannelRealization(np.array(rec["gain_sq"], dtype=float), dep, rec.get("seed"))


@dataclass
class DatasetFile:
    header: dict
    records: list[dict]

    @property
    def k(self) -> int:
        return int(self.header["k"])

    @property
    def labeled(self) -> bool:
        return all("label" in r for r in self.records)

    def channels(self) -> list[ChannelRealization]:
        return [_record_channel(r) for r in self.records]

    def to_sample_set(self, require_labels: bool = False) -> SampleSet:
        if require_labels and not self.labeled:
            raise DataError("dataset is not fully labeled")
        n0 = float(self.header["noise_over_pmax"])
        gains = np.array([r["gain_sq"] for r in self.records], dtype=float)
        if not self.labeled:
            return SampleSet(gains, n0)
        labels = np.array([r["label"]["schedule"] for r in self.records], dtype=np.int8)
        rates = np.array([r["label"]["sum_rate"] for r in self.records], dtype=float)
        return SampleSet(gains, n0, labels, rates)

    def dumps(self) -> str:
        lines = [json.dumps(self.header)]
        lines.extend(json.dumps(r) for r in self.records)
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str, check_labels: bool = True) -> "DatasetFile":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise DataError("empty dataset file")
        try:
            header = json.loads(lines[0])
            records = [json.loads(ln) for ln in lines[1:]]
        except json.JSONDecodeError as exc:
            raise DataError(f"corrupt dataset line: {exc}") from exc
        if header.get("format") != DATASET_FORMAT:
            raise DataError(f"unknown dataset format {header.get('format')!r}")
        ds = cls(header, records)
        ds.validate(check_labels=check_labels)
        return ds

    @classmethod
    def read(cls, path, check_labels: bool = True) -> "DatasetFile":
        with open(path) as fh:
            return cls.loads(fh.read(), check_labels=check_labels)

    def validate(self, check_labels: bool = True, check_optimality: bool = False):
        """Structural checks; label sum-rates are recomputed, and with
        ``check_optimality`` every label is re-derived by exhaustive search."""
        k = self.k
        n0 = float(self.header["noise_over_pmax"])
        for i, rec in enumerate(self.records):
            g = np.asarray(rec.get("gain_sq"), dtype=float)
            if g.shape != (k, k):
                raise DataError(f"record {i}: gain matrix shape {g.shape}, expected ({k}, {k})")
            if not np.all(np.isfinite(g)) or np.any(g <= 0):
                raise DataError(f"record {i}: gains must be positive and finite")
            lab = rec.get("label")
            if lab is None or not check_labels:
                continue
            sched = np.asarray(lab["schedule"])
            if sched.shape != (k,) or not np.all((sched == 0) | (sched == 1)):
                raise DataError(f"record {i}: label is not a binary schedule of length {k}")
            r = sum_rate(g, sched, n0)
            if abs(r - lab["sum_rate"]) > 1e-9 * max(abs(r), 1e-300):
                raise DataError(f"record {i}: stored sum-rate {lab['sum_rate']} != recomputed {r}")
            if check_optimality:
                best = exhaustive_search(ChannelRealization(g), n0)
                if best.optimal_sum_rate > r * (1 + 1e-12):
                    raise DataError(f"record {i}: label is not optimal")


def generate_dataset(config, k: int, split: str, n: int | None = None) -> DatasetFile:
    """Unlabeled samples; sample ``i`` depends only on (master seed, split, k, i)."""
    exp = config.experiment
    if n is None:
        n = exp.n_train if split == "train" else exp.n_test
    sys = config.system
    header = {
        "format": DATASET_FORMAT,
        "config_digest": config.data_digest(),
        "k": int(k),
        "split": split,
        "n": int(n),
        "master_seed": int(exp.master_seed),
        "noise_over_pmax": sys.noise_over_pmax,
        "system": config.to_dict()["system"],
        "geometry": config.to_dict()["geometry"],
        "pathloss": config.to_dict()["pathloss"],
    }
    records = []
    for i in range(n):
        ch = generate_channel(k, exp.master_seed, i, split, config.geometry, config.pathloss)
        records.append(
            {
                "id": i,
                "seed": [int(exp.master_seed), SPLIT_TAGS[split], int(k), i],
                "area_side": config.geometry.area_side,
                "tx": ch.deployment.tx_positions.tolist(),
                "rx": ch.deployment.rx_positions.tolist(),
                "gain_sq": ch.gain_sq.tolist(),
            }
        )
    return DatasetFile(header, records)


def label_dataset(ds: DatasetFile, k_max: int = 20, executor=None) -> int:
    """Attach exhaustive-search labels in place; already-labeled records are
    skipped.  Returns the number of records labeled."""
    n0 = float(ds.header["noise_over_pmax"])
    todo = [r for r in ds.records if "label" not in r]

    def work(rec):
        return exhaustive_search(ChannelRealization(np.array(rec["gain_sq"], dtype=float)), n0, k_max)

    results = executor.map(work, todo) if executor is not None else map(work, todo)
    for rec, lab in zip(todo, results):
        rec["label"] = {
            "schedule": lab.optimal_schedule.tolist(),
            "sum_rate": lab.optimal_sum_rate,
            "wallclock": lab.label_wallclock,
        }
    return len(todo)
