"""Random K-link deployments and channel gain matrices.

Transmitters are dropped uniformly in a square with a minimum pairwise
separation, each receiver is placed in an annulus around its transmitter,
and the channel gains follow a dual-slope path loss with log-normal
shadowing.  Only the magnitudes squared ``|h_ij|^2`` are produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DeploymentInfeasible",
    "SystemParams",
    "GeometryParams",
    "PathLossParams",
    "Deployment",
    "ChannelRealization",
    "make_rng",
    "deploy_network",
    "path_loss_db",
    "sample_channel",
    "generate_channel",
]

# split tags for the counter-based seeding scheme
SPLIT_TAGS = {"train": 1, "test": 2, "bench": 3, "misc": 0}


class DeploymentInfeasible(RuntimeError):
    pass


@dataclass(frozen=True)
class SystemParams:
    p_max_dbm: float = 10.0
    bandwidth_hz: float = 10e6
    noise_psd_dbm_hz: float = -174.0
    carrier_note: str = "dual-slope, 1 m reference"

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth_hz}")

    @property
    def noise_dbm(self) -> float:
        return self.noise_psd_dbm_hz + 10.0 * np.log10(self.bandwidth_hz)

    @property
    def noise_over_pmax(self) -> float:
        """Linear ratio N / P_max entering the rate expression."""
        return float(10.0 ** ((self.noise_dbm - self.p_max_dbm) / 10.0))


@dataclass(frozen=True)
class GeometryParams:
    area_side: float = 250.0
    min_tx_separation: float = 35.0
    ring_inner: float = 10.0
    ring_outer: float = 50.0
    max_attempts: int = 10_000
    max_restarts: int = 100

    def __post_init__(self):
        if not 0 <= self.ring_inner < self.ring_outer:
            raise ValueError("need 0 <= ring_inner < ring_outer")
        if self.area_side <= 0:
            raise ValueError("area_side must be positive")


@dataclass(frozen=True)
class PathLossParams:
    ref_loss_db: float = 40.0
    exp_near: float = 2.0
    exp_far: float = 4.0
    breakpoint_m: float = 50.0
    shadowing_std_db: float = 7.0

    def __post_init__(self):
        if not (self.exp_far >= self.exp_near > 0):
            raise ValueError("need exp_far >= exp_near > 0")
        if self.breakpoint_m <= 0:
            raise ValueError("breakpoint_m must be positive")
        if self.shadowing_std_db < 0:
            raise ValueError("shadowing_std_db must be non-negative")


@dataclass
class Deployment:
    area_side: float
    tx_positions: np.ndarray  # (K, 2)
    rx_positions: np.ndarray  # (K, 2)

    @property
    def k(self) -> int:
        return len(self.tx_positions)

    def distances(self) -> np.ndarray:
        """``d[i, j]`` = distance from Tx_j to Rx_i."""
        diff = self.rx_positions[:, None, :] - self.tx_positions[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))


@dataclass
class ChannelRealization:
    """Gain matrix with row i = receiver Rx_i and column j = transmitter Tx_j."""

    gain_sq: np.ndarray
    deployment: Deployment | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.gain_sq = np.asarray(self.gain_sq, dtype=float)
        if self.gain_sq.ndim != 2 or self.gain_sq.shape[0] != self.gain_sq.shape[1]:
            raise ValueError(f"gain_sq must be square, got shape {self.gain_sq.shape}")

    @property
    def k(self) -> int:
        return self.gain_sq.shape[0]


def make_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the stream ``(master_seed, *key)``.

    Streams for different keys are independent, so sample ``i`` of a split
    can be regenerated without drawing samples ``0..i-1``.
    """
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, *map(int, key)])
    return np.random.Generator(np.random.Philox(ss))


def _place_transmitters(k, geom, rng):
    # Candidates are drawn in blocks but scanned one at a time, so this is
    # plain sequential rejection sampling with a per-transmitter budget.
    side, sep2 = geom.area_side, geom.min_tx_separation**2
    block = max(4 * k, 16)
    for _ in range(geom.max_restarts):
        pts: list[tuple[float, float]] = []
        attempts = 0
        pool, pos = rng.uniform(0.0, side, size=(block, 2)).tolist(), 0
        while len(pts) < k and attempts < geom.max_attempts:
            if pos == len(pool):
                pool, pos = rng.uniform(0.0, side, size=(block, 2)).tolist(), 0
            x, y = pool[pos]
            pos += 1
            attempts += 1
            if all((x - px) ** 2 + (y - py) ** 2 >= sep2 for px, py in pts):
                pts.append((x, y))
                attempts = 0
        if len(pts) == k:
            return np.array(pts)
    raise DeploymentInfeasible(
        f"could not place k={k} transmitters with min separation "
        f"{geom.min_tx_separation} m in a {geom.area_side} m square"
    )


def _place_receivers(tx, geom, rng):
    """Area-uniform in the annulus around each transmitter; receivers that
    land outside the square are redrawn until all are inside."""
    k = len(tx)
    r2_lo, r2_hi = geom.ring_inner**2, geom.ring_outer**2
    rx = np.empty((k, 2))
    todo = np.arange(k)
    for _ in range(geom.max_attempts):
        r = np.sqrt(rng.uniform(r2_lo, r2_hi, size=len(todo)))
        theta = rng.uniform(0.0, 2.0 * np.pi, size=len(todo))
        cand = tx[todo] + r[:, None] * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        ok = np.all((cand >= 0.0) & (cand <= geom.area_side), axis=1)
        rx[todo[ok]] = cand[ok]
        todo = todo[~ok]
        if todo.size == 0:
            return rx
    raise DeploymentInfeasible(f"no in-square receiver position around transmitter at {tx[todo[0]]}")


def deploy_network(k: int, geom: GeometryParams, rng: np.random.Generator) -> Deployment:
    """Drop ``k`` transmitter-receiver pairs.

    Transmitters are rejection-sampled one at a time to respect the minimum
    separation; receivers are uniform over the annulus area and rejected if
    they fall outside the square.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    tx = _place_transmitters(k, geom, rng)
    rx = _place_receivers(tx, geom, rng)
    return Deployment(geom.area_side, tx, rx)


def path_loss_db(distance, pl: PathLossParams):
    """Dual-slope path loss in dB, continuous at the breakpoint."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise ValueError("path loss needs strictly positive distances")
    near = pl.ref_loss_db + 10.0 * pl.exp_near * np.log10(d)
    far = (
        pl.ref_loss_db
        + 10.0 * pl.exp_near * np.log10(pl.breakpoint_m)
        + 10.0 * pl.exp_far * np.log10(d / pl.breakpoint_m)
    )
    out = np.where(d <= pl.breakpoint_m, near, far)
    return float(out) if out.ndim == 0 else out


def sample_channel(
    deployment: Deployment, pl: PathLossParams, rng: np.random.Generator, seed: int | None = None
) -> ChannelRealization:
    loss = path_loss_db(deployment.distances(), pl)
    k = deployment.k
    shadow = rng.normal(0.0, pl.shadowing_std_db, size=(k, k)) if pl.shadowing_std_db > 0 else 0.0
    gain_sq = 10.0 ** (-(loss + shadow) / 10.0)
    return ChannelRealization(gain_sq=gain_sq, deployment=deployment, seed=seed)


def generate_channel(
    k: int,
    master_seed: int,
    index: int,
    split: str = "misc",
    geom: GeometryParams | None = None,
    pl: PathLossParams | None = None,
) -> ChannelRealization:
    """Sample ``index`` of a split, reproducible on its own."""
    geom = geom or GeometryParams()
    pl = pl or PathLossParams()
    rng = make_rng(master_seed, SPLIT_TAGS[split], k, index)
    dep = deploy_network(k, geom, rng)
    ch = sample_channel(dep, pl, rng, seed=int(master_seed))
    ch.meta = {"split": split, "index": int(index)}
    return ch
