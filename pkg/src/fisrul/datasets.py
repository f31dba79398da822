"""Ingestion of the two public run-to-failure formats plus a synthetic generator.

Loaders stream windows one file at a time so full recordings never need to
sit in memory; `load_*` materializes them into a Recording for interactive
use.  The synthetic generator emits a feature table directly (no signal
level), which is the desk-scale stand-in for the multi-GB benchmarks.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterator

import numpy as np

from .clustering import TrainingTable
from .errors import LoadError
from .features import SignalWindow

PHM_SAMPLE_RATE = 25600.0
PHM_WINDOW_LEN = 2560
PHM_INTERVAL = 10.0

IMS_SAMPLE_RATE = 20000.0
IMS_WINDOW_LEN = 20480

_PHM_NAME = re.compile(r"^acc_(\d+)\.csv$")


@dataclass
class Recording:
    """One bearing's ordered windows; total_life is the last observation time."""

    bearing_id: str
    windows: list[SignalWindow]
    sample_interval: float
    total_life: float | None = None


def _parse_float(token: str, path: Path, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise LoadError(f"{path}:{lineno}: not a number: {token!r}") from None


def iter_phm(dir_path) -> Iterator[SignalWindow]:
    """Stream the horizontal-channel windows of one PHM bearing directory.

    Files are `acc_<index>.csv` with one sample per row; columns are hour,
    minute, second, microsecond, horizontal and vertical acceleration
    (some distributions use ';' instead of ',').  Only the horizontal
    channel is kept; window k sits at tau = 10 (k - 1) seconds.
    """
    root = Path(dir_path)
    names = []
    for entry in sorted(p.name for p in root.glob("acc_*.csv")):
        match = _PHM_NAME.match(entry)
        if match:
            names.append((int(match.group(1)), entry))
    if not names:
        raise LoadError(f"{root}: no acc_*.csv files found")
    indices = [idx for idx, _ in names]
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise LoadError(f"{root}: file indices are not strictly increasing")

    for order, (_, name) in enumerate(names):
        path = root / name
        samples = np.empty(PHM_WINDOW_LEN)
        count = 0
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                cells = line.split(";") if ";" in line else line.split(",")
                if len(cells) not in (5, 6):
                    raise LoadError(
                        f"{path}:{lineno}: expected 5 or 6 columns, got {len(cells)}")
                if count >= PHM_WINDOW_LEN:
                    raise LoadError(
                        f"{path}:{lineno}: more than {PHM_WINDOW_LEN} rows")
                samples[count] = _parse_float(cells[4], path, lineno)
                count += 1
        if count != PHM_WINDOW_LEN:
            raise LoadError(
                f"{path}: expected {PHM_WINDOW_LEN} rows, got {count}")
        yield SignalWindow(samples, PHM_SAMPLE_RATE, index=order + 1,
                           timestamp=PHM_INTERVAL * order)


def load_phm(dir_path) -> Recording:
    """Materialize a PHM bearing directory into a Recording."""
    windows = list(iter_phm(dir_path))
    return Recording(
        bearing_id=Path(dir_path).name,
        windows=windows,
        sample_interval=PHM_INTERVAL,
        total_life=windows[-1].timestamp,
    )


def _ims_timestamp(name: str, root: Path) -> datetime:
    try:
        return datetime.strptime(name, "%Y.%m.%d.%H.%M.%S")
    except ValueError:
        raise LoadError(f"{root / name}: file name is not a timestamp") from None


def iter_ims(dir_path, channel: int = 0) -> Iterator[SignalWindow]:
    """Stream one channel of an IMS test directory.

    Files are named by their acquisition timestamp and hold 20480
    tab-separated rows, one sample per row and one column per channel;
    observation times are the timestamp offsets from the first file.
    """
    root = Path(dir_path)
    names = sorted(p.name for p in root.iterdir() if p.is_file())
    if not names:
        raise LoadError(f"{root}: no data files found")
    stamps = [_ims_timestamp(name, root) for name in names]
    if any(b <= a for a, b in zip(stamps, stamps[1:])):
        raise LoadError(f"{root}: file timestamps are not strictly increasing")

    start = stamps[0]
    for order, (name, stamp) in enumerate(zip(names, stamps)):
        path = root / name
        samples = np.empty(IMS_WINDOW_LEN)
        count = 0
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                cells = line.split("\t")
                if channel >= len(cells):
                    raise LoadError(
                        f"{path}:{lineno}: channel {channel} out of range "
                        f"({len(cells)} columns)")
                if count >= IMS_WINDOW_LEN:
                    raise LoadError(
                        f"{path}:{lineno}: more than {IMS_WINDOW_LEN} rows")
                samples[count] = _parse_float(cells[channel], path, lineno)
                count += 1
        if count != IMS_WINDOW_LEN:
            raise LoadError(f"{path}: expected {IMS_WINDOW_LEN} rows, got {count}")
        yield SignalWindow(samples, IMS_SAMPLE_RATE, index=order + 1,
                           timestamp=(stamp - start).total_seconds())


def load_ims(dir_path, channel: int = 0) -> Recording:
    """Materialize one channel of an IMS test directory into a Recording."""
    windows = list(iter_ims(dir_path, channel))
    deltas = np.diff([w.timestamp for w in windows])
    return Recording(
        bearing_id=f"{Path(dir_path).name}-ch{channel}",
        windows=windows,
        sample_interval=float(np.median(deltas)) if deltas.size else 0.0,
        total_life=windows[-1].timestamp,
    )


# Per-regime slope patterns of the synthetic feature trajectories (features
# alternate between the two).  The late-life slopes fold the trajectories
# back toward the early-life value band -- the partial late recovery seen in
# real degradation features -- so feature values alias across regimes and
# only the observation time disambiguates them.
_SLOPE_PATTERNS = (
    np.array([1.2, -0.2, -1.0, 0.8, -0.4, 1.0]),
    np.array([0.6, 1.0, -1.6, 0.6, -0.9, 1.1]),
)


def synth_bearing(seed: int, regimes: int = 3, lifetime: float = 1200.0,
                  noise: float = 0.05, n_obs: int = 120,
                  n_features: int = 2, start_frac: float = 0.1) -> TrainingTable:
    """Deterministic piecewise-linear run-to-failure feature table.

    Each feature follows a continuous piecewise-linear trajectory over
    ``regimes`` contiguous time segments, plus seeded Gaussian noise scaled
    by ``noise`` times the trajectory amplitude.  Observations sit on a
    uniform grid from ``start_frac`` of the lifetime (monitoring starts
    after a warm-up, which also keeps the relative error metric finite at
    desk scale) up to the failure time, so rho spans (start_frac, 1].
    """
    if regimes < 1:
        raise ValueError(f"need at least one regime, got {regimes}")
    if not lifetime > 0:
        raise ValueError(f"lifetime must be positive, got {lifetime}")
    if not 0.0 <= start_frac < 1.0:
        raise ValueError(f"start_frac must lie in [0, 1), got {start_frac}")
    rng = np.random.default_rng(seed)
    grid = np.arange(1, n_obs + 1) / n_obs  # ends at exactly 1.0
    rho = start_frac + (1.0 - start_frac) * grid
    taus = lifetime * rho
    edges = np.linspace(0.0, 1.0, regimes + 1)
    features = np.empty((n_obs, n_features))
    for i in range(n_features):
        pattern = _SLOPE_PATTERNS[i % len(_SLOPE_PATTERNS)]
        reps = math.ceil(regimes / pattern.size)
        slopes = np.tile(pattern, reps)[:regimes] * (1.0 + 0.25 * (i // 2))
        nodes = np.concatenate([[0.5], 0.5 + np.cumsum(slopes * np.diff(edges))])
        trajectory = np.interp(rho, edges, nodes)
        amplitude = float(np.ptp(trajectory)) or 1.0
        features[:, i] = trajectory + noise * amplitude * rng.standard_normal(n_obs)
    return TrainingTable(
        features=features,
        rho=rho,
        taus=taus,
        feature_names=tuple(f"f{i + 1}" for i in range(n_features)),
    )
