"""Scalar condition indicators extracted from fixed-length vibration windows.

Six indicators are supported: root mean square (rms), normalized spectral
entropy (se), approximate entropy (ae), largest Lyapunov exponent (lle),
correlation dimension (cd) and the degradation index of the approximate
entropy series (diae).  Every indicator is a pure function of its window and
parameters, so windows may be processed in parallel in any order.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import islice
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from .errors import ConfigError

FEATURE_NAMES = ("rms", "se", "ae", "lle", "cd", "diae")

# Pairwise-distance features (ae, lle, cd) decimate the window to at most
# this many samples so 20480-sample windows stay tractable.
MAX_PAIRWISE_POINTS = 2000


@dataclass(frozen=True)
class SignalWindow:
    """One fixed-length acceleration snapshot recorded at ``timestamp`` seconds."""

    samples: np.ndarray
    sample_rate: float
    index: int = 1
    timestamp: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if samples.size == 0:
            raise ValueError("signal window has no samples")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")


@dataclass(frozen=True)
class FeatureVector:
    """One observation row: feature values, its time coordinate and, for
    labeled run-to-failure recordings, the past-useful-life ratio."""

    values: np.ndarray
    tau: float
    rho: float | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if self.rho is not None and not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")


@dataclass(frozen=True)
class FeatureParams:
    """Tunable parameters of the indicator computations.

    The defaults are the standard settings from the respective method
    literature: ae uses embedding dimension 2 with tolerance 0.2 std,
    lle/cd use delay embeddings with the lag taken at the first
    autocorrelation minimum (capped at 10).
    """

    ae_m: int = 2
    ae_r_tol: float = 0.2
    lle_embed_dim: int = 5
    lle_lag: int | None = None
    lle_mean_period: int | None = None
    lle_fit_range: tuple[int, int] | None = None
    cd_embed_dim: int = 5
    cd_lag: int | None = None
    diae_baseline_frac: float = 0.1
    max_points: int = MAX_PAIRWISE_POINTS


def _samples(window) -> np.ndarray:
    if isinstance(window, SignalWindow):
        return window.samples
    x = np.asarray(window, dtype=float)
    if x.size == 0:
        raise ValueError("signal window has no samples")
    return x


def _decimate(x: np.ndarray, max_points: int) -> np.ndarray:
    """Deterministic stride subsampling used by the pairwise-distance features."""
    if max_points and x.size > max_points:
        stride = math.ceil(x.size / max_points)
        return x[::stride]
    return x


def rms(window) -> float:
    """Root mean square of the window samples."""
    x = _samples(window)
    return float(np.sqrt(np.mean(np.square(x))))


def spectral_entropy(window) -> float:
    """Shannon entropy of the normalized power spectral density.

    The PSD is built from the magnitude-squared one-sided DFT bins (DC
    included) and normalized to sum to one; the entropy is divided by
    ``ln(number of bins)`` so the result lies in [0, 1].  An all-zero window
    has a degenerate spectrum and is defined to score 0.
    """
    x = _samples(window)
    if x.size < 4:
        raise ValueError(f"spectral entropy needs at least 4 samples, got {x.size}")
    psd = np.abs(np.fft.rfft(x)) ** 2
    total = psd.sum()
    if total <= 0.0:
        return 0.0
    p = psd / total
    p = p[p > 0.0]
    return float(-np.sum(p * np.log(p)) / math.log(psd.size))


def _apen_phi(x: np.ndarray, m: int, r: float) -> float:
    """Mean log proportion of template matches at length m (self-matches included)."""
    templates = np.lib.stride_tricks.sliding_window_view(x, m)
    count = templates.shape[0]
    matches = np.empty(count)
    # chunk the Chebyshev-distance matrix to bound memory on long windows
    step = max(1, int(2**22 / (count * m)))
    for lo in range(0, count, step):
        block = templates[lo : lo + step]
        dist = np.max(np.abs(block[:, None, :] - templates[None, :, :]), axis=2)
        matches[lo : lo + step] = np.count_nonzero(dist <= r, axis=1)
    return float(np.mean(np.log(matches / count)))


def approximate_entropy(window, m: int = 2, r_tol: float = 0.2,
                        max_points: int = MAX_PAIRWISE_POINTS) -> float:
    """Approximate entropy ApEn(m, r) with r = ``r_tol`` times the window std.

    Uses the standard formulation: phi(m) - phi(m+1) with self-matches
    included and Chebyshev distance between templates.  A constant window is
    perfectly regular and returns 0.
    """
    x = _decimate(_samples(window), max_points)
    if r_tol <= 0:
        raise ValueError(f"r_tol must be positive, got {r_tol}")
    if m < 1:
        raise ValueError(f"embedding dimension must be >= 1, got {m}")
    if x.size <= m + 1:
        raise ValueError(f"window too short for ApEn(m={m}): {x.size} samples")
    sd = float(np.std(x))
    if sd == 0.0:
        return 0.0
    r = r_tol * sd
    return _apen_phi(x, m, r) - _apen_phi(x, m + 1, r)


def _embed(x: np.ndarray, dim: int, lag: int) -> np.ndarray:
    """Delay embedding: rows are (x[t], x[t+lag], ..., x[t+(dim-1)lag])."""
    n = x.size - (dim - 1) * lag
    if n < 2:
        raise ValueError(
            f"window too short for embedding dim={dim}, lag={lag}: {x.size} samples"
        )
    return np.column_stack([x[i * lag : i * lag + n] for i in range(dim)])


def _first_acf_minimum(x: np.ndarray, cap: int = 10) -> int:
    """Lag of the first local minimum of the autocorrelation, capped."""
    x = x - x.mean()
    denom = float(np.dot(x, x))
    max_lag = min(cap + 1, x.size - 1)
    if denom == 0.0 or max_lag < 2:
        return 1
    acf = np.array([np.dot(x[: x.size - k], x[k:]) / denom for k in range(max_lag + 1)])
    for k in range(1, len(acf) - 1):
        if acf[k] < acf[k - 1] and acf[k] <= acf[k + 1]:
            return k
    return max(1, min(cap, len(acf) - 1))


def _mean_period(x: np.ndarray) -> int:
    """Reciprocal of the PSD mean frequency, in samples (at least 1)."""
    psd = np.abs(np.fft.rfft(x - x.mean())) ** 2
    freqs = np.fft.rfftfreq(x.size)
    total = psd[1:].sum()
    if total <= 0.0:
        return 1
    mean_freq = float(np.dot(freqs[1:], psd[1:]) / total)
    if mean_freq <= 0.0:
        return 1
    return max(1, int(round(1.0 / mean_freq)))


def largest_lyapunov(window, embed_dim: int = 5, embed_lag: int | None = None,
                     mean_period: int | None = None,
                     fit_range: tuple[int, int] | None = None,
                     n_steps: int | None = None,
                     max_points: int = MAX_PAIRWISE_POINTS) -> float:
    """Largest Lyapunov exponent per sample step, Rosenstein's method.

    Each embedded point is paired with its nearest neighbor at least
    ``mean_period`` steps away in time; the slope of the mean log divergence
    of those pairs over ``fit_range`` estimates the exponent.  Defaults: lag
    at the first autocorrelation minimum, mean period from the PSD mean
    frequency, fit over the first third of the divergence curve.
    """
    x = _decimate(_samples(window), max_points)
    lag = embed_lag if embed_lag is not None else _first_acf_minimum(x)
    points = _embed(x, embed_dim, lag)
    m = points.shape[0]
    if m < 10:
        raise ValueError(f"too few embedded points for divergence tracking: {m}")
    if mean_period is None:
        mean_period = _mean_period(x)

    # nearest neighbor outside the Theiler window, chunked brute force
    nn = np.empty(m, dtype=int)
    idx = np.arange(m)
    step = max(1, int(2**20 / (m * embed_dim)))
    for lo in range(0, m, step):
        block = points[lo : lo + step]
        dist = np.sqrt(np.sum((block[:, None, :] - points[None, :, :]) ** 2, axis=2))
        rows = idx[lo : lo + step]
        excluded = np.abs(rows[:, None] - idx[None, :]) <= mean_period
        dist[excluded] = np.inf
        nn[lo : lo + step] = np.argmin(dist, axis=1)

    if n_steps is None:
        n_steps = max(3, min(50, m // 4))
    divergence = np.full(n_steps, np.nan)
    for k in range(n_steps):
        keep = (idx + k < m) & (nn + k < m)
        if not np.any(keep):
            break
        d = np.sqrt(np.sum((points[idx[keep] + k] - points[nn[keep] + k]) ** 2, axis=1))
        d = d[d > 0.0]
        if d.size:
            divergence[k] = np.mean(np.log(d))

    if fit_range is None:
        fit_range = (0, max(2, n_steps // 3))
    lo, hi = fit_range
    ks = np.arange(lo, min(hi + 1, n_steps))
    ys = divergence[ks]
    keep = np.isfinite(ys)
    if np.count_nonzero(keep) < 2:
        raise ValueError("divergence curve too short to fit")
    slope = np.polyfit(ks[keep], ys[keep], 1)[0]
    return float(slope)


def _stable_slope_run(log_r: np.ndarray, log_c: np.ndarray,
                      min_points: int = 5, rel_var: float = 0.2) -> slice | None:
    """Longest run of grid points whose local log-log slopes vary < rel_var."""
    slopes = np.diff(log_c) / np.diff(log_r)
    n = slopes.size
    best: slice | None = None
    for start in range(n):
        for stop in range(start + min_points - 1, n + 1):
            seg = slopes[start:stop]
            mean = np.mean(seg)
            if mean == 0.0 or (seg.max() - seg.min()) >= rel_var * abs(mean):
                break
            if best is None or stop - start > (best.stop - best.start - 1):
                best = slice(start, stop + 1)  # slopes -> grid points
    return best


def correlation_dimension(window, embed_dim: int = 5, embed_lag: int | None = None,
                          radius_grid: np.ndarray | None = None,
                          max_points: int = MAX_PAIRWISE_POINTS) -> float:
    """Correlation dimension via the Grassberger-Procaccia correlation sum.

    C(r) is the fraction of embedded point pairs closer than r, evaluated on
    a log-spaced radius grid between the 2nd and 98th percentile of pairwise
    distances; the dimension is the log-log slope fitted over the longest
    stable linear region (5+ grid points with local slopes within 20%).
    A degenerate (constant) window returns 0.
    """
    x = _decimate(_samples(window), max_points)
    if np.ptp(x) == 0.0:
        return 0.0
    lag = embed_lag if embed_lag is not None else _first_acf_minimum(x)
    points = _embed(x, embed_dim, lag)
    dists = pdist(points)
    dists = dists[dists > 0.0]
    if dists.size == 0:
        return 0.0
    if radius_grid is None:
        lo, hi = np.percentile(dists, [2.0, 98.0])
        lo = max(lo, hi * 1e-12)
        radius_grid = np.geomspace(lo, hi, 20)
    else:
        radius_grid = np.asarray(radius_grid, dtype=float)
    corr = np.array([np.count_nonzero(dists < r) for r in radius_grid]) / dists.size
    valid = corr > 0.0
    if np.count_nonzero(valid) < 2:
        return 0.0
    log_r = np.log(radius_grid[valid])
    log_c = np.log(corr[valid])
    run = _stable_slope_run(log_r, log_c)
    if run is None:
        warnings.warn("no stable scaling region found; fitting the full grid",
                      RuntimeWarning, stacklevel=2)
        run = slice(0, log_r.size)
    slope = np.polyfit(log_r[run], log_c[run], 1)[0]
    return float(slope)


def degradation_index(ae_series: Sequence[float], baseline_len: int) -> np.ndarray:
    """Deviation of each value from the healthy baseline, in baseline std units.

    The first ``baseline_len`` values define the healthy regime; each value
    is scored as |value - baseline mean| / baseline std (population std,
    clamped below by 1e-12).
    """
    ae = np.asarray(ae_series, dtype=float)
    if baseline_len < 2:
        raise ValueError(f"baseline needs at least 2 values, got {baseline_len}")
    if baseline_len >= ae.size:
        raise ValueError(
            f"baseline length {baseline_len} must be shorter than the series ({ae.size})"
        )
    base = ae[:baseline_len]
    sd = max(float(np.std(base)), 1e-12)
    return np.abs(ae - base.mean()) / sd


def normalize_feature_names(feature_set: Iterable[str]) -> tuple[str, ...]:
    """Lowercase and validate feature names against the supported set."""
    names = tuple(str(name).strip().lower() for name in feature_set)
    if not names:
        raise ConfigError("feature set is empty")
    for name in names:
        if name not in FEATURE_NAMES:
            raise ConfigError(
                f"unknown feature name: {name!r} (choose from {', '.join(FEATURE_NAMES)})"
            )
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate feature names in {names}")
    return names


def _window_features(window: SignalWindow, base_names: tuple[str, ...],
                     params: FeatureParams) -> dict[str, float]:
    out: dict[str, float] = {}
    for name in base_names:
        if name == "rms":
            out[name] = rms(window)
        elif name == "se":
            out[name] = spectral_entropy(window)
        elif name == "ae":
            out[name] = approximate_entropy(
                window, params.ae_m, params.ae_r_tol, params.max_points)
        elif name == "lle":
            out[name] = largest_lyapunov(
                window, params.lle_embed_dim, params.lle_lag,
                params.lle_mean_period, params.lle_fit_range,
                max_points=params.max_points)
        elif name == "cd":
            out[name] = correlation_dimension(
                window, params.cd_embed_dim, params.cd_lag,
                max_points=params.max_points)
    return out


def extract_features(windows: Iterable[SignalWindow], feature_set: Iterable[str],
                     params: FeatureParams | None = None,
                     labeled: bool = False, total_life: float | None = None,
                     n_jobs: int = 1) -> list[FeatureVector]:
    """Compute one ordered FeatureVector per window.

    Windows are consumed lazily in chunks, so recordings never have to be
    materialized; only the scalar feature values are retained.  With
    ``labeled=True`` each vector gets rho = tau / total_life, where
    ``total_life`` defaults to the last window timestamp (run-to-failure
    convention).  ``n_jobs > 1`` processes the windows of each chunk in a
    thread pool; results are independent of the execution order.
    """
    names = normalize_feature_names(feature_set)
    params = params or FeatureParams()
    base_names = tuple(n for n in names if n != "diae")
    if "diae" in names and "ae" not in base_names:
        base_names = base_names + ("ae",)

    taus: list[float] = []
    rows: list[dict[str, float]] = []
    chunk_size = max(8, 4 * n_jobs)
    windows = iter(windows)
    last_tau: float | None = None
    compute = lambda w: _window_features(w, base_names, params)
    pool = ThreadPoolExecutor(max_workers=n_jobs) if n_jobs > 1 else None
    try:
        while True:
            chunk = list(islice(windows, chunk_size))
            if not chunk:
                break
            for w in chunk:
                if last_tau is not None and w.timestamp <= last_tau:
                    raise ValueError(
                        f"window timestamps must be strictly increasing "
                        f"({w.timestamp} after {last_tau})")
                last_tau = w.timestamp
                taus.append(w.timestamp)
            if pool is not None:
                rows.extend(pool.map(compute, chunk))
            else:
                rows.extend(map(compute, chunk))
    finally:
        if pool is not None:
            pool.shutdown()

    if not rows:
        return []

    if "diae" in names:
        ae_series = np.array([row["ae"] for row in rows])
        baseline_len = max(2, int(round(params.diae_baseline_frac * len(rows))))
        diae = degradation_index(ae_series, baseline_len)
        for row, value in zip(rows, diae):
            row["diae"] = float(value)

    rhos: list[float | None] = [None] * len(rows)
    if labeled:
        life = total_life if total_life is not None else taus[-1]
        if not life > 0:
            raise ValueError(f"total life must be positive, got {life}")
        rhos = [tau / life for tau in taus]

    return [
        FeatureVector(np.array([row[n] for n in names]), tau, rho)
        for row, tau, rho in zip(rows, taus, rhos)
    ]


def write_feature_csv(path, vectors: Sequence[FeatureVector],
                      feature_set: Iterable[str]) -> None:
    """Persist vectors as `k,tau,<features...>,rho` (rho blank when absent).

    Column names are free-form (synthetic tables use their own), so no
    validation against the computable feature set happens here.
    """
    names = tuple(str(n) for n in feature_set)
    if not names:
        raise ConfigError("feature set is empty")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "tau"] + list(names) + ["rho"])
        for k, vec in enumerate(vectors, start=1):
            if vec.values.size != len(names):
                raise ValueError(
                    f"vector length {vec.values.size} does not match "
                    f"feature set size {len(names)}")
            row = [str(k), repr(float(vec.tau))]
            row += [repr(float(v)) for v in vec.values]
            row.append("" if vec.rho is None else repr(float(vec.rho)))
            writer.writerow(row)


def read_feature_csv(path):
    """Load a feature CSV back into a TrainingTable (rho None when unlabeled)."""
    from .clustering import TrainingTable

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "k" or header[1] != "tau" or header[-1] != "rho":
            raise ConfigError(f"{path}: expected header k,tau,<features...>,rho")
        names = tuple(header[2:-1])
        if not names:
            raise ConfigError(f"{path}: no feature columns")
        taus, values, rhos = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ConfigError(f"{path}:{lineno}: expected {len(header)} columns")
            taus.append(float(row[1]))
            values.append([float(v) for v in row[2:-1]])
            rhos.append(float(row[-1]) if row[-1] != "" else math.nan)
    if not taus:
        raise ConfigError(f"{path}: no data rows")
    rho = np.array(rhos)
    return TrainingTable(
        features=np.array(values),
        rho=None if np.isnan(rho).all() else rho,
        taus=np.array(taus),
        feature_names=names,
    )
