"""Lifetime bookkeeping, RUL conversion, smoothing and evaluation metrics."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter

from .errors import ConfigError
from .fis import TSFISModel, predict_table

# Ratio estimates below this floor make the remaining-life conversion blow
# up; they are reported as indeterminate (NaN) instead.
RHO_FLOOR = 1e-3

INDETERMINATE = math.nan


def pul_ratio(tau: float, total_life: float) -> float:
    """Past-useful-life ratio tau / total_life, in [0, 1]."""
    if not total_life > 0:
        raise ValueError(f"total life must be positive, got {total_life}")
    if tau < 0 or tau > total_life:
        raise ValueError(f"tau must lie in [0, {total_life}], got {tau}")
    return tau / total_life


def rul_from_ratio(rho_hat: float, tau: float, floor: float = RHO_FLOOR) -> float:
    """Remaining useful life (1/rho - 1) * tau; NaN when rho is below floor."""
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    if rho_hat > 1.0:
        raise ValueError(f"ratio estimate must not exceed 1, got {rho_hat}")
    if not rho_hat >= floor:  # also catches NaN
        return INDETERMINATE
    return (1.0 / rho_hat - 1.0) * tau


def savitzky_golay(series, order: int = 2, frame: int = 61) -> np.ndarray:
    """Least-squares polynomial smoothing over a centered frame.

    Boundary points are fitted with the edge-window polynomial evaluated
    off-center, so the output length equals the input length.  Series
    shorter than the frame pass through unchanged with a warning.
    """
    if frame % 2 == 0:
        raise ConfigError(f"filter frame length must be odd, got {frame}")
    if frame <= order:
        raise ConfigError(f"frame ({frame}) must exceed polynomial order ({order})")
    x = np.asarray(series, dtype=float)
    if x.size < frame:
        warnings.warn(
            f"series of {x.size} points is shorter than the filter frame "
            f"({frame}); returning it unsmoothed", RuntimeWarning, stacklevel=2)
        return x.copy()
    return savgol_filter(x, frame, order, mode="interp")


def smooth_rul(series, order: int = 2, frame: int = 61) -> np.ndarray:
    """Savitzky-Golay smoothing applied per contiguous finite run.

    Indeterminate (NaN) entries stay NaN; each maximal finite run is
    smoothed independently (short runs pass through unchanged).
    """
    x = np.asarray(series, dtype=float)
    out = x.copy()
    finite = np.isfinite(x)
    if not finite.any():
        return out
    boundaries = np.flatnonzero(np.diff(finite.astype(int)) != 0) + 1
    for segment in np.split(np.arange(x.size), boundaries):
        if segment.size and finite[segment[0]]:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                out[segment] = savitzky_golay(x[segment], order, frame)
    return out


def rrmse(true_rho, est_rho) -> float:
    """Relative root mean square error of the ratio estimates.

    Observations with a zero true ratio are dropped with a warning (the
    relative error divides by the true value).
    """
    t = np.asarray(true_rho, dtype=float)
    e = np.asarray(est_rho, dtype=float)
    if t.shape != e.shape or t.ndim != 1:
        raise ValueError("true and estimated sequences must be equal-length 1-D")
    if t.size == 0:
        raise ValueError("empty sequences")
    keep = t != 0.0
    if not keep.all():
        warnings.warn(
            f"dropping {np.count_nonzero(~keep)} observation(s) with zero true "
            "ratio from the relative error", RuntimeWarning, stacklevel=2)
    if not keep.any():
        raise ValueError("no observations with nonzero true ratio")
    rel = (t[keep] - e[keep]) / t[keep]
    return float(np.sqrt(np.mean(rel * rel)))


def arrmse(per_bearing) -> float:
    """Arithmetic mean of per-bearing RRMSE values."""
    values = np.asarray(per_bearing, dtype=float)
    if values.size == 0:
        raise ValueError("need at least one bearing")
    return float(values.mean())


@dataclass
class BearingEvaluation:
    """Per-observation curves and the summary error for one test bearing."""

    bearing_id: str
    taus: np.ndarray
    rho_true: np.ndarray
    rho_hat_raw: np.ndarray
    rho_hat: np.ndarray          # clamped to [0, 1]
    rul_true: np.ndarray
    rul_hat: np.ndarray
    rul_hat_smoothed: np.ndarray
    rrmse: float


@dataclass
class EvaluationReport:
    """Evaluation of one identification method over several test bearings."""

    method: str
    bearings: list[BearingEvaluation]

    @property
    def arrmse(self) -> float:
        return arrmse([b.rrmse for b in self.bearings])


def evaluate_model(model: TSFISModel, tables, method: str | None = None,
                   sg_order: int = 2, sg_frame: int = 61) -> EvaluationReport:
    """Run the model over labeled tables and collect error metrics and curves.

    ``tables`` maps bearing ids to labeled TrainingTable objects (any mapping
    or iterable of (id, table) pairs).  The error metric uses the raw model
    output; the RUL curves use the clamped-and-floored conversion.
    """
    items = tables.items() if hasattr(tables, "items") else tables
    evaluations = []
    for bearing_id, table in items:
        if table.rho is None:
            raise ValueError(f"bearing {bearing_id}: evaluation needs labeled rows")
        if table.taus is None:
            raise ValueError(f"bearing {bearing_id}: evaluation needs observation times")
        raw = predict_table(model, table.features, table.taus)
        clamped = np.clip(raw, 0.0, 1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            error = rrmse(table.rho, raw)
        rul_true = np.array([
            rul_from_ratio(r, t) for r, t in zip(table.rho, table.taus)])
        rul_hat = np.array([
            rul_from_ratio(r, t) for r, t in zip(clamped, table.taus)])
        evaluations.append(BearingEvaluation(
            bearing_id=str(bearing_id),
            taus=np.asarray(table.taus, dtype=float),
            rho_true=np.asarray(table.rho, dtype=float),
            rho_hat_raw=raw,
            rho_hat=clamped,
            rul_true=rul_true,
            rul_hat=rul_hat,
            rul_hat_smoothed=smooth_rul(rul_hat, sg_order, sg_frame),
            rrmse=error,
        ))
    if not evaluations:
        raise ValueError("no bearings to evaluate")
    return EvaluationReport(method=method or model.variant, bearings=evaluations)


def _cell(value: float) -> str:
    return "" if not math.isfinite(value) else repr(float(value))


def write_curves_csv(report: EvaluationReport, path) -> None:
    """Per-observation curves for external plotting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bearing", "k", "tau", "rho_true", "rho_hat",
                         "rul_true", "rul_hat", "rul_hat_smoothed"])
        for bearing in report.bearings:
            for k in range(bearing.taus.size):
                writer.writerow([
                    bearing.bearing_id, str(k + 1),
                    repr(float(bearing.taus[k])),
                    repr(float(bearing.rho_true[k])),
                    repr(float(bearing.rho_hat_raw[k])),
                    _cell(bearing.rul_true[k]),
                    _cell(bearing.rul_hat[k]),
                    _cell(bearing.rul_hat_smoothed[k]),
                ])


def write_summary_csv(reports, path) -> None:
    """Per-bearing RRMSE rows plus one ARRMSE row per method."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "bearing", "rrmse"])
        for report in reports:
            for bearing in report.bearings:
                writer.writerow([report.method, bearing.bearing_id,
                                 repr(bearing.rrmse)])
            writer.writerow([report.method, "ARRMSE", repr(report.arrmse)])
