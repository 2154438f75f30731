"""Identification of FOPDT and logistic models from a cumulative reply series.

Three FOPDT estimators are provided so they can be cross-checked against
each other: two-point (28.3 % / 63.2 % crossings), area (average residence
time) and least squares (dead-time grid + golden-section search).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .ingest import StepResponseSeries
from .optimize import golden_section_min, golden_section_min_batch
from .response_models import (
    ONE_MINUS_INV_E,
    FopdtModel,
    LogisticModel,
    fopdt_step_response,
    format_transfer_function,
    logistic_value,
)

FOPDT_METHODS = ("two_point", "area", "least_squares")
METHODS = FOPDT_METHODS + ("logistic",)

# The upper level is exactly 1 - 1/e, so that t2 = L + T holds without bias.
TWO_POINT_LEVELS = (0.283, ONE_MINUS_INV_E)
MIN_REPLIES = 3

LS_GRID_INTERVALS = 1000
LS_T_LOWER = 1e-3
LS_T_UPPER_FACTOR = 10.0


class IdentificationError(ValueError):
    code = "identification_error"


class InsufficientDataError(IdentificationError):
    code = "insufficient_data"


class RequiresSteadyStateError(IdentificationError):
    code = "requires_steady_state"


class DegenerateCrossingError(IdentificationError):
    code = "degenerate_crossing"


class DegenerateNormalizationError(IdentificationError):
    code = "degenerate_normalization"


class NumericalFailureError(IdentificationError):
    code = "numerical_failure"


@dataclass(frozen=True)
class FitReport:
    model: FopdtModel | LogisticModel
    method: str
    rmse: float
    residuals: np.ndarray  # rows of (t, observed - fitted)
    gain_source: str  # "steady_state_reading" or "fitted"

    def to_dict(self, decimals: int = 1) -> dict:
        m = self.model
        out = {"method": self.method, "K": float(m.K)}
        if isinstance(m, FopdtModel):
            out.update(T=float(m.T), L=float(m.L))
        else:
            out.update(b=float(m.b), n0=float(m.n0))
        out.update(time_unit=m.time_unit, rmse=float(self.rmse), gain_source=self.gain_source)
        if isinstance(m, FopdtModel):
            out["transfer_function"] = format_transfer_function(m, decimals).text
        return out


class Prediction(NamedTuple):
    expected: float
    rounded: int


def _rmse(residuals: np.ndarray) -> float:
    return float(math.sqrt(np.mean(residuals[:, 1] ** 2)))


def observation_points(series: StepResponseSeries) -> tuple[np.ndarray, np.ndarray]:
    """Series points plus the terminal (horizon, final_count) point when the archive runs past the last reply."""
    t, y = series.t, series.y
    if series.horizon is not None and series.horizon > t[-1]:
        t = np.append(t, series.horizon)
        y = np.append(y, series.final_count)
    return t, y


def _report(series, model, method, gain_source) -> FitReport:
    t, y = observation_points(series)
    fitted = fopdt_step_response(model, t) if isinstance(model, FopdtModel) else logistic_value(model, t)
    residuals = np.column_stack([t, y - fitted])
    return FitReport(model, method, _rmse(residuals), residuals, gain_source)


def _require_data(series: StepResponseSeries) -> None:
    if series.final_count < MIN_REPLIES:
        raise InsufficientDataError(f"need at least {MIN_REPLIES} replies, series has {series.final_count:g}")


def estimate_gain(series: StepResponseSeries) -> float:
    """Steady-state reading of the gain: the total number of replies."""
    if not series.complete:
        raise RequiresSteadyStateError(
            "series has not reached steady state; use least_squares_fit(..., fit_gain=True)"
        )
    return series.final_count


def _distinct_points(series: StepResponseSeries) -> tuple[np.ndarray, np.ndarray]:
    # stacked posts at one instant collapse to the highest count there
    t, y = series.t, series.y
    last = np.append(t[1:] != t[:-1], True)
    return t[last], y[last]


def first_crossing(t: np.ndarray, y: np.ndarray, level: float) -> float:
    """First time the piecewise-linear curve through (t, y) reaches ``level``."""
    idx = int(np.argmax(y >= level))
    if y[idx] < level:
        raise DegenerateCrossingError(f"curve never reaches level {level:g}")
    if idx == 0:
        return float(t[0])
    t0, t1, y0, y1 = t[idx - 1], t[idx], y[idx - 1], y[idx]
    return float(t0 + (level - y0) / (y1 - y0) * (t1 - t0))


def two_point_fit(series: StepResponseSeries) -> FitReport:
    _require_data(series)
    K = estimate_gain(series)
    p1, p2 = TWO_POINT_LEVELS
    t, y = _distinct_points(series)
    t1 = first_crossing(t, y, p1 * K)
    t2 = first_crossing(t, y, p2 * K)
    if t2 <= t1:
        raise DegenerateCrossingError(f"crossing times out of order: t1={t1:g}, t2={t2:g}")
    T = (t2 - t1) / math.log((1 - p1) / (1 - p2))
    L = max(0.0, t2 - T * math.log(1 / (1 - p2)))
    return _report(series, FopdtModel(K, T, L, series.time_unit), "two_point", "steady_state_reading")


def _segment_integrals(series: StepResponseSeries) -> tuple[np.ndarray, np.ndarray]:
    """Per-segment integrals of y between consecutive points, and segment start values."""
    t, y = series.t, series.y
    dt = np.diff(t)
    if series.sampled:
        return dt * (y[:-1] + y[1:]) / 2, y[:-1]
    return dt * y[:-1], y[:-1]


def integral_upto(series: StepResponseSeries, x: float) -> float:
    """Integral of the observed curve from 0 to ``x``; the last value is held beyond the data."""
    t, y = series.t, series.y
    seg, _ = _segment_integrals(series)
    if x >= t[-1]:
        return float(seg.sum() + y[-1] * (x - t[-1]))
    j = int(np.searchsorted(t, x, side="right")) - 1  # x lies in [t[j], t[j+1])
    partial = seg[:j].sum()
    if series.sampled:
        frac = (x - t[j]) / (t[j + 1] - t[j])
        y_x = y[j] + frac * (y[j + 1] - y[j])
        partial += (x - t[j]) * (y[j] + y_x) / 2
    else:
        partial += (x - t[j]) * y[j]
    return float(partial)


def area_fit(series: StepResponseSeries) -> FitReport:
    _require_data(series)
    K = estimate_gain(series)
    if K <= 0:
        raise InsufficientDataError("zero gain")
    t_end = float(series.t[-1])
    # beyond the last point the curve sits at K, so the area above it is zero
    area_above = K * t_end - integral_upto(series, t_end)
    residence = area_above / K
    area_below = integral_upto(series, residence)
    T = math.e * area_below / K
    L = max(0.0, residence - T)
    if not T > 0:
        raise NumericalFailureError(f"area method gave non-positive T={T:g}")
    return _report(series, FopdtModel(K, T, L, series.time_unit), "area", "steady_state_reading")


def _ls_objective(t, y, K_fixed):
    """SSE over (log T, L): a batched form for the dead-time grid and a scalar form for refinement."""
    y_sq = float(np.dot(y, y))

    def batch(logT, L, buf):
        # buf <- exp(-(t - L)_+ / T) - 1 == -phi, computed in place
        np.subtract(t, L[:, None], out=buf)
        np.maximum(buf, 0.0, out=buf)
        buf *= -np.exp(-logT)[:, None]
        np.expm1(buf, out=buf)
        if K_fixed is not None:
            buf *= K_fixed
            buf += y  # residual y - K phi
            return np.einsum("ij,ij->i", buf, buf)
        # optimal gain for this (T, L) in closed form
        s_yp = -(buf @ y)
        s_pp = np.einsum("ij,ij->i", buf, buf)
        with np.errstate(invalid="ignore", divide="ignore"):
            gain_part = np.where(s_pp > 0, s_yp**2 / s_pp, 0.0)
        return y_sq - gain_part

    def scalar(logT, L):
        phi = -np.expm1(np.maximum(t - L, 0.0) * -math.exp(-logT))
        if K_fixed is not None:
            r = y - K_fixed * phi
            return float(r @ r)
        s_pp = float(phi @ phi)
        return y_sq - float(phi @ y) ** 2 / s_pp if s_pp > 0 else y_sq

    return batch, scalar


def _ls_gain(t, y, T, L) -> float:
    phi = -np.expm1(-np.maximum(t - L, 0.0) / T)
    s_pp = float(phi @ phi)
    return float(phi @ y) / s_pp if s_pp > 0 else 0.0


def least_squares_fit(series: StepResponseSeries, fit_gain: bool = False) -> FitReport:
    """Least-squares FOPDT fit over the observation points.

    The dead time is scanned on a 1001-point grid over ``[0, t_end]`` and then
    refined by golden-section search around the best grid node; for each dead
    time the time constant comes from a golden-section search over
    ``log T`` on ``[1e-3, 10 t_end]``. With ``fit_gain`` the gain is the
    closed-form linear least-squares value for each (T, L); otherwise it is
    the steady-state reply count.
    """
    _require_data(series)
    if fit_gain:
        K_fixed = None
    else:
        K_fixed = float(estimate_gain(series))
    t, y = observation_points(series)
    t_end = series.t_end
    if not t_end > 0:
        raise InsufficientDataError("series spans no time")
    sse_batch, sse = _ls_objective(t, y, K_fixed)
    lo, hi = math.log(LS_T_LOWER), math.log(LS_T_UPPER_FACTOR * t_end)

    step = t_end / LS_GRID_INTERVALS
    L_grid = np.arange(LS_GRID_INTERVALS + 1) * step
    chunk = max(1, 1_000_000 // t.size)
    buf = np.empty((chunk, t.size))
    best_vals = np.empty_like(L_grid)
    for start in range(0, L_grid.size, chunk):
        L_chunk = L_grid[start : start + chunk]
        work = buf[: L_chunk.size]
        _, vals = golden_section_min_batch(
            lambda x, Lc=L_chunk, w=work: sse_batch(x, Lc, w), lo, hi, L_chunk.size, tol=1e-3
        )
        best_vals[start : start + chunk] = vals
    if not np.all(np.isfinite(best_vals)):
        raise NumericalFailureError("least-squares objective is not finite on the dead-time grid")
    i_best = int(np.argmin(best_vals))

    def profile(L):
        return golden_section_min(lambda x: sse(x, L), lo, hi, tol=1e-10)

    L_lo = max(0.0, L_grid[i_best] - step)
    L_hi = min(t_end, L_grid[i_best] + step)
    L_hat, val = golden_section_min(lambda L: profile(L)[1], L_lo, L_hi, tol=1e-9 * max(t_end, 1.0))
    logT_hat, _ = profile(L_hat)
    if not math.isfinite(val) or not math.isfinite(logT_hat):
        raise NumericalFailureError("least-squares refinement produced a non-finite result")
    T_hat = math.exp(logT_hat)
    K_hat = K_fixed if K_fixed is not None else _ls_gain(t, y, T_hat, L_hat)
    model = FopdtModel(K_hat, T_hat, L_hat, series.time_unit)
    return _report(series, model, "least_squares", "fitted" if fit_gain else "steady_state_reading")


def logistic_fit(series: StepResponseSeries, gain: float | None = None) -> FitReport:
    """Logistic fit by linear regression of logit(y / K) on t.

    ``gain`` overrides the steady-state reading of K (useful for sampled
    curves whose horizon stops short of saturation).
    """
    _require_data(series)
    K = float(gain) if gain is not None else float(estimate_gain(series))
    eps = 1.0 / (2.0 * K)
    t, y = observation_points(series)
    frac = y / K
    clamped = (frac <= eps) | (frac >= 1 - eps)
    if clamped.all():
        raise DegenerateNormalizationError("every point lies at a clamp boundary")
    n_hat = np.clip(frac, eps, 1 - eps)
    if np.ptp(t) == 0:
        raise DegenerateNormalizationError("all observations share one time")
    z = np.log(n_hat / (1 - n_hat))
    b, intercept = np.polyfit(t, z, 1)
    n0 = 1.0 / (1.0 + math.exp(-intercept))
    model = LogisticModel(K, float(b), n0, series.time_unit)
    source = "fitted" if gain is not None else "steady_state_reading"
    return _report(series, model, "logistic", source)


def fit(series: StepResponseSeries, method: str = "least_squares", fit_gain: bool | None = None) -> FitReport:
    """Dispatch by method name. For least squares, the gain is fitted when the series is incomplete unless told otherwise."""
    if method == "two_point":
        return two_point_fit(series)
    if method == "area":
        return area_fit(series)
    if method == "least_squares":
        return least_squares_fit(series, fit_gain=(not series.complete) if fit_gain is None else fit_gain)
    if method == "logistic":
        return logistic_fit(series)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def characteristic_time(model: FopdtModel) -> float:
    """L + T, when the response reaches 1 - 1/e of its gain."""
    return model.L + model.T


def predict_count_at(model: FopdtModel, t: float) -> Prediction:
    value = float(fopdt_step_response(model, t))
    return Prediction(value, int(math.floor(value + 0.5)))
