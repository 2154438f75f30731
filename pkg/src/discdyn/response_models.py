"""Closed-form FOPDT and logistic responses.

FOPDT (first order plus dead time) step response with gain ``K``, time
constant ``T`` and dead time ``L``::

    y(t) = K * (1 - exp(-(t - L) / T))   for t >= L, else 0

Logistic growth, scaled to counts::

    K * n(t),  n(t) = n0 * exp(b t) / (1 + n0 * (exp(b t) - 1))
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .ingest import SECONDS_PER_UNIT, check_time_unit

ONE_MINUS_INV_E = 1.0 - math.exp(-1.0)  # fraction of K reached at t = L + T


@dataclass(frozen=True)
class FopdtModel:
    K: float
    T: float
    L: float = 0.0
    time_unit: str = "hour"

    def __post_init__(self):
        check_time_unit(self.time_unit)
        if not all(math.isfinite(v) for v in (self.K, self.T, self.L)):
            raise ValueError("K, T, L must be finite")
        if self.K < 0 or self.T <= 0 or self.L < 0:
            raise ValueError(f"need K >= 0, T > 0, L >= 0; got K={self.K}, T={self.T}, L={self.L}")

    def in_unit(self, time_unit: str) -> FopdtModel:
        scale = SECONDS_PER_UNIT[self.time_unit] / SECONDS_PER_UNIT[check_time_unit(time_unit)]
        return FopdtModel(self.K, self.T * scale, self.L * scale, time_unit)


@dataclass(frozen=True)
class LogisticModel:
    K: float
    b: float
    n0: float
    time_unit: str = "hour"

    def __post_init__(self):
        check_time_unit(self.time_unit)
        if not all(math.isfinite(v) for v in (self.K, self.b, self.n0)):
            raise ValueError("K, b, n0 must be finite")
        if self.K < 0 or not 0 < self.n0 < 1:
            raise ValueError(f"need K >= 0 and 0 < n0 < 1; got K={self.K}, n0={self.n0}")

    def in_unit(self, time_unit: str) -> LogisticModel:
        scale = SECONDS_PER_UNIT[self.time_unit] / SECONDS_PER_UNIT[check_time_unit(time_unit)]
        return LogisticModel(self.K, self.b / scale, self.n0, time_unit)


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


def fopdt_step_response(model: FopdtModel, t):
    t = np.asarray(t, dtype=float)
    lag = np.maximum(t - model.L, 0.0)
    # expm1 keeps precision for t just past L; lag == 0 gives exactly 0
    y = -model.K * np.expm1(-lag / model.T)
    return _scalar_or_array(y, t)


def fopdt_rate(model: FopdtModel, t):
    """dy/dt of the step response, in posts per time unit (0 before the dead time)."""
    t = np.asarray(t, dtype=float)
    rate = np.where(t >= model.L, model.K / model.T * np.exp(-np.maximum(t - model.L, 0.0) / model.T), 0.0)
    return _scalar_or_array(rate, t)


def _logistic_fraction(model: LogisticModel, t):
    # n(t) = expit(b t + logit(n0)), algebraically identical to the ratio form
    z = model.b * t + math.log(model.n0 / (1.0 - model.n0))
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


def logistic_value(model: LogisticModel, t):
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(model.K * _logistic_fraction(model, t), t)


def logistic_rate(model: LogisticModel, t):
    t = np.asarray(t, dtype=float)
    n = _logistic_fraction(model, t)
    return _scalar_or_array(model.K * model.b * n * (1.0 - n), t)


def response(model: FopdtModel | LogisticModel, t):
    if isinstance(model, FopdtModel):
        return fopdt_step_response(model, t)
    return logistic_value(model, t)


def response_rate(model: FopdtModel | LogisticModel, t):
    if isinstance(model, FopdtModel):
        return fopdt_rate(model, t)
    return logistic_rate(model, t)


@dataclass(frozen=True)
class TransferFunctionDisplay:
    text: str

    def __str__(self):
        return self.text


_TF_PATTERN = re.compile(
    r"^\s*(?P<K>[0-9]+(?:\.[0-9]*)?)\s*[·*]\s*e\s*\^\s*\{\s*-\s*(?P<L>[0-9]+(?:\.[0-9]*)?)\s*s\s*\}"
    r"\s*/\s*\(\s*(?P<T>[0-9]+(?:\.[0-9]*)?)\s*s\s*\+\s*1\s*\)\s*$"
)


def format_transfer_function(model: FopdtModel, decimals: int = 1) -> TransferFunctionDisplay:
    """Render ``K·e^{-Ls}/(Ts+1)`` with fixed-point numbers."""
    if not 0 <= decimals <= 6:
        raise ValueError("decimals must be in [0, 6]")
    f = f"{{:.{decimals}f}}"
    K, L, T = (f.format(v) for v in (model.K, model.L, model.T))
    return TransferFunctionDisplay(f"{K}·e^{{-{L}s}}/({T}s+1)")


def parse_transfer_function(text: str | TransferFunctionDisplay, time_unit: str = "hour") -> FopdtModel:
    m = _TF_PATTERN.match(str(text))
    if m is None:
        raise ValueError(f"not a transfer function of the form K·e^{{-Ls}}/(Ts+1): {text!r}")
    return FopdtModel(float(m["K"]), float(m["T"]), float(m["L"]), time_unit)
