"""Statistics used by the benchmark reports.

The harmonic mean is the headline frame-rate aggregate; it goes through exact
rational summation so that clean inputs give clean outputs (float summation of
reciprocals would turn [20, 20, 10] into 14.999...). Slope/R^2 come from a
plain ordinary-least-squares fit.
"""

from __future__ import annotations

import statistics

import numpy as np

from ..errors import StatError


def harmonic_mean(series) -> tuple[float, float]:
    """Harmonic mean and sample standard deviation of a positive series."""
    values = [float(v) for v in series]
    if not values:
        raise StatError("harmonic mean of an empty series")
    if any(v <= 0 for v in values):
        raise StatError("harmonic mean requires strictly positive values")
    hm = statistics.harmonic_mean(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return hm, sd


def median_iqr(series) -> tuple[float, float]:
    """Median and interquartile range with linear quantile interpolation."""
    values = np.asarray(list(series), dtype=float)
    if values.size == 0:
        raise StatError("median of an empty series")
    if not np.all(np.isfinite(values)):
        raise StatError("median requires finite values")
    q1, q2, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    return float(q2), float(q3 - q1)


def leak_regression(values, xs=None) -> tuple[float, float]:
    """OLS slope and R^2 of values against xs (defaults to 0..n-1).

    A constant series fits slope 0 with R^2 defined as 0; constant xs leave
    the slope undefined and raise.
    """
    y = np.asarray(list(values), dtype=float)
    x = np.arange(y.size, dtype=float) if xs is None else np.asarray(list(xs), dtype=float)
    if y.size != x.size:
        raise StatError(f"series lengths differ: {y.size} vs {x.size}")
    if y.size < 2:
        raise StatError("regression requires at least two points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise StatError("regression requires finite values")

    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(((x - x_mean) ** 2).sum())
    if sxx == 0.0:
        raise StatError("regression against constant x is undefined")
    sxy = float(((x - x_mean) * (y - y_mean)).sum())
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean

    residuals = y - (intercept + slope * x)
    ss_res = float((residuals**2).sum())
    ss_tot = float(((y - y_mean) ** 2).sum())
    r2 = 0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, r2
