"""Golden-section minimisation, scalar and batched."""

from __future__ import annotations

import math

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQ = (3 - math.sqrt(5)) / 2  # 1 / phi^2


def _n_steps(h: float, tol: float) -> int:
    if h <= tol:
        return 0
    return int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))


def golden_section_min(f, a: float, b: float, tol: float = 1e-8) -> tuple[float, float]:
    """Minimise a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x))`` for the best point evaluated; the bracket shrinks
    until it is narrower than ``tol``.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = (a + b) / 2
        return x, f(x)
    c = a + INV_PHI_SQ * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(_n_steps(h, tol)):
        h *= INV_PHI
        if yc < yd:
            b, d, yd = d, c, yc
            c = a + INV_PHI_SQ * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            d = a + INV_PHI * h
            yd = f(d)
    return (c, yc) if yc < yd else (d, yd)


def golden_section_min_batch(f, a: float, b: float, size: int, tol: float = 1e-8):
    """Run ``size`` independent golden-section searches in lock-step.

    ``f`` maps an array of ``size`` abscissae to ``size`` objective values,
    one per search. All searches share the starting bracket ``[a, b]``.
    """
    lo = np.full(size, float(min(a, b)))
    h = abs(b - a)
    c = lo + INV_PHI_SQ * h
    d = lo + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(_n_steps(h, tol)):
        h *= INV_PHI
        left = yc < yd
        # left: keep [lo, d], new d = old c; right: keep [c, hi], new c = old d
        new_lo = np.where(left, lo, c)
        new_c = np.where(left, lo + INV_PHI_SQ * h, d)
        new_d = np.where(left, c, new_lo + INV_PHI * h)
        y_keep = np.where(left, yc, yd)
        x_new = np.where(left, new_c, new_d)
        y_new = f(x_new)
        yc = np.where(left, y_new, y_keep)
        yd = np.where(left, y_keep, y_new)
        lo, c, d = new_lo, new_c, new_d
    left = yc < yd
    return np.where(left, c, d), np.where(left, yc, yd)
