"""Two-stage surrogate for the optimal served-user count.

Stage one fits, per operating SNR, a straight line K* ~ slope * n_bs +
intercept to the searched argmax points.  Stage two fits power laws
a * gamma^b + c to the slope and intercept trajectories over linear SNR
gamma, yielding a closed-form predictor of the best user count for any
(SNR, antenna count) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .simulation import UserCountPoint

__all__ = [
    "LinearFit",
    "PowerLawFit",
    "UserCountFit",
    "linear_fit",
    "powerlaw_fit",
    "user_count_formula",
    "fit_user_count_surface",
    "UserCountSurrogate",
]


@dataclass(frozen=True)
class LinearFit:
    """Least-squares line through (n_bs, k_best) points at one SNR."""

    slope: float
    intercept: float
    rmse: float
    snr_db: float


@dataclass(frozen=True)
class PowerLawFit:
    """Coefficients of v = a * gamma^b + c over linear SNR gamma."""

    a: float
    b: float
    c: float
    target: str
    rmse: float


@dataclass(frozen=True)
class UserCountFit:
    """Closed-form user-count predictor coefficients.

    ``apply_tan`` selects whether the antenna-count slope is the fitted
    power law directly or its tangent; both variants are exposed because
    they materially disagree at high SNR.
    """

    a1: float
    b1: float
    c1: float
    a2: float
    b2: float
    c2: float
    apply_tan: bool = True


def linear_fit(points: Sequence[Tuple[float, float]], snr_db: float = math.nan) -> LinearFit:
    """Ordinary least squares of k_best on n_bs.

    Requires at least two distinct antenna counts.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (n_bs, k_best) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.unique(x).size < 2:
        raise ValueError("abscissae are degenerate: need two distinct antenna counts")
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return LinearFit(
        slope=float(coef[0]),
        intercept=float(coef[1]),
        rmse=float(np.sqrt(np.mean(resid**2))),
        snr_db=float(snr_db),
    )


# c-candidate grid schedule: this many points per round, zooming the
# bracket tenfold each round until it collapses below float resolution.
_C_GRID_POINTS = 201
_C_GRID_ROUNDS = 12


def powerlaw_fit(points: Sequence[Tuple[float, float]], target: str = "slope") -> PowerLawFit:
    """Fit v = a * gamma^b + c by a deterministic nested search.

    For each candidate offset c on a grid, the remaining (a, b) follow
    from regressing log|v - c| on log gamma; candidates whose residuals
    v - c change sign are inadmissible for a pure power law and are
    skipped.  The grid spans [min(v) - range, max(v) + range] and zooms
    tenfold around the incumbent for a fixed number of rounds, so the
    result is reproducible and never worse than any candidate examined.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
        raise ValueError("need at least four (gamma, value) points")
    gam, v = pts[:, 0], pts[:, 1]
    if np.any(gam <= 0):
        raise ValueError("gamma values must be positive (linear SNR)")
    spread = float(v.max() - v.min())
    if spread == 0:
        raise ValueError("all values are equal; power-law fit is degenerate")

    log_g = np.log(gam)
    lo, hi = v.min() - spread, v.max() + spread
    best_rmse = math.inf
    best = None
    for _ in range(_C_GRID_ROUNDS):
        for c in np.linspace(lo, hi, _C_GRID_POINTS):
            u = v - c
            if np.any(u == 0) or (u.min() < 0 < u.max()):
                continue
            sign = 1.0 if u[0] > 0 else -1.0
            b, log_a = np.polyfit(log_g, np.log(np.abs(u)), 1)
            a = sign * math.exp(log_a)
            rmse = float(np.sqrt(np.mean((a * gam**b + c - v) ** 2)))
            if math.isfinite(rmse) and rmse < best_rmse:
                best_rmse = rmse
                best = (a, float(b), float(c))
        if best is None:
            raise ValueError("no admissible offset candidate; data do not follow a power law")
        width = (hi - lo) / 20.0
        lo, hi = best[2] - width, best[2] + width
    return PowerLawFit(a=best[0], b=best[1], c=best[2], target=target, rmse=best_rmse)


def user_count_formula(fit: UserCountFit, snr_db: float, n_bs: int) -> float:
    """Evaluate the closed-form predictor at one (SNR, antenna) pair.

    Returns an unrounded value; callers clip to the feasible integer
    range [1, n_bs - n_pu] when a served-user count is needed.
    """
    gamma = 10.0 ** (snr_db / 10.0)
    if not (math.isfinite(gamma) and gamma > 0):
        raise ValueError(f"linear SNR must be positive and finite, got {gamma}")
    slope = fit.a1 * gamma**fit.b1 + fit.c1
    if fit.apply_tan:
        slope = math.tan(slope)
    intercept = fit.a2 * gamma**fit.b2 + fit.c2
    return slope * n_bs + intercept


@dataclass(frozen=True)
class UserCountSurrogate:
    """Everything the two-stage pipeline produces."""

    linear_fits: Tuple[LinearFit, ...]
    slope_fit: PowerLawFit
    intercept_fit: PowerLawFit
    formula: UserCountFit


def fit_user_count_surface(
    points: Iterable[UserCountPoint], apply_tan: bool = True
) -> UserCountSurrogate:
    """Run both fitting stages over searched argmax points.

    Points are grouped by SNR; each group needs two distinct antenna
    counts, and at least four SNR groups are required for the power laws.
    """
    by_snr: dict[float, List[UserCountPoint]] = {}
    for p in points:
        by_snr.setdefault(p.snr_db, []).append(p)
    linear_fits = []
    for snr in sorted(by_snr):
        pts = [(p.n_bs, p.k_best) for p in by_snr[snr]]
        linear_fits.append(linear_fit(pts, snr_db=snr))
    gammas = [10.0 ** (lf.snr_db / 10.0) for lf in linear_fits]
    slope_fit = powerlaw_fit([(g, lf.slope) for g, lf in zip(gammas, linear_fits)], target="slope")
    intercept_fit = powerlaw_fit(
        [(g, lf.intercept) for g, lf in zip(gammas, linear_fits)], target="intercept"
    )
    formula = UserCountFit(
        a1=slope_fit.a,
        b1=slope_fit.b,
        c1=slope_fit.c,
        a2=intercept_fit.a,
        b2=intercept_fit.b,
        c2=intercept_fit.c,
        apply_tan=apply_tan,
    )
    return UserCountSurrogate(
        linear_fits=tuple(linear_fits),
        slope_fit=slope_fit,
        intercept_fit=intercept_fit,
        formula=formula,
    )
