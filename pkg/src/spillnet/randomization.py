"""Randomization test of the sharp no-spillover null.

The test redraws the instrument peers' treatments i.i.d. Bernoulli and
holds outcomes fixed: under the null the instrument has no path to the
outcome, so every redraw is an equally likely realization.  Statistics
that regress on exposure recompute it for each redraw through
``counterfactual_exposure`` before evaluating.

All ``b`` draws are generated from a counter-based (Philox) stream keyed
only by the seed, so results are deterministic and independent of
evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import ExposureMap, NetworkDataset, counterfactual_exposure
from .errors import (
    DataError,
    DegenerateArmError,
    EstimationError,
    MissingLinksError,
)

__all__ = [
    "FrtResult",
    "frt",
    "statistic_itt",
    "statistic_ittc",
    "STATISTICS",
]

STAT_TSLS = "tsls"
STAT_WLS = "wls"
STAT_ITT = "itt"
STAT_ITTC = "ittc"
STATISTICS = (STAT_TSLS, STAT_WLS, STAT_ITT, STAT_ITTC)

SIDED_UPPER = "upper"
SIDED_ABS = "abs"

# Per-draw denominator threshold mirroring the weak-first-stage rule.
_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class FrtResult:
    """Observed statistic, simulated p-value, and draw diagnostics."""

    statistic_kind: str
    observed: float
    p_value: float
    b: int
    sidedness: str
    exact_form: bool
    draws_summary: tuple[float, float, float, float]  # mean, sd, min, max
    n_degenerate_draws: int


def statistic_itt(y, d1) -> float:
    """Mean outcome difference by the instrument peer's realized treatment."""
    y = np.asarray(y, dtype=np.float64)
    d1 = np.asarray(d1)
    n1 = int((d1 == 1).sum())
    if n1 == 0 or n1 == d1.size:
        raise DegenerateArmError("instrument arm is empty")
    return float(y[d1 == 1].mean() - y[d1 == 0].mean())


def statistic_ittc(y, d1, a1) -> float:
    """ITT contrast restricted to units with a first-peer link."""
    y = np.asarray(y, dtype=np.float64)
    d1 = np.asarray(d1)
    a1 = np.asarray(a1)
    keep = a1 == 1
    if not keep.any():
        raise DegenerateArmError("no linked units")
    return statistic_itt(y[keep], d1[keep])


def _draw_matrix(n: int, b: int, p1j: float, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    return (rng.random((b, n)) < p1j).astype(np.float64)


def _itt_stats(Z: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = y.size
    n1 = Z.sum(axis=1)
    s1 = Z @ y
    total = y.sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        t = s1 / n1 - (total - s1) / (n - n1)
    t[(n1 == 0) | (n1 == n)] = -np.inf
    return t


def _iv_ratio_stats(
    Z: np.ndarray, y: np.ndarray, d: np.ndarray, m0: np.ndarray, dm: np.ndarray
) -> np.ndarray:
    """Spillover-coefficient ratio for every draw (rows of Z).

    Exposure under a redraw z is affine in z: m = m0 + dm * z, with
    dm = M(r0 + a1) - M(r0).  Residualizing z on (1, d) reduces each
    ratio term to matrix products of Z with fixed vectors.
    """
    d1mask = d == 1
    n1 = int(d1mask.sum())
    n0 = d.size - n1
    if n1 == 0 or n0 == 0:
        raise EstimationError("own treatment d is constant")
    zd = Z @ d
    zc = Z.sum(axis=1) - zd

    def resid_dot(v):
        return Z @ v - zd * (v[d1mask].sum() / n1) - zc * (v[~d1mask].sum() / n0)

    num = resid_dot(y)
    den = resid_dot(m0)
    den += (
        Z @ dm
        - zd * (Z @ (dm * d)) / n1
        - zc * (Z @ (dm * (1.0 - d))) / n0
    )
    bad = np.abs(den) / d.size < _DEGENERATE_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    out[bad] = -np.inf
    return out


def _stat_evaluator(dataset: NetworkDataset, statistic: str, exposure_map: ExposureMap):
    """Build a function mapping a (b, n) draw matrix to b statistic values."""
    y = dataset.y.astype(np.float64)
    if statistic == STAT_ITT:
        return lambda Z: _itt_stats(Z, y)

    if dataset.a1 is None:
        raise MissingLinksError(f"statistic {statistic!r} needs the a1 column")
    a1 = dataset.a1
    if statistic == STAT_ITTC:
        keep = a1 == 1
        yk = y[keep]
        return lambda Z: _itt_stats(Z[:, keep], yk)

    # Exposure-based statistics: precompute the two counterfactual M values.
    r0 = counterfactual_exposure(dataset.r, a1, dataset.d1, 0)
    m0 = exposure_map.apply(r0, dataset.n_peers, dataset.degree)
    m1 = exposure_map.apply(r0 + a1, dataset.n_peers, dataset.degree)
    dm = m1 - m0
    d = dataset.d.astype(np.float64)
    if statistic == STAT_TSLS:
        return lambda Z: _iv_ratio_stats(Z, y, d, m0, dm)
    if statistic == STAT_WLS:
        keep = a1 == 1
        yk, dk, m0k, dmk = y[keep], d[keep], m0[keep], dm[keep]
        return lambda Z: _iv_ratio_stats(Z[:, keep], yk, dk, m0k, dmk)
    raise DataError(f"unknown statistic {statistic!r}")


def _p_value(stats: np.ndarray, observed: float, sidedness: str, exact: bool) -> float:
    if sidedness == SIDED_ABS:
        hits = int((np.abs(stats) >= abs(observed)).sum())
    elif sidedness == SIDED_UPPER:
        hits = int((stats >= observed).sum())
    else:
        raise DataError(f"unknown sidedness {sidedness!r}")
    b = stats.size
    if exact:
        return (1 + hits) / (1 + b)
    return hits / b


def frt(
    dataset: NetworkDataset,
    exposure_map: ExposureMap,
    statistic: str,
    b: int,
    p1j: float | None = None,
    seed: int = 0,
    sidedness: str = SIDED_UPPER,
    exact: bool = False,
) -> FrtResult:
    """Randomization p-value for the chosen statistic.

    ``p1j`` is the known design probability of the instrument peers'
    treatment; when omitted it falls back to the empirical mean of the
    observed assignments.  Draws whose statistic is incomputable score
    minus infinity, so they never exceed the observed value.
    """
    if b < 1:
        raise DataError("need at least one draw")
    if statistic not in STATISTICS:
        raise DataError(f"unknown statistic {statistic!r}")
    if p1j is None:
        p1j = float(dataset.d1.mean())
    if not 0.0 < p1j < 1.0:
        raise DataError("p1j must lie strictly inside (0, 1)")

    evaluate = _stat_evaluator(dataset, statistic, exposure_map)
    observed = float(evaluate(dataset.d1.astype(np.float64)[None, :])[0])
    if not np.isfinite(observed):
        raise DegenerateArmError("observed statistic is not computable on this data")

    Z = _draw_matrix(dataset.n, b, p1j, seed)
    stats = evaluate(Z)
    finite = stats[np.isfinite(stats)]
    if finite.size:
        summary = (
            float(finite.mean()),
            float(finite.std(ddof=1)) if finite.size > 1 else 0.0,
            float(finite.min()),
            float(finite.max()),
        )
    else:
        summary = (np.nan, np.nan, np.nan, np.nan)
    return FrtResult(
        statistic_kind=statistic,
        observed=observed,
        p_value=_p_value(stats, observed, sidedness, exact),
        b=b,
        sidedness=sidedness,
        exact_form=exact,
        draws_summary=summary,
        n_degenerate_draws=int(stats.size - finite.size),
    )
