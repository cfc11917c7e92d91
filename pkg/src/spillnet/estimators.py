"""Sample OLS, 2SLS, and WLS fits of an outcome on (1, own treatment, exposure).

The instrument is always the first peer's treatment.  The spillover
coefficient of the IV fits is computed by the ratio form

    beta_s = (z~' y) / (z~' m),      z~ = z residualized on (1, d),

and the remaining coefficients are recovered from the second-stage
normal equations, so instrument orthogonality of the residuals holds to
machine precision.  Two standard-error families are always computed:
classical (homoskedastic, small-sample df correction) and the robust
plug-in sandwich of the just-identified moment system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import _as_binary_vector, _as_float_vector
from .errors import (
    InsufficientCompliersError,
    RankDeficientError,
    WeakFirstStageError,
)

__all__ = [
    "Fit",
    "ols_fit",
    "tsls_fit",
    "wls_fit",
    "plug_in_variance",
    "spillover_design_variance",
    "WEAK_FIRST_STAGE_TOL",
]

# |z~'m| / n below this is treated as a failed first stage rather than
# silently dividing by ~0.
WEAK_FIRST_STAGE_TOL = 1e-12

_RANK_TOL = 1e-10

METHOD_OLS = "ols"
METHOD_TSLS = "tsls"
METHOD_WLS = "wls"

SE_CLASSICAL = "classical"
SE_ROBUST = "robust"


@dataclass(frozen=True)
class Fit:
    """Coefficient triple with both standard-error families.

    ``t_values`` divide each coefficient by the standard error family
    named in ``se_kind_for_t``.  ``n_used`` is the full sample size for
    OLS/2SLS and the complier count for WLS.
    """

    method: str
    beta0: float
    beta_d: float
    beta_s: float
    se_classical: tuple[float, float, float]
    se_robust: tuple[float, float, float]
    se_kind_for_t: str
    t_values: tuple[float, float, float]
    n_used: int

    @property
    def coefficients(self) -> tuple[float, float, float]:
        return (self.beta0, self.beta_d, self.beta_s)


def _t_stats(coefs, se):
    out = []
    for c, s in zip(coefs, se):
        if s > 0:
            out.append(float(c / s))
        else:
            out.append(0.0 if c == 0 else float(np.copysign(np.inf, c)))
    return tuple(out)


def _make_fit(method, coefs, se_cl, se_rob, se_kind_for_t, n_used) -> Fit:
    se = se_cl if se_kind_for_t == SE_CLASSICAL else se_rob
    return Fit(
        method=method,
        beta0=float(coefs[0]),
        beta_d=float(coefs[1]),
        beta_s=float(coefs[2]),
        se_classical=tuple(float(v) for v in se_cl),
        se_robust=tuple(float(v) for v in se_rob),
        se_kind_for_t=se_kind_for_t,
        t_values=_t_stats(coefs, se),
        n_used=int(n_used),
    )


def _check_design_gram(gram: np.ndarray):
    """Reject constant or collinear regressor columns via the Gram matrix."""
    gram = 0.5 * (gram + gram.T)
    scale = np.sqrt(np.abs(np.diag(gram)))
    if np.any(scale == 0):
        raise RankDeficientError("a regressor column is identically zero")
    scaled = gram / np.outer(scale, scale)
    if np.linalg.eigvalsh(scaled)[0] < _RANK_TOL:
        raise RankDeficientError("regressors are constant or collinear")


def _check_design(X: np.ndarray):
    _check_design_gram(X.T @ X)


def _residualize_on_const_d(v: np.ndarray, d: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Residual of v after weighted least squares on (1, d): arm means."""
    n1 = float(w @ d)
    n0 = float(w.sum()) - n1
    if n1 <= 0 or n0 <= 0:
        raise RankDeficientError("own treatment d is constant")
    mean1 = float(w @ (v * d)) / n1
    mean0 = float(w @ (v * (1.0 - d))) / n0
    return v - np.where(d == 1, mean1, mean0)


def _classical_cov(xtx_like: np.ndarray, rss: float, n: int) -> np.ndarray:
    sigma2 = rss / (n - 3)
    return sigma2 * np.linalg.inv(xtx_like)


def _robust_cov_iv(Z: np.ndarray, X: np.ndarray, resid: np.ndarray) -> np.ndarray:
    """Sandwich of the moment system E[z (y - x'b)] = 0."""
    bread = np.linalg.inv(Z.T @ X)
    zu = Z * resid[:, None]
    meat = zu.T @ zu
    return bread @ meat @ bread.T


def ols_fit(y, d, m, se_kind_for_t: str = SE_CLASSICAL) -> Fit:
    """Least-squares fit of y on (1, d, m) via the 3x3 normal equations."""
    y = _as_float_vector("y", y)
    d = _as_binary_vector("d", d).astype(np.float64)
    m = _as_float_vector("m", m)
    n = y.size
    if not (d.size == n and m.size == n):
        raise RankDeficientError("inputs have mismatched lengths")
    if n < 4:
        raise RankDeficientError("need at least 4 observations for 3 coefficients")
    X = np.column_stack([np.ones(n), d, m])
    _check_design(X)
    gram = X.T @ X
    coefs = np.linalg.solve(gram, X.T @ y)
    resid = y - X @ coefs
    rss = float(resid @ resid)
    cov_cl = _classical_cov(gram, rss, n)
    cov_rob = _robust_cov_iv(X, X, resid)
    return _make_fit(
        METHOD_OLS,
        coefs,
        np.sqrt(np.diag(cov_cl)),
        np.sqrt(np.diag(cov_rob)),
        se_kind_for_t,
        n,
    )


def _iv_core(y, d, m, z, weights, method, se_kind_for_t) -> Fit:
    """Shared IV machinery with 0/1 observation weights.

    The unweighted call is plain 2SLS; binary weights give the
    complier-restricted fit in its diagonal-weight formulation without
    materializing the subsample.
    """
    n = y.size
    if weights is None:
        w = np.ones(n)
        n_eff = n
    else:
        w = weights.astype(np.float64)
        n_eff = int(round(w.sum()))
    if n_eff < 4:
        raise RankDeficientError("need at least 4 observations for 3 coefficients")
    X = np.column_stack([np.ones(n), d, m])
    Z = np.column_stack([np.ones(n), d, z])
    Zw = Z * w[:, None]
    _check_design_gram(Zw.T @ Z)
    _check_design_gram((X * w[:, None]).T @ X)

    z_tilde = _residualize_on_const_d(z, d, w)
    denom = float((w * z_tilde) @ m)
    if abs(denom) / n_eff < WEAK_FIRST_STAGE_TOL:
        raise WeakFirstStageError(
            f"first-stage cross moment |z~'m|/n = {abs(denom) / n_eff:.3e} is numerically zero"
        )
    beta_s = float((w * z_tilde) @ y) / denom

    # Second-stage normal equations for the remaining two coefficients:
    # weighted regression of y - beta_s * m on (1, d), i.e. arm means.
    y_adj = y - beta_s * m
    beta1 = float(w @ (y_adj * d)) / float(w @ d)
    beta0 = float(w @ (y_adj * (1.0 - d))) / float(w @ (1.0 - d))
    coefs = np.array([beta0, beta1 - beta0, beta_s])

    resid = y - X @ coefs
    rss = float((w * resid) @ resid)
    # Classical covariance uses the projected design (1, d, m_hat).
    gram_z = Zw.T @ Z
    ztx = Zw.T @ X
    xhat_gram = ztx.T @ np.linalg.solve(gram_z, ztx)
    cov_cl = _classical_cov(xhat_gram, rss, n_eff)
    bread = np.linalg.inv(ztx)
    zu = Zw * resid[:, None]  # w is idempotent for 0/1 weights
    cov_rob = bread @ (zu.T @ zu) @ bread.T
    return _make_fit(
        method,
        coefs,
        np.sqrt(np.diag(cov_cl)),
        np.sqrt(np.diag(cov_rob)),
        se_kind_for_t,
        n if method == METHOD_TSLS else n_eff,
    )


def tsls_fit(y, d, m, z, se_kind_for_t: str = SE_CLASSICAL) -> Fit:
    """Two-stage least squares with the first peer's treatment as instrument."""
    y = _as_float_vector("y", y)
    d = _as_binary_vector("d", d).astype(np.float64)
    m = _as_float_vector("m", m)
    z = _as_binary_vector("z", z).astype(np.float64)
    n = y.size
    if not (d.size == n and m.size == n and z.size == n):
        raise RankDeficientError("inputs have mismatched lengths")
    return _iv_core(y, d, m, z, None, METHOD_TSLS, se_kind_for_t)


def wls_fit(y, d, m, z, a1, se_kind_for_t: str = SE_CLASSICAL) -> Fit:
    """Complier-weighted fit: IV with the first-peer link as 0/1 weight.

    Numerically identical to 2SLS on the linked subsample, computed here
    in the diagonal-weight form over the full arrays.
    """
    y = _as_float_vector("y", y)
    d = _as_binary_vector("d", d).astype(np.float64)
    m = _as_float_vector("m", m)
    z = _as_binary_vector("z", z).astype(np.float64)
    a1 = _as_binary_vector("a1", a1)
    n = y.size
    if not (d.size == n and m.size == n and z.size == n and a1.size == n):
        raise RankDeficientError("inputs have mismatched lengths")
    n1 = int(a1.sum())
    if n1 < 4:
        raise InsufficientCompliersError(
            f"only {n1} units have a first-peer link; need at least 4"
        )
    return _iv_core(y, d, m, z, a1, METHOD_WLS, se_kind_for_t)


def spillover_design_variance(
    fit: Fit, y, d, m, z, delta_m, a1=None, p1j: float | None = None
) -> float:
    """Asymptotic variance of the spillover coefficient from design components.

    Plugs arm-conditional residual second moments and the mean
    counterfactual exposure shift ``delta_m = M(r at z=1) - M(r at z=0)``
    into the limit-variance formula.  Unlike the cross-moment sandwich of
    :func:`plug_in_variance`, the denominator never degenerates on a
    weak realized first stage, so intervals stay finite-width on heavy
    draws.  ``p1j`` defaults to the empirical instrument mean; pass the
    known design probability when available.  se = sqrt(V / n).
    """
    y = _as_float_vector("y", y)
    d = _as_binary_vector("d", d).astype(np.float64)
    m = _as_float_vector("m", m)
    z = _as_binary_vector("z", z).astype(np.float64)
    delta_m = _as_float_vector("delta_m", delta_m)
    if p1j is None:
        p1j = float(z.mean())
    p0j = 1.0 - p1j
    resid = y - fit.beta0 - fit.beta_d * d - fit.beta_s * m
    dm_mean = float(delta_m.mean())
    if abs(dm_mean) < WEAK_FIRST_STAGE_TOL:
        raise WeakFirstStageError("mean exposure shift is zero")
    if fit.method == METHOD_WLS:
        if a1 is None:
            raise InsufficientCompliersError("WLS design variance needs a1")
        keep = _as_binary_vector("a1", a1) == 1
        resid, z_arm = resid[keep], z[keep]
        scale = float(keep.mean())
    else:
        z_arm = z
        scale = 1.0
    sq1 = float((resid[z_arm == 1] ** 2).mean())
    sq0 = float((resid[z_arm == 0] ** 2).mean())
    return (p0j * sq1 + p1j * sq0) * scale / (dm_mean**2 * p1j * p0j)


def plug_in_variance(fit: Fit, y, d, m, z, a1=None) -> tuple[float, float, float]:
    """Estimated asymptotic variances V such that se_robust = sqrt(V / n).

    ``n`` is the full sample size for both 2SLS and WLS (the WLS limit
    is already scaled by the compliance probability, so the complier
    sums are divided by the full n).
    """
    y = _as_float_vector("y", y)
    d = _as_binary_vector("d", d).astype(np.float64)
    m = _as_float_vector("m", m)
    z = _as_binary_vector("z", z).astype(np.float64)
    n_total = y.size
    if fit.method == METHOD_WLS:
        if a1 is None:
            raise InsufficientCompliersError("WLS plug-in needs the a1 vector")
        keep = _as_binary_vector("a1", a1) == 1
        y, d, m, z = y[keep], d[keep], m[keep], z[keep]
    n = y.size
    X = np.column_stack([np.ones(n), d, m])
    Z = np.column_stack([np.ones(n), d, z])
    resid = y - X @ np.array([fit.beta0, fit.beta_d, fit.beta_s])
    cov = _robust_cov_iv(Z, X, resid)
    return tuple(float(v) * n_total for v in np.diag(cov))
