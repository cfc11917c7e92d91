"""Estimator micro-oracles: independent computational routes must agree."""

import numpy as np
import pytest

from spillnet import (
    InsufficientCompliersError,
    RankDeficientError,
    WeakFirstStageError,
    gen_pair_homogeneous,
    ols_fit,
    plug_in_variance,
    spillover_design_variance,
    tsls_fit,
    wls_fit,
)


def _make_design(rng, n=40):
    d = rng.integers(0, 2, n)
    z = rng.integers(0, 2, n)
    a1 = rng.integers(0, 2, n)
    m = a1 * z + rng.integers(0, 3, n).astype(float)
    y = rng.normal(size=n) + 0.5 * d + 1.2 * m
    while d.sum() in (0, n) or z.sum() in (0, n) or a1.sum() < 6:
        return _make_design(rng, n)
    return y, d, m, z, a1


def _det3(a):
    return (
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def _cramer_ols(y, d, m):
    """Hand-rolled Cramer's rule on the 3x3 normal equations."""
    X = np.column_stack([np.ones(len(y)), d, m]).astype(float)
    A = X.T @ X
    b = X.T @ y
    det = _det3(A)
    coefs = []
    for j in range(3):
        Aj = A.copy()
        Aj[:, j] = b
        coefs.append(_det3(Aj) / det)
    return np.array(coefs)


def _loop_tsls_beta_s(y, d, m, z):
    """Pure-loop instrument-residual ratio."""
    n = len(y)
    z1 = [z[i] for i in range(n) if d[i] == 1]
    z0 = [z[i] for i in range(n) if d[i] == 0]
    mean1 = sum(z1) / len(z1)
    mean0 = sum(z0) / len(z0)
    num = 0.0
    den = 0.0
    for i in range(n):
        zt = z[i] - (mean1 if d[i] == 1 else mean0)
        num += zt * y[i]
        den += zt * m[i]
    return num / den


def _projected_ls_tsls(y, d, m, z):
    """Two explicit least-squares stages via lstsq (independent route)."""
    n = len(y)
    Z = np.column_stack([np.ones(n), d, z]).astype(float)
    gamma, *_ = np.linalg.lstsq(Z, m, rcond=None)
    m_hat = Z @ gamma
    Xhat = np.column_stack([np.ones(n), d, m_hat])
    coefs, *_ = np.linalg.lstsq(Xhat, y, rcond=None)
    return coefs


class TestOlsFit:
    def test_noiseless_recovery(self):
        rng = np.random.default_rng(0)
        d = rng.integers(0, 2, 30)
        m = rng.normal(size=30)
        y = 2.0 + 3.0 * d + 5.0 * m
        fit = ols_fit(y, d, m)
        assert np.allclose(fit.coefficients, (2.0, 3.0, 5.0), atol=1e-10)

    def test_cramer_oracle_six_points(self):
        y = np.array([1.0, 4.0, 2.5, -1.0, 0.5, 3.0])
        d = np.array([0, 1, 1, 0, 0, 1])
        m = np.array([0.0, 2.0, 1.0, 1.0, 3.0, 0.0])
        fit = ols_fit(y, d, m)
        assert np.allclose(fit.coefficients, _cramer_ols(y, d, m), atol=1e-12)

    def test_cramer_oracle_random_designs(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            y, d, m, _, _ = _make_design(rng)
            fit = ols_fit(y, d, m)
            assert np.allclose(fit.coefficients, _cramer_ols(y, d, m), atol=1e-12)

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(2)
        y, d, m, _, _ = _make_design(rng, n=200)
        fit = ols_fit(y, d, m)
        resid = y - fit.beta0 - fit.beta_d * d - fit.beta_s * m
        scale = np.linalg.norm(resid)
        for x in (np.ones_like(y), d, m):
            assert abs(x @ resid) <= 1e-9 * max(scale * np.linalg.norm(x), 1.0)

    def test_rank_deficient_constant_m(self):
        with pytest.raises(RankDeficientError):
            ols_fit(np.arange(6.0), np.array([0, 1, 0, 1, 0, 1]), np.ones(6))

    def test_rank_deficient_collinear(self):
        d = np.array([0, 1, 0, 1, 0, 1])
        with pytest.raises(RankDeficientError):
            ols_fit(np.arange(6.0), d, 2.0 * d)


class TestTslsFit:
    def test_perfect_compliance_equals_ols(self):
        rng = np.random.default_rng(3)
        n = 100
        d = rng.integers(0, 2, n)
        z = rng.integers(0, 2, n)
        y = rng.normal(size=n) + 0.7 * z
        ts = tsls_fit(y, d, z.astype(float), z)
        ol = ols_fit(y, d, z.astype(float))
        assert np.allclose(ts.coefficients, ol.coefficients, atol=1e-12)
        assert np.allclose(ts.se_classical, ol.se_classical, atol=1e-12)

    def test_loop_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            y, d, m, z, _ = _make_design(rng)
            fit = tsls_fit(y, d, m, z)
            assert abs(fit.beta_s - _loop_tsls_beta_s(y, d, m, z)) <= 1e-12

    def test_ratio_equals_projected_ls(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            y, d, m, z, _ = _make_design(rng)
            fit = tsls_fit(y, d, m, z)
            other = _projected_ls_tsls(y, d, m, z)
            scale = max(1.0, np.max(np.abs(other)))
            assert np.max(np.abs(np.array(fit.coefficients) - other)) <= 1e-10 * scale

    def test_instrument_orthogonality(self):
        rng = np.random.default_rng(6)
        y, d, m, z, _ = _make_design(rng, n=300)
        fit = tsls_fit(y, d, m, z)
        resid = y - fit.beta0 - fit.beta_d * d - fit.beta_s * m
        scale = np.linalg.norm(resid)
        for x in (np.ones_like(y), d, z):
            assert abs(x @ resid) <= 1e-9 * max(scale * np.linalg.norm(x), 1.0)

    def test_weak_first_stage(self):
        rng = np.random.default_rng(7)
        n = 60
        d = rng.integers(0, 2, n)
        z = rng.integers(0, 2, n)
        # Build m orthogonal to the residualized instrument.
        v = rng.normal(size=n)
        zt = z - np.where(d == 1, z[d == 1].mean(), z[d == 0].mean())
        m = v - (v @ zt) / (zt @ zt) * zt
        with pytest.raises(WeakFirstStageError):
            tsls_fit(rng.normal(size=n), d, m, z)

    def test_affine_equivariance(self):
        rng = np.random.default_rng(8)
        y, d, m, z, a1 = _make_design(rng, n=120)
        alpha, gamma = 2.5, -3.0
        for fit_fn in (
            lambda yy: ols_fit(yy, d, m),
            lambda yy: tsls_fit(yy, d, m, z),
            lambda yy: wls_fit(yy, d, m, z, a1),
        ):
            base = np.array(fit_fn(y).coefficients)
            shifted = np.array(fit_fn(alpha * y + gamma).coefficients)
            expected = alpha * base + np.array([gamma, 0.0, 0.0])
            assert np.allclose(shifted, expected, atol=1e-9)


class TestWlsFit:
    def test_equals_subsample_tsls(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            y, d, m, z, a1 = _make_design(rng, n=80)
            keep = a1 == 1
            if d[keep].sum() in (0, keep.sum()) or z[keep].sum() in (0, keep.sum()):
                continue
            full = wls_fit(y, d, m, z, a1)
            sub = tsls_fit(y[keep], d[keep], m[keep], z[keep])
            assert np.allclose(full.coefficients, sub.coefficients, atol=1e-12)
            assert np.allclose(full.se_classical, sub.se_classical, atol=1e-12)
            assert np.allclose(full.se_robust, sub.se_robust, atol=1e-12)
            assert full.n_used == sub.n_used == int(keep.sum())

    def test_all_linked_equals_tsls(self):
        rng = np.random.default_rng(10)
        y, d, m, z, _ = _make_design(rng, n=60)
        full = wls_fit(y, d, m, z, np.ones_like(d))
        ts = tsls_fit(y, d, m, z)
        assert full.coefficients == ts.coefficients

    def test_insufficient_compliers(self):
        rng = np.random.default_rng(12)
        y, d, m, z, _ = _make_design(rng, n=40)
        a1 = np.zeros_like(d)
        a1[:3] = 1
        with pytest.raises(InsufficientCompliersError):
            wls_fit(y, d, m, z, a1)

    def test_homogeneous_model_recovery(self):
        ds = gen_pair_homogeneous(n=4000, p_link=0.5, seed=21)
        s = ds.s
        fit = wls_fit(ds.y, ds.d, s, ds.d_j, ds.a, se_kind_for_t="robust")
        assert abs(fit.beta_s - 1.5) <= 3.0 * fit.se_robust[2]


class TestVariances:
    def test_plug_in_matches_fit(self):
        rng = np.random.default_rng(13)
        y, d, m, z, a1 = _make_design(rng, n=150)
        ts = tsls_fit(y, d, m, z)
        V = plug_in_variance(ts, y, d, m, z)
        assert np.allclose(np.sqrt(np.array(V) / len(y)), ts.se_robust, rtol=1e-12)
        wl = wls_fit(y, d, m, z, a1)
        Vw = plug_in_variance(wl, y, d, m, z, a1)
        assert np.allclose(np.sqrt(np.array(Vw) / len(y)), wl.se_robust, rtol=1e-10)

    def test_all_linked_wls_se_equals_tsls_se(self):
        ds = gen_pair_homogeneous(n=1000, p_link=0.5, seed=5)
        # force every unit linked: then the two fits are the same estimator
        a1 = np.ones(ds.n, dtype=int)
        s = (a1 * ds.d_j).astype(float)
        ts = tsls_fit(ds.y, ds.d, s, ds.d_j)
        wl = wls_fit(ds.y, ds.d, s, ds.d_j, a1)
        assert np.allclose(ts.se_robust, wl.se_robust, atol=1e-12)
        assert np.allclose(ts.se_classical, wl.se_classical, atol=1e-12)

    def test_design_variance_consistent_with_sandwich(self):
        # Both are sample analogs of the same limit; they agree at large n.
        ds = gen_pair_homogeneous(n=200000, p_link=0.6, seed=3)
        s = ds.s
        ts = tsls_fit(ds.y, ds.d, s, ds.d_j, se_kind_for_t="robust")
        vd = spillover_design_variance(
            ts, ds.y, ds.d, s, ds.d_j, ds.a.astype(float), p1j=0.5
        )
        se_component = np.sqrt(vd / ds.n)
        assert abs(se_component / ts.se_robust[2] - 1.0) < 0.02

    def test_t_values_follow_declared_kind(self):
        rng = np.random.default_rng(14)
        y, d, m, z, _ = _make_design(rng, n=90)
        cl = tsls_fit(y, d, m, z, se_kind_for_t="classical")
        rb = tsls_fit(y, d, m, z, se_kind_for_t="robust")
        assert cl.t_values[2] == cl.beta_s / cl.se_classical[2]
        assert rb.t_values[2] == rb.beta_s / rb.se_robust[2]
