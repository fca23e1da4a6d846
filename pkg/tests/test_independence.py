import numpy as np
import pytest
from scipy import stats as sps

from causal_atlas.dataset import ColumnMeta, Dataset, from_matrix
from causal_atlas.errors import ConstantColumn, NonDiscreteColumn, SingularSubmatrix
from causal_atlas.independence import (
    SufficientStats,
    chi_squared_test,
    fisher_z_test,
    partial_correlation,
    rank_transform,
    sufficient_stats,
)

RNG = np.random.default_rng


def stats_from_corr(corr, n):
    return SufficientStats(np.asarray(corr, dtype=float), n)


class TestPartialCorrelation:
    def test_empty_conditioning_returns_raw_entry(self):
        corr = np.array([[1.0, 0.3], [0.3, 1.0]])
        assert abs(partial_correlation(stats_from_corr(corr, 100), 0, 1, []) - 0.3) < 1e-12

    def test_unit_chain_partials_out_exactly(self):
        # X -> Y -> Z, unit coefficients and noise variances:
        # rho_xy = 1/sqrt(2), rho_yz = 2/sqrt(6), rho_xz = 1/sqrt(3)
        rho_xy = 1 / np.sqrt(2)
        rho_yz = 2 / np.sqrt(6)
        rho_xz = 1 / np.sqrt(3)
        corr = np.array([[1, rho_xy, rho_xz], [rho_xy, 1, rho_yz], [rho_xz, rho_yz, 1]])
        r = partial_correlation(stats_from_corr(corr, 1000), 0, 2, [1])
        assert abs(r) < 1e-9

    def test_perfect_correlation_clamps(self):
        x = RNG(0).standard_normal(500)
        values = np.column_stack([x, x])
        corr = np.corrcoef(values, rowvar=False)
        r = partial_correlation(stats_from_corr(corr, 500), 0, 1, [])
        assert abs(r) <= 1 - 1e-12

    def test_singular_submatrix_raises(self):
        corr = np.ones((3, 3))
        with pytest.raises(SingularSubmatrix):
            partial_correlation(stats_from_corr(corr, 100), 0, 1, [2])


class TestFisherZ:
    def test_zero_correlation(self):
        corr = np.eye(2)
        res = fisher_z_test(stats_from_corr(corr, 100), 0, 1)
        assert res.statistic == 0.0 and res.p_value == 1.0

    def test_closed_form_case(self):
        # n=103, r=tanh(0.2): statistic sqrt(100)*0.2 = 2, p = 2(1 - Phi(2))
        r = np.tanh(0.2)
        corr = np.array([[1.0, r], [r, 1.0]])
        res = fisher_z_test(stats_from_corr(corr, 103), 0, 1)
        assert abs(res.statistic - 2.0) <= 1e-9
        assert abs(res.p_value - 2 * sps.norm.sf(2.0)) <= 1e-9
        assert abs(res.p_value - 0.04550026389635842) <= 1e-9

    def test_symmetry_in_arguments(self):
        values = RNG(1).standard_normal((400, 4))
        st = sufficient_stats(values)
        a = fisher_z_test(st, 0, 3, [1, 2])
        b = fisher_z_test(st, 3, 0, [2, 1])
        assert a.statistic == b.statistic and a.p_value == b.p_value

    def test_insufficient_samples_reports_unreliable(self):
        corr = np.eye(5)
        res = fisher_z_test(stats_from_corr(corr, 5), 0, 1, [2, 3, 4])
        assert not res.reliable and res.p_value == 1.0

    def test_type_one_calibration(self):
        rejections = {0.01: 0, 0.05: 0}
        trials = 1000
        for t in range(trials):
            values = RNG(1000 + t).standard_normal((1000, 2))
            res = fisher_z_test(sufficient_stats(values), 0, 1)
            for alpha in rejections:
                rejections[alpha] += res.p_value < alpha
        for alpha, count in rejections.items():
            assert abs(count / trials - alpha) < 0.02

    def test_affine_invariance(self):
        values = RNG(3).standard_normal((800, 3))
        scaled = values.copy()
        scaled[:, 0] = 5.0 * scaled[:, 0] + 11.0
        a = fisher_z_test(sufficient_stats(values), 0, 1, [2])
        b = fisher_z_test(sufficient_stats(scaled), 0, 1, [2])
        assert abs(a.p_value - b.p_value) < 1e-9


def discrete_dataset(columns, cardinality=None):
    arr = np.column_stack(columns).astype(float)
    meta = [
        ColumnMeta(f"X{i}", "discrete", cardinality or int(arr[:, i].max()) + 1)
        for i in range(arr.shape[1])
    ]
    return Dataset(arr, meta)


class TestChiSquared:
    def test_perfect_dependence(self):
        x = RNG(4).integers(0, 3, 2000)
        data = discrete_dataset([x, x])
        res = chi_squared_test(data, 0, 1)
        assert res.p_value < 1e-10

    def test_independent_calibration(self):
        rejections = 0
        trials = 1000
        for t in range(trials):
            rng = RNG(5000 + t)
            data = discrete_dataset([rng.integers(0, 2, 2000), rng.integers(0, 2, 2000)])
            rejections += chi_squared_test(data, 0, 1).p_value < 0.05
        assert abs(rejections / trials - 0.05) < 0.02

    def test_reliability_rule_forces_p_one(self):
        rng = RNG(6)
        # 8 strata of df 4 each -> df 32; n = 100 < 320
        data = discrete_dataset(
            [rng.integers(0, 3, 100), rng.integers(0, 3, 100), rng.integers(0, 8, 100)]
        )
        res = chi_squared_test(data, 0, 1, [2])
        assert not res.reliable and res.p_value == 1.0

    def test_conditional_independence_detected(self):
        rng = RNG(7)
        z = rng.integers(0, 2, 5000)
        x = (z + (rng.random(5000) < 0.2)) % 2
        y = (z + (rng.random(5000) < 0.2)) % 2
        data = discrete_dataset([x, y, z], cardinality=2)
        marginal = chi_squared_test(data, 0, 1)
        conditional = chi_squared_test(data, 0, 1, [2])
        assert marginal.p_value < 1e-6
        assert conditional.p_value > 0.01

    def test_rejects_continuous_column(self):
        data = from_matrix(RNG(8).standard_normal((100, 2)))
        with pytest.raises(NonDiscreteColumn):
            chi_squared_test(data, 0, 1)


class TestRankTransform:
    def test_gaussian_column_nearly_identity(self):
        values = RNG(9).standard_normal((5000, 1))
        out = rank_transform(from_matrix(values))
        corr = np.corrcoef(values[:, 0], out.values[:, 0])[0, 1]
        assert corr >= 0.99

    def test_monotone_invariance_exact(self):
        x = RNG(10).standard_normal(1000)
        a = rank_transform(from_matrix(x[:, None])).values[:, 0]
        b = rank_transform(from_matrix(np.exp(x)[:, None])).values[:, 0]
        assert np.allclose(a, b)

    def test_constant_column_rejected(self):
        with pytest.raises(ConstantColumn):
            rank_transform(from_matrix(np.ones((50, 1))))
