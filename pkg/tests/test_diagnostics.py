import numpy as np
import pytest

from causal_atlas.dataset import ColumnMeta, Dataset, from_matrix
from causal_atlas.diagnostics import (
    DatasetProfile,
    adf_statistic,
    drop_constant,
    estimate_lag,
    impute,
    infer_schema,
    jarque_bera,
    profile_dataset,
    profile_from_dict,
    check_gaussian_noise,
    check_linearity,
    check_stationarity,
)
from causal_atlas.errors import AllColumnsConstant, AllMissingColumn, SeriesTooShort
from causal_atlas.sim_tabular import TabularScenario, simulate_tabular
from causal_atlas.sim_timeseries import (
    TsScenario,
    generate_temporal_graph,
    simulate_temporal,
    stabilize,
)

RNG = np.random.default_rng


class TestInferSchema:
    def test_three_level_integer_column_is_discrete(self):
        data = from_matrix(RNG(0).integers(0, 3, (200, 1)).astype(float))
        typed = infer_schema(data)
        assert typed.column_meta[0].kind == "discrete"
        assert typed.column_meta[0].cardinality == 3

    def test_real_column_is_continuous(self):
        typed = infer_schema(from_matrix(RNG(1).standard_normal((100, 1))))
        assert typed.column_meta[0].kind == "continuous"

    def test_fifteen_levels_is_continuous(self):
        col = np.arange(15.0).repeat(10)[:, None]
        typed = infer_schema(from_matrix(col))
        assert typed.column_meta[0].kind == "continuous"


class TestImpute:
    def test_clean_data_unchanged(self):
        data = from_matrix(RNG(2).standard_normal((50, 2)))
        assert impute(data) is data

    def test_mean_imputation_arithmetic(self):
        data = from_matrix(np.array([[1.0], [np.nan], [3.0]]))
        out = impute(data)
        assert np.array_equal(out.values[:, 0], [1.0, 2.0, 3.0])

    def test_mode_imputation_smallest_label_on_ties(self):
        values = np.array([[2.0], [1.0], [np.nan], [1.0], [2.0]])
        data = Dataset(values, [ColumnMeta("X0", "discrete", 3)])
        out = impute(data)
        assert out.values[2, 0] == 1.0

    def test_drop_rows(self):
        rng = RNG(3)
        values = rng.standard_normal((2000, 3))
        mask = rng.random((2000, 3)) < 0.3
        values[mask] = np.nan
        out = impute(from_matrix(values), "drop_rows")
        assert not np.isnan(out.values).any()
        expected = (~mask.any(axis=1)).sum()
        assert out.n_samples == expected

    def test_all_missing_column_rejected(self):
        values = np.array([[np.nan], [np.nan]])
        with pytest.raises(AllMissingColumn):
            impute(from_matrix(values))


class TestDropConstant:
    def test_removes_constant_and_keeps_rows(self):
        values = np.column_stack([np.ones(30), RNG(4).standard_normal(30)])
        out, removed = drop_constant(from_matrix(values))
        assert removed == ["X0"]
        assert out.n_columns == 1 and out.n_samples == 30

    def test_no_constants_unchanged(self):
        data = from_matrix(RNG(5).standard_normal((30, 2)))
        out, removed = drop_constant(data)
        assert out is data and removed == []

    def test_all_constant_rejected(self):
        with pytest.raises(AllColumnsConstant):
            drop_constant(from_matrix(np.ones((30, 2))))


class TestLinearity:
    def test_linear_relation(self):
        rng = RNG(6)
        x = rng.standard_normal(2000)
        y = 2 * x + 0.5 * rng.standard_normal(2000)
        assert check_linearity(from_matrix(np.column_stack([x, y]))) == "linear"

    def test_sine_relation_nonlinear(self):
        rng = RNG(7)
        x = rng.uniform(-2, 2, 2000)
        y = np.sin(3 * x) + 0.1 * rng.standard_normal(2000)
        assert check_linearity(from_matrix(np.column_stack([x, y]))) == "nonlinear"

    def test_pure_noise_defaults_linear(self):
        data = from_matrix(RNG(8).standard_normal((2000, 3)))
        assert check_linearity(data) == "linear"

    def test_single_column_unknown(self):
        assert check_linearity(from_matrix(RNG(9).standard_normal((100, 1)))) == "unknown"


class TestGaussianNoise:
    def test_jarque_bera_reference_point(self):
        # S=0 and K=3 exactly: kurtosis of {0 (x4), +-1} is N/(2m) = 3
        x = np.array([-1.0, 0.0, 0.0, 0.0, 0.0, 1.0] * 50)
        jb, p = jarque_bera(x)
        assert abs(jb) < 1e-12 and abs(p - 1.0) < 1e-12

    def test_exponential_sem_flagged(self):
        dag, data = simulate_tabular(
            TabularScenario(noise="exponential", n_samples=2000, seed=1)
        )
        assert check_gaussian_noise(data) == "non_gaussian"

    def test_gaussian_sem_mostly_clean(self):
        hits = 0
        for seed in range(10):
            dag, data = simulate_tabular(TabularScenario(n_samples=2000, seed=seed))
            hits += check_gaussian_noise(data) == "gaussian"
        assert hits >= 9


class TestStationarity:
    def test_random_walk_flagged(self):
        hits = 0
        for seed in range(10):
            walk = RNG(100 + seed).standard_normal(2000).cumsum()
            hits += not check_stationarity(walk[:, None])[0]
        assert hits >= 9

    def test_white_noise_stationary(self):
        hits = 0
        for seed in range(10):
            x = RNG(200 + seed).standard_normal(2000)
            hits += check_stationarity(x[:, None])[0]
        assert hits >= 9

    def test_constant_series_convention(self):
        assert check_stationarity(np.ones((100, 1)))[0] is True

    def test_too_short_rejected(self):
        with pytest.raises(SeriesTooShort):
            check_stationarity(np.arange(5.0)[:, None])


class TestEstimateLag:
    def _var_series(self, lag, seed, t=3000):
        s = TsScenario(
            n_nodes=3, max_lag=lag, intra_degree=0.0, inter_degree=2.0,
            weight_range_inter=(0.4, 0.6), decay_exponent=0.0, n_steps=t, seed=seed,
        )
        tg = stabilize(generate_temporal_graph(s))
        return simulate_temporal(tg, s)

    def test_var1_recovered(self):
        hits = 0
        for seed in range(10):
            series = self._var_series(1, seed)
            hits += estimate_lag(series, 4) == 1
        assert hits >= 9

    def test_var3_recovered(self):
        hits = 0
        for seed in range(10):
            series = self._var_series(3, 50 + seed)
            hits += estimate_lag(series, 5) == 3
        assert hits >= 8

    def test_single_candidate(self):
        series = self._var_series(1, 3)
        assert estimate_lag(series, 1) == 1


class TestProfileDataset:
    def test_hint_overrides_test_verdict(self):
        rng = RNG(10)
        x = rng.standard_normal(1500)
        y = 2 * x + rng.standard_normal(1500)
        profile = profile_dataset(
            from_matrix(np.column_stack([x, y])), hints={"linearity": "nonlinear"}
        )
        assert profile.linearity == "nonlinear"
        assert any("overrides linearity" in n for n in profile.notes)

    def test_clean_linear_gaussian_profile(self):
        agree = 0
        for seed in range(10):
            dag, data = simulate_tabular(TabularScenario(seed=seed))
            p = profile_dataset(data)
            agree += (
                p.linearity == "linear"
                and p.gaussian_noise == "gaussian"
                and not p.heterogeneous
            )
        assert agree >= 8

    def test_time_series_routing(self):
        s = TsScenario(n_nodes=3, n_steps=1500, seed=4)
        tg = stabilize(generate_temporal_graph(s))
        series = simulate_temporal(tg, s)
        p = profile_dataset(series)
        assert p.data_kind == "time_series"
        assert p.stationary is not None and p.suggested_lag is not None
        assert p.heterogeneous is None

    def test_heterogeneous_domains_detected(self):
        # two domains with very different noise spread in half the columns
        rng = RNG(11)
        n = 2000
        base = rng.standard_normal((n, 4))
        domain = (np.arange(n) >= n // 2).astype(int)
        base[domain == 1, :2] *= 4.0
        data = Dataset(
            base,
            [ColumnMeta(f"X{i}", "continuous") for i in range(4)],
            domain_index=domain,
        )
        assert profile_dataset(data).heterogeneous is True

    def test_profile_round_trips_as_json(self):
        dag, data = simulate_tabular(TabularScenario(seed=12))
        p = profile_dataset(data)
        import json

        back = profile_from_dict(json.loads(p.to_json()))
        assert back == p

    def test_deterministic(self):
        dag, data = simulate_tabular(TabularScenario(missing_rate=0.1, seed=13))
        assert profile_dataset(data) == profile_dataset(data)
