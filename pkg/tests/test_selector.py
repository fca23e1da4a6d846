import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from causal_atlas.diagnostics import DatasetProfile
from causal_atlas.errors import UnknownAlgorithm
from causal_atlas.selection import (
    REGISTRY,
    RATING_ORDER,
    active_conditions,
    advisor_rerank,
    configure_hyperparameters,
    filter_algorithms,
    predicted_runtime,
    rank_algorithms,
    select_algorithm,
    trace_from_dict,
)


def profile(**kwargs):
    base = dict(
        n_samples=1000,
        n_vars=10,
        data_kind="tabular",
        discrete_ratio=0.0,
        missing_rate=0.0,
        linearity="linear",
        gaussian_noise="gaussian",
        heterogeneous=False,
    )
    base.update(kwargs)
    return DatasetProfile(**base)


class TestRegistry:
    def test_every_algorithm_appears_exactly_once(self):
        from causal_atlas.discovery import ALGORITHM_IDS

        assert sorted(REGISTRY) == sorted(ALGORITHM_IDS)

    def test_rating_order_is_total(self):
        assert RATING_ORDER["Robust"] > RATING_ORDER["Strong"] > RATING_ORDER["Moderate"]
        assert RATING_ORDER["Moderate"] > RATING_ORDER["Limited"] > RATING_ORDER["Poor"]

    def test_rating_cells_carry_citations(self):
        for entry in REGISTRY.values():
            for rating in entry.ratings.values():
                assert rating.citation


class TestFilter:
    def test_time_series_profile_excludes_tabular(self):
        cands, excluded, _ = filter_algorithms(profile(data_kind="time_series", stationary=True))
        assert all(REGISTRY[c].data_kind == "time_series" for c in cands)
        excluded_ids = {i for i, _ in excluded}
        assert "pc" in excluded_ids and "notears_linear" in excluded_ids

    def test_discrete_mix_excludes_continuous_only(self):
        cands, excluded, _ = filter_algorithms(profile(discrete_ratio=0.4))
        excluded_ids = {i for i, _ in excluded}
        assert "notears_linear" in excluded_ids
        assert "direct_lingam" in excluded_ids
        assert "pc" in cands

    def test_budget_filter_with_fallback_never_empty(self):
        prof = profile(n_vars=400, runtime_budget_seconds=60)
        cands, excluded, warnings = filter_algorithms(prof)
        assert cands  # never empty
        assert warnings  # least-violating fallback fired

    def test_runtime_model_is_superlinear_in_p(self):
        entry = REGISTRY["pc"]
        small = predicted_runtime(entry, profile(n_vars=10))
        large = predicted_runtime(entry, profile(n_vars=40))
        assert large > 10 * small


class TestRank:
    def test_linear_gaussian_top_choice(self):
        prof = profile()
        cands, _, _ = filter_algorithms(prof)
        ranked = rank_algorithms(cands, prof)
        assert ranked[0][0] in ("notears_linear", "score_search")

    def test_linear_non_gaussian_prefers_direct_lingam(self):
        prof = profile(gaussian_noise="non_gaussian", n_samples=5000)
        cands, _, _ = filter_algorithms(prof)
        ranked = rank_algorithms(cands, prof)
        assert ranked[0][0] == "direct_lingam"

    def test_ts_gaussian_prefers_dynotears(self):
        prof = profile(data_kind="time_series", stationary=True, suggested_lag=3)
        cands, _, _ = filter_algorithms(prof)
        ranked = rank_algorithms(cands, prof)
        assert ranked[0][0] == "dynotears"

    def test_ts_non_gaussian_prefers_var_lingam(self):
        prof = profile(
            data_kind="time_series", stationary=True, suggested_lag=3,
            gaussian_noise="non_gaussian",
        )
        cands, _, _ = filter_algorithms(prof)
        ranked = rank_algorithms(cands, prof)
        assert ranked[0][0] == "var_lingam"

    def test_rating_dominance_respected_on_theoretical_score(self):
        # for every profile, a candidate whose active ratings strictly
        # dominate another's never scores lower theoretically
        profiles = [
            profile(),
            profile(linearity="nonlinear"),
            profile(gaussian_noise="non_gaussian"),
            profile(missing_rate=0.3),
            profile(discrete_ratio=0.2),
        ]
        for prof in profiles:
            conditions = active_conditions(prof)
            cands, _, _ = filter_algorithms(prof)
            ranked = rank_algorithms(cands, prof)
            theo = {cid: t for cid, t, _ in ranked}
            for a in cands:
                for b in cands:
                    if a == b:
                        continue
                    ra = [REGISTRY[a].rating_ordinal(c) for c in conditions]
                    rb = [REGISTRY[b].rating_ordinal(c) for c in conditions]
                    if all(x >= y for x, y in zip(ra, rb)) and any(
                        x > y for x, y in zip(ra, rb)
                    ):
                        assert theo[a] >= theo[b]

    def test_deterministic(self):
        prof = profile()
        cands, _, _ = filter_algorithms(prof)
        assert rank_algorithms(cands, prof) == rank_algorithms(cands, prof)


class TestConfigure:
    def test_large_sample_tightens_alpha(self):
        cfg, rationale = configure_hyperparameters("pc", profile(n_samples=10_000))
        assert cfg["alpha"] == 0.01
        assert any("alpha" in line for line in rationale)

    def test_nonlinear_switches_to_rank_test(self):
        cfg, _ = configure_hyperparameters("pc", profile(linearity="nonlinear"))
        assert cfg["test"] == "rank_fisher_z"

    def test_all_discrete_switches_to_chi_squared(self):
        cfg, _ = configure_hyperparameters("pc", profile(discrete_ratio=1.0))
        assert cfg["test"] == "chi_squared"

    def test_suggested_lag_passthrough(self):
        prof = profile(data_kind="time_series", stationary=True, suggested_lag=3)
        cfg, _ = configure_hyperparameters("dynotears", prof)
        assert cfg["lag"] == 3

    def test_lag_clamped_to_twenty(self):
        prof = profile(data_kind="time_series", stationary=True, suggested_lag=99)
        cfg, _ = configure_hyperparameters("var_lingam", prof)
        assert cfg["lag"] == 20

    def test_dense_hint_halves_notears_lambda(self):
        cfg, _ = configure_hyperparameters(
            "notears_linear", profile(), hints={"expected_density": "dense"}
        )
        assert cfg["lambda1"] == 0.05

    def test_unknown_algorithm_rejected(self):
        with pytest.raises(UnknownAlgorithm):
            configure_hyperparameters("nope", profile())


class _AdvisorHandler(BaseHTTPRequestHandler):
    response_body = {}

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        type(self).last_request = json.loads(self.rfile.read(length).decode())
        body = json.dumps(type(self).response_body).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, fmt, *args):
        pass


@pytest.fixture
def advisor_server():
    server = HTTPServer(("127.0.0.1", 0), _AdvisorHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}/advise", _AdvisorHandler
    server.shutdown()


class TestAdvisor:
    def test_no_endpoint_is_identity(self):
        trace = select_algorithm(profile())
        assert advisor_rerank(trace, profile()) == trace

    def test_valid_runner_up_swap(self, advisor_server):
        endpoint, handler = advisor_server
        trace = select_algorithm(profile())
        runner_up = trace.ranked[1][0]
        handler.response_body = {"chosen": runner_up, "rationale": "domain prior"}
        out = advisor_rerank(trace, profile(), endpoint)
        assert out.chosen == runner_up
        assert any("advisor override" in line for line in out.rationale)
        # wire contract: request carries profile, candidates, trace
        assert set(handler.last_request) >= {"profile", "candidates", "trace"}

    def test_filtered_out_proposal_rejected(self, advisor_server):
        endpoint, handler = advisor_server
        trace = select_algorithm(profile(discrete_ratio=0.4))
        handler.response_body = {"chosen": "notears_linear", "rationale": "nope"}
        out = advisor_rerank(trace, profile(discrete_ratio=0.4), endpoint)
        assert out.chosen == trace.chosen

    def test_unreachable_endpoint_is_identity(self):
        trace = select_algorithm(profile())
        out = advisor_rerank(trace, profile(), "http://127.0.0.1:1/advise")
        assert out.chosen == trace.chosen


class TestTrace:
    def test_chosen_in_ranked_not_in_filtered(self):
        trace = select_algorithm(profile(discrete_ratio=0.2))
        ranked_ids = {cid for cid, _, _ in trace.ranked}
        filtered_ids = {cid for cid, _ in trace.filtered_out}
        assert trace.chosen in ranked_ids
        assert trace.chosen not in filtered_ids

    def test_round_trips_as_json(self):
        trace = select_algorithm(profile())
        back = trace_from_dict(json.loads(trace.to_json()))
        assert back == trace

    def test_selection_is_pure(self):
        assert select_algorithm(profile()) == select_algorithm(profile())
