import math

import numpy as np
import pytest

from evlab.config import D1, GROUND, from_blocks
from evlab.experiments import (
    EXPLORATORY,
    GROWTH_CSV_HEADER,
    TAU_CSV_HEADER,
    AbsorbingStartError,
    EstimationError,
    ExperimentSpec,
    geometric_grid,
    growth_experiment,
    growth_exponent,
    map_replicas,
    rectangle_configuration,
    recurrence_probe,
    relaxation_time_sample,
    replica_rng,
    resolve_threads,
    run_replicas,
    sigma_xy_sample,
    simulate_path,
    size_bound_probe,
    tail_index_estimate,
)
from evlab.kernel import Params
from evlab.lyapunov import g_rect


class TestPlumbing:
    def test_replica_streams_are_reproducible_and_distinct(self):
        a = replica_rng(5, 0).random(4)
        assert np.array_equal(a, replica_rng(5, 0).random(4))
        assert not np.array_equal(a, replica_rng(5, 1).random(4))

    def test_threads(self, monkeypatch):
        monkeypatch.setenv("EVLAB_THREADS", "3")
        assert resolve_threads() == 3
        assert resolve_threads(2) == 2
        with pytest.raises(ValueError):
            resolve_threads(0)

    def test_map_replicas_order(self):
        assert map_replicas(lambda i: i * i, 6, threads=3) == [0, 1, 4, 9, 16, 25]

    def test_geometric_grid(self):
        g = geometric_grid(1000)
        assert g[0] == 1 and g[-1] == 1000
        assert np.all(np.diff(g) > 0)
        assert geometric_grid(0).tolist() == [0]


class TestHittingTimes:
    def test_absorbing_start(self):
        with pytest.raises(AbsorbingStartError):
            relaxation_time_sample(GROUND, Params(1.0, 0.2), 100, replica_rng(0, 0))
        with pytest.raises(AbsorbingStartError):
            relaxation_time_sample(GROUND, Params(0.5, 1.0), 100, replica_rng(0, 0))

    def test_cap(self):
        with pytest.raises(ValueError):
            relaxation_time_sample(D1, Params(1.0, 0.0), 0, replica_rng(0, 0))
        s = relaxation_time_sample(from_blocks((30, 30)), Params(0.0, 0.2), 5, replica_rng(0, 0))
        assert s.censored and s.tau is None

    def test_continuous_clock(self):
        s = relaxation_time_sample(D1, Params(0.0, 0.7), 10**5, replica_rng(1, 0), continuous=True)
        assert not s.censored and s.tau >= 1 and s.tau_c > 0

    def test_rectangle(self):
        S = rectangle_configuration(3, 4)
        assert g_rect(S)[1:] == (3, 4, 12)
        s = sigma_xy_sample(2, 2, Params(0.0, 0.8), 10**5, replica_rng(2, 0))
        assert not s.censored


class TestTailEstimate:
    def test_pareto(self):
        rng = np.random.default_rng(0)
        x = np.floor(rng.pareto(1.5, 50_000) + 1) * 10
        est = tail_index_estimate(x)
        assert abs(est.exponent - 1.5) < 0.15
        assert not est.light_tail

    def test_geometric_flagged_light(self):
        rng = np.random.default_rng(1)
        est = tail_index_estimate(rng.geometric(0.01, 50_000))
        assert est.light_tail

    def test_censoring(self):
        rng = np.random.default_rng(2)
        x = np.floor(rng.pareto(1.0, 20_000) + 1)
        cens = x > 1e4
        x[cens] = -1
        est = tail_index_estimate(x)
        assert est.censored_fraction == pytest.approx(cens.mean())
        assert abs(est.exponent - 1.0) < 0.15

    def test_hill(self):
        rng = np.random.default_rng(3)
        est = tail_index_estimate(rng.pareto(2.0, 20_000) + 1, method="hill")
        assert abs(est.exponent - 2.0) < 0.3

    def test_too_few(self):
        with pytest.raises(EstimationError):
            tail_index_estimate(np.arange(1, 50))
        with pytest.raises(ValueError):
            tail_index_estimate(np.arange(1, 500), method="moments")


class TestGrowth:
    def test_exponent_of_power_law(self):
        t = geometric_grid(10**6).astype(float)
        fit = growth_exponent((t, 3 * t ** 0.4))
        assert fit.slope == pytest.approx(0.4, abs=1e-9)
        lo, hi = fit.band()
        assert lo <= fit.slope <= hi

    def test_constant_series(self):
        t = geometric_grid(10**4).astype(float)
        assert growth_exponent((t, np.full_like(t, 5.0))).degenerate

    def test_short_series(self):
        t = np.array([5000.0, 10000.0])
        with pytest.raises(EstimationError):
            growth_exponent((t, t))

    def test_horizon_floor(self):
        with pytest.raises(ValueError):
            growth_experiment(GROUND, Params(0.0, 0.5), 999, replica_rng(0, 0))

    def test_record(self):
        rec = growth_experiment(GROUND, Params(0.0, 0.3), 20_000, replica_rng(0, 0))
        assert rec.times[0] == 0 and rec.times[-1] == 20_000
        assert np.all(np.diff(rec["max_size"]) >= 0)
        assert rec.f1_violations == 0
        assert rec["f1"][-1] <= 20_000


class TestOrchestration:
    def test_spec_json_round_trip(self):
        spec = ExperimentSpec("4/7", "0.3", from_blocks((2, 1)), 5000, 700, 3, 9, "growth")
        back = ExperimentSpec.from_json(spec.to_json())
        assert back == ExperimentSpec(back.beta, back.p, from_blocks((2, 1)), 5000, 700, 3, 9, "growth")
        assert back.params == spec.params

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            ExperimentSpec(0.5, 0.5, mode="other")
        with pytest.raises(ValueError):
            ExperimentSpec(0.5, 0.5, replicas=0)

    def test_tau_mode_is_deterministic(self):
        spec = ExperimentSpec(0.0, 0.7, D1, cap=10**4, replicas=20, seed=3)
        a = run_replicas(spec, threads=1)
        b = run_replicas(spec, threads=4)
        assert np.array_equal(a.tau_array(), b.tau_array())
        lines = a.to_csv().splitlines()
        assert lines[0] == ",".join(TAU_CSV_HEADER) and len(lines) == 21
        assert a.censored_fraction == 0

    def test_growth_mode_csv(self):
        spec = ExperimentSpec(0.0, 0.5, GROUND, horizon=2000, replicas=2, seed=1, mode="growth")
        res = run_replicas(spec)
        lines = res.to_csv().splitlines()
        assert lines[0] == ",".join(GROWTH_CSV_HEADER)
        assert len(lines) == 1 + sum(len(r.times) for r in res.records)

    def test_absorbing_spec(self):
        with pytest.raises(AbsorbingStartError):
            run_replicas(ExperimentSpec(1.0, 0.0, GROUND, replicas=1))

    def test_simulate_path(self):
        rows = simulate_path(D1, Params(0.2, 0.5), 500, replica_rng(0, 0))
        assert rows[0][:2] == (0, 2) and rows[-1][0] == 500
        again = simulate_path(D1, Params(0.2, 0.5), 500, replica_rng(0, 0))
        assert rows == again


class TestProbes:
    def test_size_bound_probe(self):
        res = size_bound_probe(Params(0.0, 0.5), GROUND, 1000, replicas=200, seed=1)
        assert res.passed and not res.vacuous
        assert res.size_limit == pytest.approx(2 * math.sqrt(10 * 1000))

    def test_size_bound_needs_p_half(self):
        with pytest.raises(ValueError):
            size_bound_probe(Params(0.0, 0.3), GROUND, 100)

    def test_vacuous(self):
        res = size_bound_probe(Params(0.0, 0.5), from_blocks((20, 20)), 10, replicas=10)
        assert res.vacuous and res.passed

    def test_exploratory_label(self):
        rep = recurrence_probe(caps=(100, 1000), replicas=50)
        assert rep.label == EXPLORATORY
        assert rep.lines()[0].startswith("[EXPLORATORY]")
        vals = list(rep.values.values())
        assert vals == sorted(vals)
