from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import STAIRS, configurations
from oracles import successor_law, words_up_to

from evlab.config import D1, GROUND, from_blocks, from_string
from evlab.kernel import (
    Params,
    TransitionLaw,
    communicating_class_check,
    communication_check,
    continuous_time_step,
    exact_number,
    is_absorbing,
    parse_number,
    sample_path,
    sample_steps,
    step_distribution,
)

GRID = [Params(Fraction(b), Fraction(p)) for b in (0, Fraction(1, 3), 1) for p in (0, Fraction(2, 5), 1)]


class TestParams:
    def test_parse(self):
        prm = Params.parse("4/7", "0")
        assert prm.beta == Fraction(4, 7) and prm.p == 0 and prm.exact
        assert not Params.parse("0.6", "0.5").exact

    @pytest.mark.parametrize("beta, p", [(-0.1, 0.5), (0.5, 1.5)])
    def test_out_of_range(self, beta, p):
        with pytest.raises(ValueError, match="must lie in"):
            Params(beta, p)

    def test_numbers(self):
        assert parse_number("3/4") == Fraction(3, 4)
        assert parse_number("0.25") == 0.25
        assert exact_number("0.3") == Fraction(3, 10)

    def test_dict(self):
        assert Params.parse("1/2", "0.3").to_dict() == {"beta": "1/2", "p": "0.3"}


class TestStepDistribution:
    def test_matches_site_level_enumeration(self):
        for w in words_up_to(9):
            S = from_string(w)
            for prm in GRID:
                law = {s.word: q for s, q in step_distribution(S, prm)}
                ref = {k: v for k, v in successor_law(w, prm.beta, prm.p).items() if v}
                assert law == ref, (w, prm)

    def test_ground_under_pure_exclusion(self):
        law = step_distribution(GROUND, Params(0, Fraction(1, 4))).as_dict()
        assert law == {D1: Fraction(3, 4), GROUND: Fraction(1, 4)}

    def test_unit_under_pure_voter(self):
        law = step_distribution(D1, Params(1, 0)).as_dict()
        assert law[GROUND] == Fraction(2, 3)
        assert sum(law.values()) == 1

    @given(configurations(max_blocks=4), st.fractions(0, 1, max_denominator=9),
           st.fractions(0, 1, max_denominator=9))
    def test_probabilities_sum_to_one(self, S, beta, p):
        law = step_distribution(S, Params(beta, p))
        assert law.total() == 1
        assert all(q > 0 for _, q in law)
        assert len({s for s, _ in law}) == len(law)

    def test_float_mode(self):
        law = step_distribution(STAIRS, Params(0.3, 0.6))
        assert abs(law.total() - 1) < 1e-12

    def test_json_round_trip(self):
        prm = Params(Fraction(4, 7), Fraction(1, 4))
        law = step_distribution(STAIRS, prm)
        back = TransitionLaw.from_json(law.to_json(), STAIRS, prm)
        assert back.as_dict() == law.as_dict()

    def test_pushforward(self):
        law = step_distribution(D1, Params(0, 0))
        assert law.pushforward(lambda s: s.size) == {3: Fraction(2, 3), 2: Fraction(1, 3)}


class TestSampling:
    def test_one_step_frequencies(self):
        prm = Params(Fraction(1, 3), Fraction(1, 4))
        S = from_blocks((2, 1, 1, 2))
        law = step_distribution(S, prm).as_dict()
        n = 40_000
        draws = sample_steps(S, prm, np.random.default_rng(1), n)
        for s, q in law.items():
            freq = sum(d == s for d in draws) / n
            sigma = (float(q) * (1 - float(q)) / n) ** 0.5
            assert abs(freq - float(q)) < 5 * sigma + 1e-9

    def test_holding_time_rate(self):
        rng = np.random.default_rng(2)
        holds = [continuous_time_step(STAIRS, Params(0.5, 0.5), rng)[0] for _ in range(20_000)]
        assert abs(np.mean(holds) - 1 / 11) < 0.005

    def test_path_stops(self):
        rec = sample_path(D1, Params(1, 0), 10_000, np.random.default_rng(0),
                          observers={"size": lambda s: s.size}, stop=lambda s: s.is_ground)
        assert rec.states[-1] == GROUND
        assert len(rec.observations["size"]) == len(rec.states)

    def test_negative_horizon(self):
        with pytest.raises(ValueError):
            sample_path(D1, Params(0, 0), -1, np.random.default_rng(0))


class TestReachability:
    def test_absorbing(self):
        assert is_absorbing(GROUND, Params(1, Fraction(1, 2)))
        assert is_absorbing(GROUND, Params(Fraction(1, 2), 1))
        assert not is_absorbing(GROUND, Params(Fraction(1, 2), Fraction(1, 2)))
        assert not is_absorbing(D1, Params(1, 0))

    def test_small_class_communicates(self):
        states = [GROUND] + [from_string(w) for w in words_up_to(4)][1:]
        assert communicating_class_check(states, Params(0.5, 0.5), size_cap=4)

    def test_one_way_under_voter(self):
        r = communication_check(D1, GROUND, Params(1, 0), size_cap=4)
        assert r.forward is True and r.backward is False
        assert r.verdict == "one-way"

    def test_cap_validation(self):
        with pytest.raises(ValueError):
            communication_check(STAIRS, D1, Params(0.5, 0.5), size_cap=4)
