import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy import stats

from nonresp.design import (BernoulliPerUnit, Design, DesignError, SinglePhase, TwoPhase,
                            draw_srswor, realize, subsample_size)
from nonresp.montecarlo import replication_rng
from nonresp.population import FinitePopulation, PopulationParams, synthesize_population


@pytest.fixture(scope="module")
def pop():
    t = PopulationParams(N=100, Ybar=50, Xbar=20, S2_Y=100, S2_X=16, rho=0.7,
                         W2=0.3, S2_Y2=80)
    return synthesize_population(t, 4)


class TestSrswor:
    def test_census(self):
        idx = draw_srswor(5, 5, np.random.default_rng(0))
        assert sorted(idx) == [0, 1, 2, 3, 4]

    def test_too_large(self):
        with pytest.raises(DesignError):
            draw_srswor(5, 6, np.random.default_rng(0))

    def test_single_draw_uniform(self):
        rng = np.random.default_rng(1)
        counts = np.bincount([draw_srswor(5, 1, rng)[0] for _ in range(100_000)], minlength=5)
        assert np.all(np.abs(counts / 1e5 - 0.2) < 0.01)
        assert stats.chisquare(counts).pvalue > 1e-3

    def test_pairs_uniform(self):
        rng = np.random.default_rng(2)
        counts = Counter(tuple(sorted(draw_srswor(5, 2, rng))) for _ in range(100_000))
        pairs = list(itertools.combinations(range(5), 2))
        assert set(counts) == set(pairs)
        freqs = np.array([counts[p] for p in pairs]) / 1e5
        assert np.all(np.abs(freqs - 0.1) < 0.01)
        assert stats.chisquare([counts[p] for p in pairs]).pvalue > 1e-3

    def test_distinct(self):
        idx = draw_srswor(1000, 300, np.random.default_rng(3))
        assert len(set(idx.tolist())) == 300
        assert idx.min() >= 0 and idx.max() < 1000


class TestDesignValidation:
    def test_k_below_one(self):
        with pytest.raises(DesignError):
            Design(SinglePhase(10), k=0.5)

    def test_two_phase_order(self):
        with pytest.raises(DesignError):
            Design(TwoPhase(10, 10))
        with pytest.raises(DesignError):
            Design(TwoPhase(10, 1))

    def test_single_phase_min(self):
        with pytest.raises(DesignError):
            Design(SinglePhase(1))

    def test_exceeds_population(self, pop):
        with pytest.raises(DesignError):
            realize(Design(TwoPhase(101, 10)), pop, np.random.default_rng(0))


class TestRealize:
    def test_k_one_interviews_everyone(self, pop):
        rng = np.random.default_rng(0)
        for _ in range(50):
            s = realize(Design(SinglePhase(20), k=1), pop, rng)
            assert s.h2 == s.n2

    def test_no_nonrespondents(self):
        y = np.arange(10.0)
        p = FinitePopulation(y, y + 1, np.zeros(10, bool))
        s = realize(Design(SinglePhase(5), k=2), p, np.random.default_rng(0))
        assert s.n2 == 0 and s.h2 == 0 and s.n1 == 5

    def test_subsample_size_rounding(self):
        assert subsample_size(3, 1.5) == 2
        assert subsample_size(3, 2) == 2
        assert subsample_size(1, 5) == 1
        assert subsample_size(0, 2) == 0
        assert subsample_size(7, 1) == 7

    def test_invariants(self, pop):
        rng = np.random.default_rng(5)
        for design in (Design(SinglePhase(30), k=1.5), Design(TwoPhase(60, 30), k=2.5)):
            for _ in range(200):
                s = realize(design, pop, rng)
                assert s.n1 + s.n2 == 30
                assert s.h2 <= s.n2
                assert (s.n2 > 0) == (s.h2 >= 1)
                assert s.x_all.size == 30

    def test_two_phase_subset(self, pop):
        rng = np.random.default_rng(6)
        for _ in range(200):
            s = realize(Design(TwoPhase(60, 30), k=2), pop, rng)
            assert s.phase1_x.size == 60
            p1 = Counter(s.phase1_x.tolist())
            p2 = Counter(s.x_all.tolist())
            assert all(p1[v] >= c for v, c in p2.items())

    def test_observed_values_come_from_population(self, pop):
        s = realize(Design(SinglePhase(30), k=2), pop, np.random.default_rng(8))
        ys = set(pop.y.tolist())
        assert set(s.resp_y.tolist()) <= ys and set(s.sub_y.tolist()) <= ys
        nr_y = set(pop.y[pop.nonresp].tolist())
        assert set(s.sub_y.tolist()) <= nr_y

    def test_expected_nonresponse_share(self, pop):
        rng = np.random.default_rng(7)
        n, R = 30, 10_000
        shares = [realize(Design(SinglePhase(n), k=2), pop, rng).n2 / n for _ in range(R)]
        se = math.sqrt(pop.W2 * (1 - pop.W2) / (n * R))
        assert abs(np.mean(shares) - pop.W2) <= 3 * se

    def test_bernoulli_mode(self, pop):
        rng = np.random.default_rng(9)
        d = Design(SinglePhase(40), k=2, nr_mode=BernoulliPerUnit(0.25))
        n2 = [realize(d, pop, rng).n2 for _ in range(5000)]
        se = math.sqrt(0.25 * 0.75 / (40 * 5000))
        assert abs(np.mean(n2) / 40 - 0.25) <= 3 * se

    def test_all_nonrespondents_flagged(self, pop):
        d = Design(SinglePhase(10), k=2, nr_mode=BernoulliPerUnit(1.0))
        s = realize(d, pop, np.random.default_rng(0))
        assert s.no_respondents and s.n2 == 10 and s.h2 == 5

    def test_same_seed_same_sample(self, pop):
        d = Design(TwoPhase(60, 30), k=1.5)

        def draw(r):
            s = realize(d, pop, replication_rng(123, r))
            return np.concatenate([s.resp_y, s.sub_y, s.x_all, s.phase1_x])

        serial = [draw(r) for r in range(64)]
        with ThreadPoolExecutor(8) as ex:
            parallel = list(ex.map(draw, range(64)))
        assert all(np.array_equal(a, b) for a, b in zip(serial, parallel))
        assert not np.array_equal(serial[0], serial[1])
