"""Random Euler products: exact moments, counter-based sampling, and the
derived expectations.

Analytic anchors used as independent oracles:

* X model, s = -2: each local factor is (p^2+p+1)/(p(p+1)) =
  (1-p^-3)/(1-p^-2), so the full product telescopes to zeta(2)/zeta(3).
* Y model, s = -2: local factor 1 + p^-2, product zeta(2)/zeta(4).
* Y model, s = -3: local factor 1 + 3p^-2, log of the product is
  sum_k (-1)^(k+1) (3^k/k) P(2k) with P the prime zeta function.
* both models, s = -1: every local factor is the mean of 1 - x/p, which
  is exactly 1.

The sampling layer is checked against a grid-convolution oracle
(tests/_dist_oracle.py) that never touches the sampler's code path.
"""

import math

import mpmath as mp
import numpy as np
import pytest

from classcensus import (
    MomentResult,
    RandomEulerModel,
    expect_min,
    local_factor,
    moment,
    sample_L,
    sample_L_batch,
    tail_probability,
)
from classcensus.arith import CONSTANTS, primes_up_to
from classcensus.randeuler import _Sampler

from _dist_oracle import grid_expectation, log_l_grid

ZETA4 = math.pi**4 / 90.0


def xmodel(P=100_000, **kw):
    return RandomEulerModel(kind="X_model", prime_cutoff=P, **kw)


def ymodel(P=100_000, **kw):
    return RandomEulerModel(kind="Y_model", prime_cutoff=P, **kw)


class TestModelValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            RandomEulerModel(kind="Z_model")

    def test_cutoff_floor(self):
        with pytest.raises(ValueError, match="prime_cutoff"):
            RandomEulerModel(kind="X_model", prime_cutoff=50)

    def test_tail_order(self):
        with pytest.raises(ValueError, match="tail_order"):
            RandomEulerModel(kind="X_model", tail_order=3)

    def test_forced_value(self):
        with pytest.raises(ValueError, match="forced_value"):
            RandomEulerModel(kind="X_model", forced_value=2)


class TestLocalFactor:
    def test_exact_rationals(self):
        # s = -2: E[(1-x/p)^2] = (p^2+p+1)/(p(p+1)) for X, 1+p^-2 for Y
        X, Y = xmodel(1000), ymodel(1000)
        assert local_factor(2, -2, X) == pytest.approx(7 / 6, rel=1e-15)
        assert local_factor(5, -2, X) == pytest.approx(31 / 30, rel=1e-15)
        assert local_factor(3, -2, Y) == pytest.approx(10 / 9, rel=1e-15)
        # s = -3: E[(1-x/p)^3] = 1 + 3/(p(p+1)) for X, 1 + 3p^-2 for Y
        assert local_factor(2, -3, X) == pytest.approx(3 / 2, rel=1e-15)
        assert local_factor(3, -3, Y) == pytest.approx(4 / 3, rel=1e-15)

    def test_mean_of_one(self):
        for model in (xmodel(1000), ymodel(1000)):
            for p in (2, 3, 101):
                assert local_factor(p, -1, model) == pytest.approx(1.0, abs=1e-15)

    def test_s_zero_exact(self):
        assert local_factor(7, 0, xmodel(1000)) == 1.0 + 0.0j

    def test_conjugate_symmetry(self):
        s = 1.5 + 0.7j
        for model in (xmodel(1000), ymodel(1000)):
            a = local_factor(13, s, model)
            b = local_factor(13, s.conjugate(), model)
            assert b == pytest.approx(a.conjugate(), rel=1e-15)

    def test_rejects_huge_s(self):
        with pytest.raises(ValueError, match="maximum"):
            local_factor(2, 100.0, xmodel(1000))


class TestMoments:
    def test_x_second_inverse_moment_telescopes(self):
        # the infinite product equals zeta(2)/zeta(3) exactly
        target = CONSTANTS.zeta2 / CONSTANTS.zeta3
        for P in (100_000, 1_000_000):
            m = moment(-2.0, xmodel(P))
            assert abs(m.value - target) / target < 1e-12
            assert abs(m.value - target) / target <= m.truncation_error_bound

    def test_y_second_inverse_moment(self):
        target = CONSTANTS.zeta2 / ZETA4  # = 15/pi^2
        assert target == pytest.approx(15.0 / math.pi**2, rel=1e-15)
        m = moment(-2.0, ymodel())
        assert abs(m.value - target) / target < 1e-12

    def test_y_third_inverse_moment_primezeta(self):
        # independent evaluation through the prime zeta function
        with mp.workdps(40):
            tot = mp.mpf(0)
            for k in range(1, 140):
                tot += (-1) ** (k + 1) * mp.mpf(3) ** k / k * mp.primezeta(2 * k)
            ref = float(mp.e**tot)
        m = moment(-3.0, ymodel())
        assert abs(m.value - ref) / ref < 1e-12

    def test_first_inverse_moment_is_one(self):
        for model in (xmodel(), ymodel()):
            m = moment(-1.0, model)
            assert abs(m.value - 1.0) < 1e-11
            assert m.truncation_error_bound < 1e-9

    def test_s_zero_exact(self):
        m = moment(0.0, xmodel())
        assert m.value == 1.0 + 0.0j
        assert m.truncation_error_bound == 0.0

    def test_conjugate_symmetry(self):
        s = -1.0 + 2.0j
        for model in (xmodel(), ymodel()):
            a = moment(s, model).value
            b = moment(s.conjugate(), model).value
            assert b == pytest.approx(a.conjugate(), rel=1e-13)

    def test_imaginary_axis_modulus(self):
        # |E(L^{it})| for Y equals prod |cos(t atanh(1/p))| over the same
        # primes, up to the analytic tail beyond the cutoff
        P = 100_000
        pr = primes_up_to(P).astype(np.float64)
        indep = math.exp(
            math.fsum(np.log(np.abs(np.cos(2.0 * np.arctanh(1.0 / pr)))))
        )
        m = moment(2j, ymodel(P))
        assert abs(m.value) == pytest.approx(indep, rel=5e-6)
        assert abs(m.value) <= 1.0 + 1e-12  # |L^{it}| = 1 pointwise

    def test_cutoff_consistency_within_bounds(self):
        # changing the cutoff moves the value by at most both error bounds
        for s in (-2.0, -0.5, 1.0, 2.0, 2j):
            m1 = moment(s, xmodel(100_000))
            m2 = moment(s, xmodel(300_000))
            tol = m1.truncation_error_bound * abs(m1.value) + (
                m2.truncation_error_bound * abs(m2.value)
            )
            assert abs(m1.value - m2.value) <= tol

    def test_tail_order_zero_is_coarser(self):
        target = CONSTANTS.zeta2 / CONSTANTS.zeta3
        m0 = moment(-2.0, xmodel(tail_order=0))
        m2 = moment(-2.0, xmodel(tail_order=2))
        assert abs(m0.value - target) > abs(m2.value - target)
        assert m0.truncation_error_bound > m2.truncation_error_bound

    def test_bound_degrades_and_diverges(self):
        # |s| near the ceiling with a tiny cutoff: the bound is honest about
        # being useless, and the majorant-divergence branch returns inf
        from classcensus.randeuler import _truncation_bound

        m = moment(60.0, xmodel(100))
        assert m.truncation_error_bound > 0.5
        assert _truncation_bound(50.0, 10, 2, 4) == math.inf

    def test_rejects_huge_s(self):
        with pytest.raises(ValueError, match="maximum"):
            moment(65.0, xmodel())

    def test_result_type(self):
        m = moment(-2.0, ymodel())
        assert isinstance(m, MomentResult)
        assert m.s == -2.0 + 0.0j


class TestSampling:
    def test_compiled_matches_numpy_reference(self):
        # the numba kernel and the pure-numpy reference must agree bit for
        # bit; both models, spanning a block boundary offset
        for kind in ("X_model", "Y_model"):
            model = RandomEulerModel(kind=kind, prime_cutoff=500)
            s = _Sampler(model)
            a = s.log_l_block(2024, 7, 600)
            b = s.log_l_block_numpy(2024, 7, 600)
            assert np.array_equal(a, b)

    def test_lane_bit_identity(self):
        model = xmodel(500)
        a = sample_L_batch(model, 31337, 70_000, lanes=1)
        b = sample_L_batch(model, 31337, 70_000, lanes=3)
        assert np.array_equal(a, b)

    def test_prefix_stability(self):
        # draw i depends only on (seed, i), not on the batch size
        model = ymodel(500)
        a = sample_L_batch(model, 5, 40_000)
        b = sample_L_batch(model, 5, 33_000)
        assert np.array_equal(a[:33_000], b)
        assert sample_L(model, 5) == a[0]

    def test_seed_sensitivity(self):
        model = xmodel(500)
        a = sample_L_batch(model, 1, 100)
        b = sample_L_batch(model, 2, 100)
        assert not np.array_equal(a, b)

    def test_distribution_against_convolution_oracle(self):
        # grid convolution of the exact local laws, entirely separate code
        for kind in ("X_model", "Y_model"):
            v, f = log_l_grid(200, kind=kind)
            mu = grid_expectation(v, f, lambda x: x)
            m2 = grid_expectation(v, f, lambda x: x * x)
            tail = grid_expectation(v, f, lambda x: (x <= -1.0).astype(float))
            model = RandomEulerModel(kind=kind, prime_cutoff=200)
            g = np.log(sample_L_batch(model, 77, 200_000))
            n = len(g)
            se_mu = g.std(ddof=1) / math.sqrt(n)
            assert abs(g.mean() - mu) < 4 * se_mu + 2e-4
            assert g.var(ddof=1) == pytest.approx(m2 - mu * mu, rel=0.03)
            phat = float(np.mean(g <= -1.0))
            se_p = math.sqrt(tail * (1 - tail) / n)
            assert abs(phat - tail) < 4 * se_p + 2e-4

    def test_sample_mean_matches_moment(self):
        # E(L^-2) from Monte Carlo vs the analytic product
        model = xmodel(10_000)
        target = moment(-2.0, model).value.real
        w = sample_L_batch(model, 99, 200_000) ** -2.0
        se = w.std(ddof=1) / math.sqrt(len(w))
        assert abs(w.mean() - target) < 4 * se

    def test_forced_value_paths(self):
        pr = primes_up_to(500).astype(np.float64)
        for forced, expo in ((1, -1.0), (-1, 1.0)):
            model = RandomEulerModel(
                kind="X_model", prime_cutoff=500, forced_value=forced
            )
            L = sample_L_batch(model, 0, 8)
            want = math.exp(
                -math.fsum(np.log1p(expo * -1.0 / pr) * 1.0)
            )
            # forced +1 gives prod (1-1/p)^{-1}, forced -1 prod (1+1/p)^{-1}
            direct = math.exp(-math.fsum(np.log1p((-forced) / pr)))
            assert np.all(L == L[0])
            assert L[0] == pytest.approx(direct, rel=1e-14)
        model0 = RandomEulerModel(kind="Y_model", prime_cutoff=500, forced_value=0)
        assert np.all(sample_L_batch(model0, 0, 8) == 1.0)

    def test_batch_validation(self):
        with pytest.raises(ValueError):
            sample_L_batch(xmodel(500), 0, 0)
        with pytest.raises(ValueError):
            sample_L_batch(xmodel(500), 0, 10, lanes=0)


class TestExpectMin:
    def test_uncapped_matches_analytic(self):
        model = xmodel(10_000)
        target = math.pi**2 * 100 * moment(-2.0, model).value.real
        est, se = expect_min(10, None, model, 50_000, 4242)
        assert abs(est - target) < 4 * se
        est_inf, _ = expect_min(10, math.inf, model, 50_000, 4242)
        assert est_inf == est

    def test_cap_monotone(self):
        model = xmodel(2000)
        vals = [expect_min(10, X, model, 5_000, 7)[0] for X in (10.0, 1e3, 1e6)]
        un, _ = expect_min(10, None, model, 5_000, 7)
        assert vals[0] <= vals[1] <= vals[2] <= un
        assert vals[0] <= 10.0

    def test_forced_zero_is_exact(self):
        # L = 1 for every draw, so the min is deterministic
        model = RandomEulerModel(kind="X_model", prime_cutoff=500, forced_value=0)
        est, se = expect_min(3, 50.0, model, 1000, 0)
        assert est == pytest.approx(min(math.pi**2 * 9, 50.0), rel=1e-15)
        assert se == 0.0

    def test_validation(self):
        model = xmodel(500)
        with pytest.raises(ValueError):
            expect_min(0, None, model, 1000, 0)
        with pytest.raises(ValueError):
            expect_min(5, 0.5, model, 1000, 0)
        with pytest.raises(ValueError):
            expect_min(5, None, model, 999, 0)


class TestTailProbability:
    def test_frozen_values(self):
        model = xmodel(2000)
        p1, se1 = tail_probability(1.0, model, 20_000, 1234)
        p3, se3 = tail_probability(3.0, model, 20_000, 1234)
        assert p1 == 0.3625
        assert p3 == 0.00345
        assert se1 == pytest.approx(math.sqrt(p1 * (1 - p1) / 20_000), rel=1e-12)
        assert se3 == pytest.approx(math.sqrt(p3 * (1 - p3) / 20_000), rel=1e-12)

    def test_monotone_in_tau(self):
        model = xmodel(2000)
        ps = [tail_probability(t, model, 20_000, 1234)[0] for t in (1.0, 2.0, 3.0)]
        assert ps[0] >= ps[1] >= ps[2]

    def test_threshold_is_zeta2_scale(self):
        # at tau = 1 the threshold zeta(2)e^{-gamma} sits near the bulk of
        # the distribution, so the probability is order one
        model = ymodel(2000)
        p, _ = tail_probability(1.0, model, 20_000, 99)
        assert 0.2 < p < 0.6

    def test_validation(self):
        with pytest.raises(ValueError):
            tail_probability(0.5, xmodel(500), 1000, 0)
        with pytest.raises(ValueError):
            tail_probability(2.0, xmodel(500), 0, 0)
