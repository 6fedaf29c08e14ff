import math

import numpy as np
import pytest

from hilproc import (
    DirectionLaw,
    InnovationModel,
    YoungFunction,
    covariance_operator,
    envelope_holds,
    fit_moment_envelope,
    lr_norm,
    luxemburg_norm,
    rng,
)

KEY = rng.derive_key(314159)


class TestYoungFunctions:
    @pytest.mark.parametrize("psi", [YoungFunction.psi1(), YoungFunction.power(1), YoungFunction.power(3.5)])
    def test_zero_monotone_convex_on_grid(self, psi):
        xs = np.linspace(0.0, 8.0, 401)
        ys = psi(xs)
        assert ys[0] == 0.0
        assert np.all(np.diff(ys) >= 0.0)
        assert np.all(np.diff(ys, 2) >= -1e-12)
        assert psi(50.0) > 1e6  # blows up

    def test_power_needs_r_at_least_one(self):
        with pytest.raises(ValueError):
            YoungFunction.power(0.5)


class TestSampling:
    def test_bounded_norms_attain_radius_exactly(self):
        model = InnovationModel.bounded(3, radius=0.7)
        x = model.sample(1, 5000, KEY)
        assert np.allclose(np.linalg.norm(x, axis=1), 0.7, rtol=0, atol=1e-15)

    def test_zero_radius_gives_zero_sequence(self):
        x = InnovationModel.bounded(3, radius=0.0).sample(1, 50, KEY)
        assert np.array_equal(x, np.zeros((50, 3)))

    def test_overlapping_ranges_agree(self):
        model = InnovationModel.sub_exponential(2, 1.0)
        wide = model.sample(1, 10, KEY)
        narrow = model.sample(5, 10, KEY)
        assert np.array_equal(wide[4:], narrow)

    def test_draws_pure_in_key_and_index(self):
        model = InnovationModel.heavy_tail(2, alpha=4.0)
        assert np.array_equal(model.sample(-3, 3, KEY), model.sample(-3, 3, KEY))
        other = rng.derive_key(1)
        assert not np.allclose(model.sample(-3, 3, KEY), model.sample(-3, 3, other))

    def test_fixed_direction_covariance(self):
        # Rademacher along e1: covariance is exactly e1 x e1
        model = InnovationModel.bounded(3, 1.0, DirectionLaw("fixed", (1.0, 0.0, 0.0)))
        x = model.sample(1, 100_000, KEY)
        emp = covariance_operator(x).entries
        expected = np.zeros((3, 3))
        expected[0, 0] = 1.0
        assert np.linalg.norm(emp - expected) <= 0.02
        assert np.allclose(emp, model.covariance().entries, atol=0.02)

    @pytest.mark.parametrize(
        "model",
        [
            InnovationModel.bounded(4, 1.3),
            InnovationModel.sub_exponential(3, 0.8),
            InnovationModel.heavy_tail(2, alpha=5.0, scale=0.7),
            InnovationModel.gaussian(3, 1.1),
        ],
    )
    def test_empirical_covariance_matches_analytic(self, model):
        m = 100_000
        x = model.sample(1, m, KEY)
        emp = covariance_operator(x).entries
        assert np.linalg.norm(emp - model.covariance().entries) <= 0.03

    @pytest.mark.parametrize(
        "model",
        [
            InnovationModel.bounded(4, 1.0),
            InnovationModel.bounded(4, 1.0, DirectionLaw("sphere")),
            InnovationModel.sub_exponential(2, 1.0),
            InnovationModel.gaussian(5, 2.0),
        ],
    )
    def test_centering(self, model):
        m = 200_000
        x = model.sample(1, m, KEY)
        bound = 5.0 * math.sqrt(model.dim * model.radial_moment(2) / m)
        assert np.linalg.norm(x.mean(axis=0)) <= bound

    def test_constant_mode_is_seed_free(self):
        model = InnovationModel.constant([1.0, -2.0])
        a = model.sample(1, 10, KEY)
        b = model.sample(1, 10, rng.derive_key(9999))
        assert np.array_equal(a, b)
        assert np.array_equal(a[0], [1.0, -2.0])

    def test_heavy_tail_needs_alpha_above_two(self):
        with pytest.raises(ValueError, match="index"):
            InnovationModel.heavy_tail(2, alpha=1.5)

    def test_heavy_moments_match_pareto(self):
        model = InnovationModel.heavy_tail(1, alpha=6.0, scale=1.0)
        x = np.linalg.norm(model.sample(1, 400_000, KEY), axis=1)
        for r in (1, 2, 3):
            assert np.mean(x**r) == pytest.approx(6.0 / (6.0 - r), rel=0.05)


class TestLuxemburgNorm:
    def test_constant_radius_power(self):
        assert luxemburg_norm(np.full(32, 2.5), YoungFunction.power(3)) == pytest.approx(2.5, rel=1e-9)

    def test_constant_radius_psi1(self):
        # solve exp(c0/c) - 1 = 1  =>  c = c0 / ln 2
        c0 = 1.7
        expected = c0 / math.log(2.0)
        assert luxemburg_norm(np.full(8, c0), YoungFunction.psi1()) == pytest.approx(expected, rel=1e-9)

    def test_all_zero_gives_zero(self):
        assert luxemburg_norm(np.zeros(10), YoungFunction.psi1()) == 0.0

    def test_accepts_vectors(self):
        vecs = np.array([[3.0, 4.0], [3.0, 4.0]])  # norms are 5
        assert luxemburg_norm(vecs, YoungFunction.power(2)) == pytest.approx(5.0, rel=1e-7)

    def test_positively_homogeneous(self, gen):
        x = np.abs(gen.normal(size=500)) + 0.01
        psi = YoungFunction.psi1()
        tol = 1e-8
        base = luxemburg_norm(x, psi, tol=tol)
        for s in (0.25, 3.0, 17.0):
            assert luxemburg_norm(s * x, psi, tol=tol) == pytest.approx(s * base, rel=2 * tol + 1e-9)

    def test_power_family_equals_lr_norm(self, gen):
        x = np.abs(gen.normal(size=2000))
        for r in (1.0, 2.0, 4.0):
            assert luxemburg_norm(x, YoungFunction.power(r), tol=1e-10) == pytest.approx(
                lr_norm(x, r), rel=1e-8
            )


class TestLrNorm:
    def test_constant(self):
        assert lr_norm(np.full(5, 2.0), 3) == pytest.approx(2.0, rel=1e-12)

    def test_two_point(self):
        # ((0 + 4)/2)^(1/2)
        vecs = np.array([[0.0, 0.0], [2.0, 0.0]])
        assert lr_norm(vecs, 2) == pytest.approx(math.sqrt(2.0), rel=1e-12)

    def test_zeros(self):
        assert lr_norm(np.zeros(4), 5) == 0.0

    def test_monotone_in_r(self, gen):
        x = np.abs(gen.normal(size=300))
        rs = [1.0, 1.5, 2.0, 3.0, 6.0, 10.0]
        vals = [lr_norm(x, r) for r in rs]
        for lo, hi in zip(vals, vals[1:]):
            assert lo <= hi * (1 + 1e-9)


class TestMomentEnvelope:
    def test_constant_one_admits_unit_pair(self):
        # m!/2 >= 1 for every m >= 2, so (B, L) = (1, 1) dominates all moments
        moments = {m: 1.0 for m in range(2, 9)}
        assert envelope_holds(moments, 1.0, 1.0)

    def test_all_zero(self):
        assert fit_moment_envelope(np.zeros(10)) == (0.0, 1.0)

    def test_fit_satisfies_envelope(self, gen):
        x = np.abs(gen.normal(size=5000)) + 0.1
        b, l = fit_moment_envelope(x, m_max=8)
        moments = {m: float(np.mean(x**m)) for m in range(2, 9)}
        assert envelope_holds(moments, b, l, slack=1e-9)

    def test_exponential_radial_law(self):
        # exact envelope for the exponential law is (sqrt(2) theta, theta)
        model = InnovationModel.sub_exponential(1, 1.0)
        x = np.linalg.norm(model.sample(1, 1_000_000, KEY), axis=1)
        b, l = fit_moment_envelope(x, m_max=8)
        moments = {m: float(np.mean(x**m)) for m in range(2, 9)}
        assert envelope_holds(moments, b, l, slack=1e-9)
        assert b == pytest.approx(math.sqrt(2.0), rel=0.05)
        analytic = model.moment_envelope()
        assert analytic == (math.sqrt(2.0), 1.0)

    def test_analytic_envelopes_dominate_true_moments(self):
        for model in (InnovationModel.bounded(2, 1.5), InnovationModel.sub_exponential(2, 0.7)):
            b, l = model.moment_envelope()
            moments = {m: model.radial_moment(m) for m in range(2, 11)}
            assert envelope_holds(moments, b, l, slack=1e-12)
