"""
Unit tests for pattern simulation.
"""

import logging

import numpy as np
import pytest
from scipy import stats

from netfrak.errors import BadDominating, BadModelParams, CovarianceNotPD, FieldTooLarge
from netfrak.geometry import PointPattern, build_network, quadrature_cells
from netfrak.intensity import ConstantIntensity
from netfrak.metric import metric_for
from netfrak.settings import load_settings
from netfrak.simulate import (
    GaussianFieldSpec,
    SeededRng,
    exponential_covariance,
    lgcp,
    make_model,
    poisson_homogeneous,
    poisson_inhomogeneous,
    simulate_batch,
    sinusoidal_intensity,
    ssi,
    thin,
    trend_field_spec,
)


class TestSeededRng:
    """Reproducible substreams."""

    def test_same_path_same_stream(self):
        a = SeededRng(42).generator(3).uniform(size=5)
        b = SeededRng(42).generator(3).uniform(size=5)
        np.testing.assert_array_equal(a, b)

    def test_paths_differ(self):
        rng = SeededRng(42)
        first = rng.generator(0).uniform(size=5)
        assert not np.array_equal(first, rng.generator(1).uniform(size=5))

    def test_bad_seed(self):
        with pytest.raises(BadModelParams):
            SeededRng(-1)
        with pytest.raises(BadModelParams):
            SeededRng(2**64)


class TestPoisson:
    """Homogeneous and thinned Poisson processes."""

    def test_homogeneous_on_network(self, big_star):
        pattern = poisson_homogeneous(big_star, 0.5, SeededRng(1).generator(0))
        assert len(pattern) > 0
        assert np.all(pattern.offsets >= 0)
        assert np.all(pattern.offsets <= big_star.lengths[pattern.segments])
        assert pattern.metadata["model"] == "poisson"

    def test_homogeneous_mean_count(self, big_star):
        rng = SeededRng(5)
        counts = [len(poisson_homogeneous(big_star, 0.2, rng.generator(i))) for i in range(200)]
        # mean 60, standard error sqrt(60 / 200)
        assert np.mean(counts) == pytest.approx(60.0, abs=4 * np.sqrt(60 / 200))

    def test_zero_intensity(self, star):
        assert len(poisson_homogeneous(star, 0.0, np.random.default_rng(0))) == 0

    def test_negative_intensity(self, star):
        with pytest.raises(BadModelParams):
            poisson_homogeneous(star, -1.0, np.random.default_rng(0))

    def test_inhomogeneous_respects_support(self, big_star):
        """Test that no point lands where the intensity vanishes."""
        surface = ConstantIntensity(big_star, 0.0)
        pattern = poisson_inhomogeneous(big_star, surface, 1.0, np.random.default_rng(0))
        assert len(pattern) == 0

    def test_bad_dominating(self, big_star):
        surface = ConstantIntensity(big_star, 5.0)
        with pytest.raises(BadDominating):
            poisson_inhomogeneous(big_star, surface, 1.0, np.random.default_rng(0))

    def test_sinusoidal(self, big_star):
        surface = sinusoidal_intensity(big_star, amp=0.5, freq=0.1)
        assert surface.upper_bound() == 0.5
        pattern = poisson_inhomogeneous(big_star, surface, 0.5, np.random.default_rng(2))
        assert len(pattern) > 0
        assert pattern.metadata["model"] == "ipoisson"

    def test_callable_intensity(self, big_star):
        pattern = poisson_inhomogeneous(
            big_star, lambda p: np.full(len(p), 0.1), 0.1, np.random.default_rng(0)
        )
        assert len(pattern) > 0


class TestInhibition:
    """Simple sequential inhibition and thinning."""

    def test_packing_respects_delta(self, big_star):
        metric = metric_for(big_star)
        pattern = ssi(big_star, metric, 50, 2.0, np.random.default_rng(4))
        assert len(pattern) == 50
        assert pattern.metadata["partial"] is False
        d = metric.pairwise(pattern, pattern)
        np.fill_diagonal(d, np.inf)
        assert d.min() > 2.0

    def test_partial_packing(self, seg1, caplog):
        with caplog.at_level(logging.WARNING, logger="netfrak.simulate"):
            pattern = ssi(seg1, None, 10, 0.4, np.random.default_rng(0), max_attempts=200)
        assert len(pattern) < 10
        assert pattern.metadata["partial"] is True
        assert "SSI packed" in caplog.text

    def test_two_points_on_unit_segment(self, seg1):
        """Test that delta 0.8 pushes two points to opposite ends of the segment."""
        full = 0
        for seed in range(40):
            pattern = ssi(seg1, None, 2, 0.8, np.random.default_rng(seed), max_attempts=500)
            if pattern.metadata["partial"]:
                assert len(pattern) == 1
                continue
            full += 1
            lo, hi = np.sort(pattern.offsets)
            assert hi - lo > 0.8
            assert lo < 0.2 and hi > 0.8
        assert full > 0

    def test_bad_delta(self, seg1):
        with pytest.raises(BadModelParams):
            ssi(seg1, None, 3, 0.0, np.random.default_rng(0))

    def test_thin_extremes(self, seg1):
        pattern = PointPattern(seg1, [0, 0, 0], [0.2, 0.5, 0.8])
        rng = np.random.default_rng(0)
        assert len(thin(pattern, 0.0, rng)) == 0
        kept = thin(pattern, 1.0, rng)
        assert len(kept) == 3
        assert kept.metadata["retention"] == 1.0

    def test_thin_per_point(self, seg1):
        pattern = PointPattern(seg1, [0, 0, 0], [0.2, 0.5, 0.8])
        kept = thin(pattern, lambda p: np.array([1.0, 0.0, 1.0]), np.random.default_rng(0))
        np.testing.assert_allclose(kept.offsets, [0.2, 0.8])

    def test_thin_keeps_expected_share(self, big_star):
        """Test that retention 0.3 keeps 90 of 300 points on average."""
        pattern = ssi(big_star, None, 300, 0.3, np.random.default_rng(0))
        rng = SeededRng(6)
        counts = [len(thin(pattern, 0.3, rng.generator(i))) for i in range(1000)]
        # binomial(300, 0.3): variance 63
        assert np.mean(counts) == pytest.approx(90.0, abs=3 * np.sqrt(63 / 1000))

    def test_thin_bad_probability(self, seg1):
        pattern = PointPattern(seg1, [0], [0.5])
        with pytest.raises(BadModelParams):
            thin(pattern, 1.5, np.random.default_rng(0))


class TestLGCP:
    """Log-Gaussian Cox process on network cells."""

    def test_field_and_pattern(self, big_star):
        spec = trend_field_spec(big_star, base=0.2, variance=1.0, scale=5.0, spacing=2.0)
        pattern, z = lgcp(big_star, spec, np.random.default_rng(0))
        assert z.size == 150
        assert pattern.metadata["model"] == "lgcp"
        assert pattern.metadata["scale"] == 5.0

    def test_zero_variance_is_mean(self, big_star):
        spec = trend_field_spec(big_star, base=0.2, variance=0.0, scale=5.0, spacing=10.0)
        _, z = lgcp(big_star, spec, np.random.default_rng(0))
        assert np.all(np.isfinite(z))
        # mean log(0.2) + (x - 200) / 300 over x in [-100, 100]
        assert z.max() <= np.log(0.2) + (100 - 200) / 300 + 1e-12

    def test_too_many_cells(self, big_star):
        spec = trend_field_spec(big_star, base=0.2, spacing=1.0)
        with pytest.raises(FieldTooLarge):
            lgcp(big_star, spec, np.random.default_rng(0), max_cells=100)

    def test_not_positive_definite(self, star):
        spec = GaussianFieldSpec(
            mean=lambda x, y: np.zeros_like(x),
            covariance=lambda d: np.where(d == 0.0, 1.0, 2.0),
            spacing=0.25,
        )
        with pytest.raises(CovarianceNotPD):
            lgcp(star, spec, np.random.default_rng(0))

    def test_exponential_covariance(self):
        cov = exponential_covariance(2.0, 0.5)
        np.testing.assert_allclose(cov(np.array([0.0, 0.5])), [2.0, 2.0 * np.exp(-1.0)])
        with pytest.raises(BadModelParams):
            exponential_covariance(1.0, 0.0)


class TestModels:
    """Named models and batches."""

    @pytest.mark.parametrize(
        "name,params",
        [
            ("poisson", {"rho": 0.2}),
            ("ipoisson", {"amp": 0.4, "freq": 0.05}),
            ("ssi-thin", {"n": 40, "delta": 1.0, "p": 0.5}),
            ("lgcp", {"base": 0.1, "scale": 5.0, "spacing": 3.0}),
        ],
    )
    def test_models_sample(self, big_star, name, params):
        model = make_model(big_star, name, params, load_settings())
        pattern = model(SeededRng(9).generator(0))
        assert pattern.network is big_star
        assert model.name == name

    def test_unknown_model(self, star):
        with pytest.raises(BadModelParams):
            make_model(star, "gibbs", {})

    def test_unknown_parameter(self, star):
        with pytest.raises(BadModelParams):
            make_model(star, "poisson", {"rho": 1.0, "sigma": 2.0})

    def test_missing_parameter(self, star):
        with pytest.raises(BadModelParams):
            make_model(star, "poisson", {})

    def test_delta_fraction(self, big_star):
        model = make_model(big_star, "ssi-thin", {"n": 10, "delta_frac": 0.01})
        assert model.params["delta"] == pytest.approx(3.0)
        assert model.params["p"] == 0.3

    def test_batch_independent_of_workers(self, big_star):
        model = make_model(big_star, "ssi-thin", {"n": 30, "delta": 1.0, "p": 0.5})
        one = simulate_batch(model, 6, seed=11, workers=1)
        many = simulate_batch(model, 6, seed=11, workers=4)
        for a, b in zip(one, many):
            np.testing.assert_array_equal(a.segments, b.segments)
            np.testing.assert_array_equal(a.offsets, b.offsets)

    def test_batch_progress(self, star):
        model = make_model(star, "poisson", {"rho": 2.0})
        messages = []
        out = simulate_batch(model, 3, seed=0, workers=2, progress=messages.append)
        assert len(out) == 3
        assert messages[-1] == "simulated 3/3"


@pytest.mark.slow
class TestDistributions:
    """Goodness-of-fit checks pooled over many seeds."""

    def test_offsets_uniform_on_each_segment(self, big_star):
        rng = SeededRng(21)
        patterns = [poisson_homogeneous(big_star, 0.5, rng.generator(i)) for i in range(20)]
        segments = np.concatenate([p.segments for p in patterns])
        offsets = np.concatenate([p.offsets for p in patterns])
        for s, length in enumerate(big_star.lengths):
            scaled = offsets[segments == s] / length
            assert stats.kstest(scaled, "uniform").pvalue > 0.001

    def test_segment_shares_follow_length(self):
        # arms of length 1, 2 and 3
        net = build_network(
            [(0.0, 0.0), (1.0, 0.0), (0.0, 2.0), (-3.0, 0.0)], [(0, 1), (0, 2), (0, 3)]
        )
        rng = SeededRng(22)
        counts = np.zeros(3)
        for i in range(300):
            pattern = poisson_homogeneous(net, 2.0, rng.generator(i))
            counts += np.bincount(pattern.segments, minlength=3)
        expected = counts.sum() * net.lengths / net.total_length
        assert stats.chisquare(counts, expected).pvalue > 0.001

    def test_constant_ipoisson_matches_poisson(self, star):
        surface = ConstantIntensity(star, 3.0)
        homogeneous, thinned = SeededRng(23), SeededRng(24)
        a = [len(poisson_homogeneous(star, 3.0, homogeneous.generator(i))) for i in range(1000)]
        b = [
            len(poisson_inhomogeneous(star, surface, 3.0, thinned.generator(i)))
            for i in range(1000)
        ]
        assert stats.ks_2samp(a, b).pvalue > 0.001

    def test_degenerate_lgcp_matches_poisson(self, star):
        spec = GaussianFieldSpec(
            mean=lambda x, y: np.full_like(x, np.log(3.0)),
            covariance=exponential_covariance(0.0, 1.0),
            spacing=0.1,
        )
        a_rng, b_rng = SeededRng(25), SeededRng(26)
        a = [len(lgcp(star, spec, a_rng.generator(i))[0]) for i in range(1000)]
        b = [len(poisson_homogeneous(star, 3.0, b_rng.generator(i))) for i in range(1000)]
        assert stats.ks_2samp(a, b).pvalue > 0.001

    def test_lgcp_overdispersed(self, big_star):
        """Test that counts vary more than Poisson and average the lognormal mean."""
        spec = trend_field_spec(big_star, base=0.2, variance=1.0, scale=50.0, spacing=10.0)
        mids, lengths = quadrature_cells(big_star, spec.spacing)
        mu = spec.mean(mids.xy[:, 0], mids.xy[:, 1])
        expected = float(np.sum(np.exp(mu + 0.5 * spec.variance) * lengths))
        rng = SeededRng(27)
        counts = np.array([len(lgcp(big_star, spec, rng.generator(i))[0]) for i in range(400)])
        assert counts.var(ddof=1) > 1.5 * counts.mean()
        se = counts.std(ddof=1) / np.sqrt(counts.size)
        assert abs(counts.mean() - expected) <= 4 * se
