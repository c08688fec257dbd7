"""Samplers and path construction checked against the closed-form jump laws."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import claysub.simulate as simulate_mod
from claysub.model import (
    ModelParams,
    clayton,
    intensities,
    joint_jump_survival,
    marginal_tail,
)
from claysub.simulate import (
    JumpStream,
    SimulationConfig,
    conditional_level_cdf,
    conditional_level_inverse,
    sample_joint_jump_pairs,
    sample_single_jumps,
    simulate_path,
)


def binomial_band(p, n, sigmas=5.0):
    return sigmas * math.sqrt(p * (1.0 - p) / n)


class TestConditionalTransform:
    @given(
        st.floats(-12.0, 12.0),
        st.floats(1e-9, 1.0 - 1e-9),
        st.floats(0.05, 20.0),
    )
    def test_inverse_cdf_roundtrip(self, log_u, w, delta):
        u = math.exp(log_u)
        v = conditional_level_inverse(u, w, delta)
        assert conditional_level_cdf(v, u, delta) == pytest.approx(w, rel=1e-10)

    def test_unit_delta_closed_form(self):
        u, w = 3.0, 0.4
        assert conditional_level_inverse(u, w, 1.0) == pytest.approx(
            u / (w**-0.5 - 1.0), rel=1e-13
        )

    def test_monotone_in_uniform(self):
        levels = conditional_level_inverse(2.0, np.array([0.1, 0.5, 0.9]), 2.0)
        assert np.all(np.diff(levels) > 0.0)

    def test_limits(self):
        # w -> 1 sends the partner level to infinity (partner jump vanishes)
        assert conditional_level_inverse(1.0, 1.0, 2.0) == np.inf
        assert conditional_level_inverse(1.0, 1e-300, 2.0) < 1e-80

    def test_vectorized_and_scalar_forms(self):
        w = np.array([0.2, 0.8])
        vec = conditional_level_inverse(1.0, w, 3.0)
        assert vec.shape == (2,)
        assert vec[0] == pytest.approx(conditional_level_inverse(1.0, 0.2, 3.0))
        assert isinstance(conditional_level_cdf(1.0, 1.0, 3.0), float)


class TestPairSampler:
    def test_deterministic_in_seed(self, reference):
        a = sample_joint_jump_pairs(reference, 1e-3, 500, seed=11)
        b = sample_joint_jump_pairs(reference, 1e-3, 500, seed=11)
        c = sample_joint_jump_pairs(reference, 1e-3, 500, seed=12)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_support_and_shape(self, reference):
        pairs = sample_joint_jump_pairs(reference, 1e-3, 1000, seed=0)
        assert pairs.shape == (1000, 2)
        assert np.all(pairs >= 1e-3)

    def test_empirical_survival_matches_pair_law(self, reference, reference_config):
        n = 100_000
        pairs = sample_joint_jump_pairs(reference, reference_config.epsilon, n, seed=5)
        eps = reference_config.epsilon
        for x0, y0 in [(2 * eps, 2 * eps), (5 * eps, eps), (eps, 10 * eps)]:
            p = joint_jump_survival(x0, y0, reference, reference_config)
            emp = np.mean((pairs[:, 0] >= x0) & (pairs[:, 1] >= y0))
            assert abs(emp - p) < binomial_band(p, n)

    def test_acceptance_rate_near_joint_share(self, reference):
        _, rate = sample_joint_jump_pairs(
            reference, 1e-3, 30_000, seed=2, return_acceptance=True
        )
        share = 2.0 ** -(reference.alpha / reference.theta)
        assert rate == pytest.approx(share, abs=0.02)

    def test_asymmetric_margins_supported(self):
        params = ModelParams(c1=1.0, c2=2.0, alpha1=0.4, alpha2=0.6, delta=1.5)
        pairs = sample_joint_jump_pairs(params, 1e-2, 200, seed=0)
        assert np.all(pairs >= 1e-2)

    def test_invalid_arguments(self, reference):
        with pytest.raises(ValueError):
            sample_joint_jump_pairs(reference, 1e-3, 0)
        with pytest.raises(ValueError):
            sample_joint_jump_pairs(reference, 0.0, 10)

    def test_stall_guard_trips(self, reference, monkeypatch):
        # every partner level infinite means no proposal ever clears the threshold
        monkeypatch.setattr(
            simulate_mod,
            "conditional_level_inverse",
            lambda u, w, delta: np.full(np.shape(w), np.inf),
        )
        with pytest.raises(RuntimeError, match="no progress"):
            sample_joint_jump_pairs(reference, 1e-3, 10, seed=0)


class TestSingleSampler:
    def test_deterministic_and_supported(self, reference):
        a = sample_single_jumps(reference, 1e-3, 400, seed=7)
        b = sample_single_jumps(reference, 1e-3, 400, seed=7)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (400,)
        assert np.all(a >= 1e-3)

    def test_empirical_survival_matches_single_law(self, reference, reference_config):
        n = 100_000
        eps = reference_config.epsilon
        z = sample_single_jumps(reference, eps, n, seed=3, component=1)
        rates = intensities(reference, reference_config)

        def survival(z0):
            lam = marginal_tail(1, z0, reference)
            return (lam - clayton(lam, rates.lambda2, reference.delta)) / rates.lambda1_single

        for z0 in (2 * eps, 10 * eps):
            p = survival(z0)
            emp = np.mean(z >= z0)
            assert abs(emp - p) < binomial_band(p, n)

    def test_second_component_symmetric_under_common_margins(self, reference):
        z1 = sample_single_jumps(reference, 1e-3, 5000, seed=9, component=1)
        z2 = sample_single_jumps(reference, 1e-3, 5000, seed=9, component=2)
        # same parameters in both margins: identical law, different draws are fine
        assert np.all(z2 >= 1e-3)
        assert abs(np.mean(np.log(z1)) - np.mean(np.log(z2))) < 0.2

    def test_edge_counts(self, reference):
        assert sample_single_jumps(reference, 1e-3, 0).size == 0
        with pytest.raises(ValueError):
            sample_single_jumps(reference, 1e-3, -1)
        with pytest.raises(ValueError):
            sample_single_jumps(reference, -1.0, 5)


class TestSimulatePath:
    CONFIG = SimulationConfig(tau=400.0, t=2.0, seed=21)

    def test_deterministic_and_valid(self, reference):
        s1 = simulate_path(reference, self.CONFIG)
        s2 = simulate_path(reference, self.CONFIG)
        np.testing.assert_array_equal(s1.times, s2.times)
        np.testing.assert_array_equal(s1.x, s2.x)
        np.testing.assert_array_equal(s1.y, s2.y)
        s1.validate()
        assert np.all(s1.times > 0.0) and np.all(s1.times <= self.CONFIG.t)
        assert np.all(s1.x >= s1.xi)

    def test_jump_count_near_target_intensity(self, reference):
        mean = self.CONFIG.tau * self.CONFIG.t
        stream = simulate_path(reference, self.CONFIG)
        assert abs(len(stream) - mean) < 5.0 * math.sqrt(mean)

    def test_first_component_tail_is_pareto_above_cutoff(self, reference):
        stream = simulate_path(reference, SimulationConfig(tau=3000.0, t=4.0, seed=4))
        n = len(stream)
        for q in (2.0, 8.0):
            p = q**-reference.alpha
            emp = np.mean(stream.x >= q * stream.xi)
            assert abs(emp - p) < binomial_band(p, n)

    def test_partner_share_matches_copula(self, reference):
        # fraction of kept jumps whose second component also clears the cutoff
        stream = simulate_path(reference, SimulationConfig(tau=3000.0, t=4.0, seed=4))
        p = 2.0 ** (-1.0 / reference.delta)
        emp = np.mean(stream.y >= stream.xi)
        assert abs(emp - p) < binomial_band(p, len(stream))

    def test_symmetrize_adds_reverse_only_records(self, reference):
        one_sided = simulate_path(reference, SimulationConfig(tau=500.0, t=2.0, seed=6))
        both = simulate_path(
            reference, SimulationConfig(tau=500.0, t=2.0, seed=6, symmetrize=True)
        )
        both.validate()
        assert set(one_sided.records) <= set(both.records)
        extra = set(both.records) - set(one_sided.records)
        assert extra, "symmetrized stream should pick up reverse-stream jumps"
        for _, x, y in extra:
            assert x < one_sided.xi and y >= both.xi

    def test_validate_rejects_malformed_streams(self):
        good = dict(xi=0.1, t=1.0, seed=0)
        stream = JumpStream(
            times=np.array([0.5, 0.4]), x=np.array([1.0, 1.0]), y=np.array([0.0, 0.0]), **good
        )
        with pytest.raises(ValueError, match="increasing"):
            stream.validate()
        stream = JumpStream(
            times=np.array([0.4, 0.5]), x=np.array([1.0, 0.01]), y=np.array([0.0, 0.01]), **good
        )
        with pytest.raises(ValueError, match="cutoff"):
            stream.validate()
        stream = JumpStream(
            times=np.array([0.4]), x=np.array([0.0]), y=np.array([0.0]), xi=0.0, t=1.0, seed=0
        )
        with pytest.raises(ValueError, match="no jump"):
            stream.validate()


class TestStreamSerialization:
    def test_json_roundtrip(self, reference, tmp_path):
        stream = simulate_path(reference, SimulationConfig(tau=50.0, t=1.0, seed=3))
        text = stream.to_json()
        back = JumpStream.from_json(text)
        np.testing.assert_array_equal(back.times, stream.times)
        np.testing.assert_array_equal(back.x, stream.x)
        np.testing.assert_array_equal(back.y, stream.y)
        assert (back.xi, back.t, back.seed) == (stream.xi, stream.t, stream.seed)

        path = tmp_path / "stream.json"
        stream.to_json(str(path))
        from_file = JumpStream.from_json(str(path))
        np.testing.assert_array_equal(from_file.x, stream.x)

    def test_csv_shape(self, reference, tmp_path):
        stream = simulate_path(reference, SimulationConfig(tau=50.0, t=1.0, seed=3))
        text = stream.to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "time,x,y"
        assert len(lines) == len(stream) + 1
        path = tmp_path / "stream.csv"
        stream.to_csv(str(path))
        assert path.read_text() == text

    def test_empty_stream_roundtrip(self):
        empty = JumpStream(
            times=np.empty(0), x=np.empty(0), y=np.empty(0), xi=0.1, t=1.0, seed=0
        )
        back = JumpStream.from_json(empty.to_json())
        assert len(back) == 0
