"""Truncation, dataset bookkeeping and count-moment checks."""

import numpy as np
import pytest

from claysub.model import ModelParams, TruncationConfig, intensities
from claysub.observe import (
    TruncatedDataset,
    count_moments,
    sample_truncated_dataset,
    simulate_counts,
    truncate,
)
from claysub.simulate import JumpStream, SimulationConfig, simulate_path

# closed-form targets at (c, alpha, delta) = (1, 0.5, 2), epsilon = 1e-3, t = 1:
# E[n * n_joint] = 2 * lambda_joint * t * (1 + lambda * t) and
# Cov(n, n_joint) = 2 * lambda_joint * t.
PRODUCT_MEAN = 1458.9349219230905
COUNT_COV = 44.721359549995789


def hand_stream():
    # one jump per classification case at threshold 0.5, plus boundary hits
    times = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    x = np.array([0.9, 0.7, 0.01, 0.5, 0.49999, 2.0])
    y = np.array([0.8, 0.02, 0.6, 0.5, 3.0, 0.0])
    return JumpStream(times=times, x=x, y=y, xi=0.01, t=1.0, seed=0)


class TestTruncate:
    def test_exact_classification_with_closed_threshold(self):
        data = truncate(hand_stream(), epsilon=0.5)
        # boundary jumps (== epsilon) are kept on the observed side
        np.testing.assert_array_equal(data.joint, [[0.9, 0.8], [0.5, 0.5]])
        np.testing.assert_array_equal(data.singles1, [0.7, 2.0])
        np.testing.assert_array_equal(data.singles2, [0.6, 3.0])
        assert (data.n_joint, data.n1_single, data.n2_single) == (2, 2, 2)
        data.validate()

    def test_horizon_defaults_to_stream_and_can_shrink(self):
        stream = hand_stream()
        full = truncate(stream, epsilon=0.5)
        assert full.t == stream.t
        early = truncate(stream, epsilon=0.5, t=0.25)
        assert early.t == 0.25
        assert early.n_joint == 1 and early.n1_single == 1 and early.n2_single == 0

    def test_threshold_below_cutoff_rejected(self):
        with pytest.raises(ValueError, match="cutoff"):
            truncate(hand_stream(), epsilon=0.001)

    def test_horizon_beyond_stream_rejected(self):
        with pytest.raises(ValueError, match="horizon"):
            truncate(hand_stream(), epsilon=0.5, t=2.0)

    def test_simulated_stream_roundtrip(self, reference):
        stream = simulate_path(reference, SimulationConfig(tau=800.0, t=1.0, seed=13))
        data = truncate(stream, epsilon=1e-3)
        data.validate()
        assert data.n_joint + data.n1_single + data.n2_single <= len(stream)
        assert data.n1 == data.n_joint + data.n1_single
        assert data.n == data.n1 + data.n2


class TestDataset:
    def sample(self):
        return TruncatedDataset(
            joint=[[1.0, 2.0], [3.0, 0.5]],
            singles1=[0.7, 0.9, 1.5],
            singles2=[0.6],
            epsilon=0.5,
            t=2.0,
        )

    def test_counts_and_views(self):
        data = self.sample()
        assert (data.n_joint, data.n1_single, data.n2_single) == (2, 3, 1)
        assert (data.n1, data.n2, data.n) == (5, 3, 8)
        np.testing.assert_array_equal(data.margin1, [1.0, 3.0, 0.7, 0.9, 1.5])
        np.testing.assert_array_equal(data.margin2, [2.0, 0.5, 0.6])
        np.testing.assert_array_equal(data.pooled, np.concatenate([data.margin1, data.margin2]))

    def test_validate_flags_sub_threshold_values(self):
        data = self.sample()
        data.validate()
        bad = TruncatedDataset(
            joint=[[1.0, 0.1]], singles1=[], singles2=[], epsilon=0.5, t=1.0
        )
        with pytest.raises(ValueError, match="joint"):
            bad.validate()
        bad = TruncatedDataset(
            joint=np.empty((0, 2)), singles1=[0.2], singles2=[], epsilon=0.5, t=1.0
        )
        with pytest.raises(ValueError, match="single"):
            bad.validate()

    def test_json_roundtrip(self, tmp_path):
        data = self.sample()
        back = TruncatedDataset.from_json(data.to_json())
        np.testing.assert_array_equal(back.joint, data.joint)
        np.testing.assert_array_equal(back.singles1, data.singles1)
        np.testing.assert_array_equal(back.singles2, data.singles2)
        assert (back.epsilon, back.t) == (data.epsilon, data.t)
        path = tmp_path / "data.json"
        data.to_json(str(path))
        assert TruncatedDataset.from_json(str(path)).n == data.n

    def test_csv_layout(self):
        text = self.sample().to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "kind,x,y"
        assert len(lines) == 7
        assert lines[1].startswith("joint,1.0,")
        assert lines[3] == "single1,0.7,"
        assert lines[6] == "single2,,0.6"

    def test_empty_dataset_is_consistent(self):
        data = TruncatedDataset(
            joint=np.empty((0, 2)), singles1=[], singles2=[], epsilon=0.5, t=1.0
        )
        data.validate()
        assert data.n == 0
        assert data.pooled.size == 0
        assert TruncatedDataset.from_json(data.to_json()).n == 0


class TestCounts:
    def test_simulate_counts_shape_and_determinism(self, reference, reference_config):
        a = simulate_counts(reference, reference_config, 50, seed=1)
        b = simulate_counts(reference, reference_config, 50, seed=1)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (50, 2)
        assert np.all(a[:, 0] >= 2 * a[:, 1])

    def test_count_moments_match_closed_form(self, reference, reference_config):
        reps = 4000
        counts = simulate_counts(reference, reference_config, reps, seed=2)
        product_mean, covariance = count_moments(counts)
        # Monte Carlo bands: ~5 sigma on each moment at this replicate count
        assert product_mean == pytest.approx(PRODUCT_MEAN, rel=0.02)
        assert covariance == pytest.approx(COUNT_COV, rel=0.15)

    def test_count_moments_accepts_datasets(self, reference):
        config = TruncationConfig(epsilon=1e-2, t=1.0)
        datasets = [sample_truncated_dataset(reference, config, seed=s) for s in range(40)]
        from_datasets = count_moments(datasets)
        from_pairs = count_moments([[ds.n, ds.n_joint] for ds in datasets])
        assert from_datasets == pytest.approx(from_pairs)

    def test_count_moments_needs_two(self):
        with pytest.raises(ValueError, match="two"):
            count_moments([[4, 1]])
        with pytest.raises(ValueError, match="replicate"):
            simulate_counts(
                ModelParams.common(1.0, 0.5, 2.0), TruncationConfig(1e-3, 1.0), 0
            )


class TestExactDatasetSampler:
    def test_deterministic_and_supported(self, reference, reference_config):
        a = sample_truncated_dataset(reference, reference_config, seed=4)
        b = sample_truncated_dataset(reference, reference_config, seed=4)
        np.testing.assert_array_equal(a.joint, b.joint)
        np.testing.assert_array_equal(a.singles1, b.singles1)
        a.validate()
        assert a.epsilon == reference_config.epsilon and a.t == reference_config.t

    def test_counts_near_closed_form_intensities(self, reference):
        config = TruncationConfig(epsilon=1e-3, t=30.0)
        data = sample_truncated_dataset(reference, config, seed=8)
        rates = intensities(reference, config)
        for observed, rate in [
            (data.n_joint, rates.lambda_joint),
            (data.n1_single, rates.lambda1_single),
            (data.n2_single, rates.lambda2_single),
        ]:
            mean = rate * config.t
            assert abs(observed - mean) < 5.0 * np.sqrt(mean)

    def test_distinct_seeds_differ(self, reference, reference_config):
        a = sample_truncated_dataset(reference, reference_config, seed=0)
        b = sample_truncated_dataset(reference, reference_config, seed=1)
        assert a.n != b.n or not np.array_equal(a.joint, b.joint)
