import numpy as np
import pytest

from assistlearn.data import (
    ClassSpec,
    GaussianMixtureSpec,
    PartitionSpec,
    generate_gaussian,
    load_csv,
    partition,
    round_half_up,
    split_by_class_fraction,
)

from conftest import make_two_gaussian_data


def sorted_rows(dataset):
    rows = np.hstack([dataset.features, dataset.labels[:, None].astype(float)])
    return rows[np.lexsort(rows.T)]


def assert_union_is_input(data, learner, provider):
    combined = np.vstack([sorted_rows(learner), sorted_rows(provider)])
    np.testing.assert_array_equal(
        combined[np.lexsort(combined.T)], sorted_rows(data)
    )


class TestRounding:
    @pytest.mark.parametrize(
        "value,expected", [(25.5, 26), (25.4, 25), (0.5, 1), (2.0, 2), (-0.5, 0)]
    )
    def test_round_half_up(self, value, expected):
        assert round_half_up(value) == expected


class TestGenerate:
    def test_counts_and_determinism(self):
        data = make_two_gaussian_data(50, seed=3)
        assert data.n == 100
        assert np.sum(data.labels == 0) == 50
        assert np.sum(data.labels == 1) == 50
        again = make_two_gaussian_data(50, seed=3)
        np.testing.assert_array_equal(data.features, again.features)

    def test_zero_count_class_contributes_nothing(self):
        spec = GaussianMixtureSpec(
            (ClassSpec((0.0,), 1.0, 5), ClassSpec((3.0,), 1.0, 0)), seed=0
        )
        data = generate_gaussian(spec)
        assert data.n == 5
        assert np.all(data.labels == 0)

    def test_sample_mean_law_of_large_numbers(self):
        sigma = 1.5
        spec = GaussianMixtureSpec((ClassSpec((-1.0, 1.0), sigma, 10_000),), seed=11)
        data = generate_gaussian(spec)
        np.testing.assert_allclose(
            data.features.mean(axis=0), [-1.0, 1.0], atol=3 * sigma / 100
        )

    def test_invalid_class_spec(self):
        with pytest.raises(ValueError):
            ClassSpec((0.0,), sigma=0.0, count=3)
        with pytest.raises(ValueError):
            GaussianMixtureSpec((ClassSpec((0.0,), 1.0, 1), ClassSpec((0.0, 1.0), 1.0, 1)))


class TestSplitByClassFraction:
    def test_ninety_ten_split(self):
        data = make_two_gaussian_data(50, seed=5)
        learner, provider = split_by_class_fraction(data, {0: 0.9, 1: 0.1}, seed=1)
        assert np.sum(learner.labels == 0) == 45
        assert np.sum(learner.labels == 1) == 5
        assert np.sum(provider.labels == 0) == 5
        assert np.sum(provider.labels == 1) == 45
        assert_union_is_input(data, learner, provider)

    def test_full_fraction_empties_provider(self):
        data = make_two_gaussian_data(10, seed=2)
        learner, provider = split_by_class_fraction(data, {0: 1.0, 1: 1.0}, seed=0)
        assert provider.n == 0
        assert learner.n == data.n

    def test_half_fraction_rounds_up_on_odd_counts(self):
        spec = GaussianMixtureSpec((ClassSpec((0.0,), 1.0, 51),), seed=9)
        data = generate_gaussian(spec)
        learner, _ = split_by_class_fraction(data, {0: 0.5}, seed=0)
        assert learner.n == 26

    def test_fraction_out_of_range(self):
        data = make_two_gaussian_data(5, seed=1)
        with pytest.raises(ValueError):
            split_by_class_fraction(data, {0: 1.5}, seed=0)


class TestPartition:
    def test_rho_one_ninth_sizes(self):
        spec = GaussianMixtureSpec(
            tuple(ClassSpec((float(k),), 1.0, 5000) for k in range(10)), seed=4
        )
        data = generate_gaussian(spec)  # N = 50000
        learner, provider = partition(data, PartitionSpec(rho=1 / 9, gamma_l=0.1, seed=0))
        assert learner.n == 5000
        assert provider.n == 45000
        assert_union_is_input(data, learner, provider)

    def test_gamma_one_gives_pure_primary_learner(self):
        spec = GaussianMixtureSpec(
            tuple(ClassSpec((float(k),), 1.0, 100) for k in range(4)), seed=4
        )
        data = generate_gaussian(spec)
        learner, provider = partition(
            data, PartitionSpec(rho=1 / 3, gamma_l=1.0, primary_class=2, seed=3)
        )
        assert np.all(learner.labels == 2)
        assert learner.n == 100
        assert_union_is_input(data, learner, provider)

    def test_uniform_gamma_gives_uniform_learner_histogram(self):
        spec = GaussianMixtureSpec(
            tuple(ClassSpec((float(k),), 1.0, 200) for k in range(10)), seed=8
        )
        data = generate_gaussian(spec)
        learner, _ = partition(data, PartitionSpec(rho=1 / 9, gamma_l=0.1, seed=5))
        counts = np.bincount(learner.labels, minlength=10)
        assert learner.n == 200
        # 0.1 of 10 classes is the uniform share: exact up to quota rounding
        assert counts.max() - counts.min() <= 1

    def test_insufficient_primary_records(self):
        spec = GaussianMixtureSpec(
            (ClassSpec((0.0,), 1.0, 10), ClassSpec((1.0,), 1.0, 1000)), seed=0
        )
        data = generate_gaussian(spec)
        with pytest.raises(ValueError, match="primary"):
            partition(data, PartitionSpec(rho=1.0, gamma_l=1.0, primary_class=0, seed=0))

    def test_deterministic_per_seed(self):
        data = make_two_gaussian_data(100, seed=6)
        first = partition(data, PartitionSpec(rho=0.5, gamma_l=0.7, seed=12))
        second = partition(data, PartitionSpec(rho=0.5, gamma_l=0.7, seed=12))
        np.testing.assert_array_equal(first[0].features, second[0].features)
        third = partition(data, PartitionSpec(rho=0.5, gamma_l=0.7, seed=13))
        assert not np.array_equal(first[0].features, third[0].features)


class TestLoadCsv:
    def write(self, tmp_path, text):
        path = tmp_path / "data.csv"
        path.write_text(text, encoding="utf-8")
        return path

    def test_basic_file(self, tmp_path):
        path = self.write(tmp_path, "x1,x2,label\n1.0,2.0,0\n3.0,4.0,1\n5.5,-1.5,0\n")
        data = load_csv(path)
        assert data.n == 3
        assert data.dim == 2
        np.testing.assert_array_equal(data.labels, [0, 1, 0])
        np.testing.assert_allclose(data.features[2], [5.5, -1.5])

    def test_label_column_position_independent(self, tmp_path):
        path = self.write(tmp_path, "label,x1\n1,9.0\n")
        data = load_csv(path)
        assert data.labels[0] == 1
        assert data.features[0, 0] == 9.0

    def test_empty_data_section(self, tmp_path):
        data = load_csv(self.write(tmp_path, "x1,x2,label\n"))
        assert data.n == 0
        assert data.dim == 2

    def test_non_numeric_cell_names_row_and_column(self, tmp_path):
        path = self.write(tmp_path, "x1,x2,label\n1.0,2.0,0\noops,4.0,1\n")
        with pytest.raises(ValueError, match=r"row 2.*'x1'"):
            load_csv(path)

    def test_missing_label_column(self, tmp_path):
        with pytest.raises(ValueError, match="label"):
            load_csv(self.write(tmp_path, "x1,x2\n1.0,2.0\n"))

    def test_bad_label_value(self, tmp_path):
        with pytest.raises(ValueError, match=r"row 1.*label"):
            load_csv(self.write(tmp_path, "x1,label\n1.0,zero\n"))
