import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regvol.datagen import (
    DatasetSpec,
    add_intercept,
    coordinate_counts,
    gen_gaussian,
    gen_lower_bound,
    generate,
    load_csv,
    load_libsvm,
    standardize,
    write_csv,
)
from regvol.errors import ArityMismatch, DivisibilityError, EmptyDataset, NonMonotoneIndex, ParseError
from regvol.ridge import RegressionProblem, statistical_dimension, statistical_dimension_eig


@pytest.fixture
def write(tmp_path):
    def _write(text, name="data.txt"):
        path = tmp_path / name
        path.write_bytes(text.encode("utf-8"))
        return path
    return _write


class TestCsv:
    def test_basic(self, write):
        p = load_csv(write("1,2\n3,4\n"))
        np.testing.assert_array_equal(p.X, [[1.0, 3.0]])
        np.testing.assert_array_equal(p.y, [2.0, 4.0])
        assert p.w_star is None and p.sigma is None

    def test_header(self, write):
        p = load_csv(write("a,b\n1,2\n3,4\n"), header=True)
        assert p.n == 2

    def test_crlf_and_label_column(self, write):
        p = load_csv(write("5,1,2\r\n6,3,4\r\n"), label_col=0)
        np.testing.assert_array_equal(p.y, [5.0, 6.0])
        np.testing.assert_array_equal(p.X, [[1.0, 3.0], [2.0, 4.0]])

    def test_parse_error_location(self, write):
        with pytest.raises(ParseError) as exc:
            load_csv(write("1,abc\n"))
        assert (exc.value.row, exc.value.col) == (1, 2)
        assert "row 1 col 2" in str(exc.value)

    def test_arity(self, write):
        with pytest.raises(ArityMismatch):
            load_csv(write("1,2\n3,4,5\n"))

    def test_empty(self, write):
        with pytest.raises(EmptyDataset):
            load_csv(write("a,b\n"), header=True)

    def test_nonfinite(self, write):
        with pytest.raises(ParseError):
            load_csv(write("1,nan\n"))

    @given(st.integers(1, 4), st.integers(1, 10), st.integers(0, 10**6))
    @settings(max_examples=30, deadline=None)
    def test_round_trip(self, tmp_path_factory, d, n, seed):
        rng = np.random.default_rng(seed)
        p = RegressionProblem(rng.standard_normal((d, n)) * 1e3 ** rng.standard_normal((d, n)),
                              rng.standard_normal(n))
        path = tmp_path_factory.mktemp("rt") / "p.csv"
        write_csv(path, p)
        q = load_csv(path)
        np.testing.assert_array_equal(q.X, p.X)
        np.testing.assert_array_equal(q.y, p.y)


class TestLibsvm:
    def test_basic(self, write):
        p = load_libsvm(write("2.5 1:1 3:4\n"))
        np.testing.assert_array_equal(p.y, [2.5])
        np.testing.assert_array_equal(p.X[:, 0], [1.0, 0.0, 4.0])

    def test_empty_features(self, write):
        p = load_libsvm(write("1.0\n2.0 2:3\n"))
        np.testing.assert_array_equal(p.X[:, 0], [0.0, 0.0])

    def test_non_monotone(self, write):
        with pytest.raises(NonMonotoneIndex):
            load_libsvm(write("1.0 3:1 2:5\n"))

    def test_bad_token(self, write):
        with pytest.raises(ParseError) as exc:
            load_libsvm(write("1.0 1:2\n2.0 x\n"))
        assert exc.value.row == 2

    def test_empty(self, write):
        with pytest.raises(EmptyDataset):
            load_libsvm(write("\n\n"))


class TestGaussian:
    def test_flat_profile_dimension(self):
        p = gen_gaussian(DatasetSpec(d=5, n=5000, seed=1))
        expect = sum(5000 / (5000 + 1) for _ in range(5))
        assert statistical_dimension(p.X, 1.0) == pytest.approx(expect, rel=0.05)

    def test_noiseless(self):
        p = gen_gaussian(DatasetSpec(d=3, n=20, sigma=0.0, seed=2))
        np.testing.assert_array_equal(p.y, p.X.T @ p.w_star)

    def test_deterministic(self):
        a = gen_gaussian(DatasetSpec(d=3, n=20, seed=3))
        b = gen_gaussian(DatasetSpec(d=3, n=20, seed=3))
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)

    def test_profile_and_norm(self):
        p = gen_gaussian(DatasetSpec(d=3, n=20_000, profile=(4.0, 1.0, 0.25), w_norm=2.0, seed=4))
        ev = np.linalg.eigvalsh(p.X @ p.X.T / p.n)[::-1]
        np.testing.assert_allclose(ev, [4.0, 1.0, 0.25], rtol=0.05)
        assert np.linalg.norm(p.w_star) == pytest.approx(2.0)

    def test_bad_profile(self):
        with pytest.raises(ValueError):
            DatasetSpec(d=2, profile=(1.0, 0.0))


class TestLowerBound:
    def test_layout(self):
        p = gen_lower_bound(2, 4, 1.0, 1.0)
        np.testing.assert_array_equal(p.X, [[1, 0, 1, 0], [0, 1, 0, 1]])

    def test_zero_signal(self):
        np.testing.assert_array_equal(gen_lower_bound(3, 6, 0.0, 1.0).w_star, 0.0)

    def test_divisibility(self):
        with pytest.raises(DivisibilityError):
            gen_lower_bound(3, 7, 1.0, 1.0)
        with pytest.raises(DivisibilityError):
            DatasetSpec(kind="identity-blocks", d=3, n=7)

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_dimension_lower_bound(self, sigma):
        # the construction takes n >= ceil(sigma^2) d (d - 1)
        d = 5
        n = int(np.ceil(sigma ** 2)) * d * (d - 1)
        p = gen_lower_bound(d, n, 1.0, sigma)
        for lam in (0.1 * sigma ** 2, sigma ** 2):
            assert statistical_dimension_eig(p.X, lam) >= d - 1

    @given(st.integers(1, 5), st.integers(1, 6), st.data())
    @settings(max_examples=50, deadline=None)
    def test_counts_sum_to_size(self, d, blocks, data):
        n = d * blocks
        S = data.draw(st.lists(st.integers(0, n - 1), unique=True))
        counts = coordinate_counts(S, d)
        assert counts.sum() == len(S)
        p = gen_lower_bound(d, n, 1.0, 1.0)
        np.testing.assert_array_equal(p.X[:, S].sum(axis=1), counts)


def test_generate_dispatch():
    p = generate(DatasetSpec(kind="identity-blocks", d=2, n=6, a=2.0, sigma=0.5))
    np.testing.assert_array_equal(p.w_star, [1.0, 1.0])


def test_preprocessing():
    p = RegressionProblem(np.array([[1.0, 2.0, 3.0], [5.0, 5.0, 5.0]]), np.zeros(3))
    q = standardize(p)
    np.testing.assert_allclose(q.X.mean(axis=1), 0.0, atol=1e-15)
    np.testing.assert_allclose(q.X[0].std(), 1.0)
    np.testing.assert_array_equal(q.X[1], 0.0)
    r = add_intercept(p)
    assert r.d == 3
    np.testing.assert_array_equal(r.X[2], 1.0)
