import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsfractal.errors import InvalidInputError
from nsfractal.metric import (
    CompactSet,
    decimate_points,
    directed_distance,
    hausdorff_distance,
    metric_distance,
    read_points_csv,
    sample_box,
    sample_interval,
    write_points_csv,
)


def brute_directed(a_pts, b_pts):
    """Independent O(n*m) double-loop oracle, no numpy in the hot path."""
    rows_a = [tuple(r) for r in a_pts.tolist()]
    rows_b = [tuple(r) for r in b_pts.tolist()]
    return max(min(math.dist(p, q) for q in rows_b) for p in rows_a)


class TestMetricDistance:
    def test_interval_endpoints(self):
        assert metric_distance([0.0], [22.0]) == 22.0

    def test_identity(self):
        assert metric_distance([3.0, 4.0], [3.0, 4.0]) == 0.0

    def test_pythagorean(self):
        assert metric_distance([0.0, 0.0], [3.0, 4.0]) == 5.0

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            p, q = rng.uniform(-5, 5, size=(2, 2))
            assert metric_distance(p, q) == metric_distance(q, p)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            metric_distance([0.0], [1.0, 2.0])

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInputError):
            metric_distance([np.nan], [0.0])


class TestCompactSet:
    def test_nonempty_required(self):
        with pytest.raises(InvalidInputError):
            CompactSet(np.empty((0, 1)))

    def test_dims_limited(self):
        with pytest.raises(InvalidInputError):
            CompactSet(np.zeros((3, 3)))

    def test_dedup_keeps_first(self):
        s = CompactSet([[0.0], [1.0], [0.0 + 1e-13], [2.0]])
        assert len(s) == 3
        assert s.points[0, 0] == 0.0

    def test_min_pairwise_distance_after_dedup(self):
        rng = np.random.default_rng(1)
        pts = rng.uniform(0, 1, size=(50, 2))
        pts = np.vstack([pts, pts + 1e-13])  # near-duplicates of everything
        s = CompactSet(pts)
        assert len(s) == 50
        d = np.sqrt(((s.points[:, None] - s.points[None]) ** 2).sum(-1))
        np.fill_diagonal(d, np.inf)
        assert d.min() > 1e-12


class TestDirectedAndHausdorff:
    def test_separated_intervals(self):
        A = sample_interval(0.0, 20.0, 0.01)
        B = sample_interval(22.0, 31.0, 0.01)
        assert abs(directed_distance(A, B) - 22.0) <= 0.02
        assert abs(directed_distance(B, A) - 11.0) <= 0.02
        assert abs(hausdorff_distance(A, B) - 22.0) <= 0.02

    def test_closure_invariant_example(self):
        pitch = 0.01
        A = sample_interval(0.0, 1.0, pitch)
        B = sample_interval(-1.0, 0.0, pitch)
        assert abs(hausdorff_distance(A, B) - 1.0) <= pitch

    def test_directed_self_zero(self):
        A = sample_interval(0.0, 1.0, 0.1)
        assert directed_distance(A, A) == 0.0
        assert hausdorff_distance(A, A) == 0.0

    def test_symmetry_exact(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            A = CompactSet(rng.uniform(-1, 1, size=(rng.integers(1, 30), 2)))
            B = CompactSet(rng.uniform(-1, 1, size=(rng.integers(1, 30), 2)))
            assert hausdorff_distance(A, B) == hausdorff_distance(B, A)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            A, B, C = (
                CompactSet(rng.uniform(-2, 2, size=(rng.integers(1, 25), 2)))
                for _ in range(3)
            )
            assert hausdorff_distance(A, C) <= (
                hausdorff_distance(A, B) + hausdorff_distance(B, C) + 1e-12
            )

    def test_zero_implies_equal_sets(self):
        rng = np.random.default_rng(4)
        pts = rng.uniform(0, 1, size=(20, 2))
        A = CompactSet(pts)
        B = CompactSet(pts[::-1].copy())
        assert hausdorff_distance(A, B) == 0.0
        assert A.same_points(B)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            hausdorff_distance(CompactSet([[0.0]]), CompactSet([[0.0, 0.0]]))

    def test_bruteforce_oracle_agreement(self):
        # independent double-loop oracle vs the vectorised sweep
        rng = np.random.default_rng(5)
        for _ in range(100):
            na, nb = rng.integers(1, 201, size=2)
            d = int(rng.integers(1, 3))
            A = CompactSet(rng.uniform(-10, 10, size=(na, d)))
            B = CompactSet(rng.uniform(-10, 10, size=(nb, d)))
            assert abs(directed_distance(A, B) - brute_directed(A.points, B.points)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-100, 100), min_size=1, max_size=20),
    st.lists(st.floats(-100, 100), min_size=1, max_size=20),
)
def test_hausdorff_symmetry_property(xs, ys):
    A = CompactSet(np.asarray(xs)[:, None])
    B = CompactSet(np.asarray(ys)[:, None])
    assert hausdorff_distance(A, B) == hausdorff_distance(B, A)
    assert hausdorff_distance(A, A) == 0.0


class TestSamplingAndDecimation:
    def test_interval_endpoints_exact(self):
        s = sample_interval(0.0, 20.0, 0.01)
        assert len(s) == 2001
        assert s.points[0, 0] == 0.0 and s.points[-1, 0] == 20.0

    def test_box_grid(self):
        s = sample_box([0.0, 0.0], [1.0, 2.0], 0.5)
        assert s.dim == 2
        assert len(s) == 3 * 5

    def test_decimation_error_bound(self):
        rng = np.random.default_rng(6)
        pts = rng.uniform(0, 1, size=(200, 2))
        pitch = 0.01
        dec = decimate_points(pts, pitch)
        A = CompactSet(pts)
        B = CompactSet._trusted(dec, pitch)
        assert hausdorff_distance(A, B) <= pitch * math.sqrt(2) / 2 + 1e-15

    def test_decimation_snaps_to_grid(self):
        dec = decimate_points(np.array([[0.123], [0.126]]), 0.01)
        assert np.allclose(dec.ravel(), [0.12, 0.13])

    def test_bad_pitch(self):
        with pytest.raises(InvalidInputError):
            decimate_points(np.array([[0.0]]), 0.0)


class TestCsvRoundTrip:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        cloud = CompactSet(rng.uniform(-1, 1, size=(37, 2)), resolution=0.25)
        path = tmp_path / "cloud.csv"
        write_points_csv(path, cloud)
        back = read_points_csv(path)
        assert np.array_equal(back.points, cloud.points)
        assert back.resolution == cloud.resolution

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("# a comment\n\n0.5,0.25\n# another\n1.0,2.0\n")
        s = read_points_csv(path)
        assert len(s) == 2 and s.dim == 2

    def test_significant_digits(self, tmp_path):
        x = 1.0 / 3.0
        path = tmp_path / "pi.csv"
        write_points_csv(path, CompactSet([[x]]))
        assert read_points_csv(path).points[0, 0] == x

    def test_bad_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.5,oops\n")
        with pytest.raises(InvalidInputError):
            read_points_csv(path)
