import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hierclust.errors import (
    AsymmetricMatrix,
    EmptyCluster,
    GroundSetMismatch,
    MetricError,
    NonpositiveFactor,
    NonpositiveOffDiagonal,
    NonzeroDiagonal,
    TriangleViolation,
)
from hierclust.generators import line_metric
from hierclust.metric import (
    Clustering,
    CostKind,
    FiniteMetricSpace,
    cluster_center,
    cluster_cost,
    clustering_cost,
    load_space,
    save_space,
    scale_metric,
    space_from_dict,
    space_to_dict,
    validate_metric,
)

from conftest import small_metrics

KINDS = list(CostKind)


class TestValidate:
    def test_single_point(self):
        space = validate_metric([[0]])
        assert space.n == 1

    def test_line_metric_is_valid(self):
        x = np.arange(4)
        assert validate_metric(np.abs(x[:, None] - x[None, :])).n == 4

    def test_triangle_violation_reports_triple(self):
        d = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
        with pytest.raises(TriangleViolation) as exc:
            validate_metric(d)
        assert exc.value.triple == (0, 1, 2)

    def test_asymmetric(self):
        with pytest.raises(AsymmetricMatrix):
            validate_metric([[0, 1], [2, 0]])

    def test_nonzero_diagonal(self):
        with pytest.raises(NonzeroDiagonal):
            validate_metric([[1, 1], [1, 0]])

    def test_nonpositive_off_diagonal(self):
        with pytest.raises(NonpositiveOffDiagonal):
            validate_metric([[0, 0], [0, 0]])

    def test_check_order_asymmetry_before_triangle(self):
        with pytest.raises(AsymmetricMatrix):
            validate_metric([[0, 1, 5], [1, 0, 1], [4, 1, 0]])

    @pytest.mark.parametrize("bad", [[[0, 1]], [[0, np.inf], [np.inf, 0]], [[0, np.nan], [np.nan, 0]]])
    def test_shape_and_finiteness(self, bad):
        with pytest.raises(MetricError):
            validate_metric(bad)

    def test_tolerance_absorbs_rounding(self):
        d = np.array([[0, 1, 2 + 5e-10], [1, 0, 1], [2 + 5e-10, 1, 0]])
        assert validate_metric(d).n == 3

    def test_candidate_joint_triangle(self):
        d = np.abs(np.subtract.outer(np.arange(3.0), np.arange(3.0)))
        ok = validate_metric(d, [[1, 0.5, 1]])
        assert ok.has_candidates
        with pytest.raises(TriangleViolation):
            validate_metric(d, [[0.1, 0.1, 0.1]])  # d(0,2)=2 > 0.1 + 0.1
        with pytest.raises(TriangleViolation):
            validate_metric(d, [[0, 5, 0]])  # c(1)=5 > d(1,0) + c(0)

    def test_candidate_rows_must_be_nonnegative(self):
        with pytest.raises(MetricError):
            validate_metric([[0, 1], [1, 0]], [[-1, 1]])

    def test_arrays_are_read_only(self, line4):
        with pytest.raises(ValueError):
            line4.dist[0, 1] = 7


class TestCostKind:
    @pytest.mark.parametrize("alias,kind", [("diam", CostKind.DIAMETER), ("rad", CostKind.RADIUS),
                                            ("drad", CostKind.DISCRETE_RADIUS),
                                            ("discrete_radius", CostKind.DISCRETE_RADIUS)])
    def test_parse(self, alias, kind):
        assert CostKind.parse(alias) is kind
        assert CostKind.parse(kind.short) is kind

    def test_unknown(self):
        with pytest.raises(ValueError):
            CostKind.parse("median")


class TestClustering:
    def test_canonical_order(self):
        c = Clustering([[3, 2], [1], [0]])
        assert c.blocks == ((0,), (1,), (2, 3))

    def test_empty_block(self):
        with pytest.raises(EmptyCluster):
            Clustering([[0], []], 1)

    def test_not_a_partition(self):
        with pytest.raises(GroundSetMismatch):
            Clustering([[0, 1], [1, 2]])
        with pytest.raises(GroundSetMismatch):
            Clustering([[0, 2]], 3)

    def test_labels_roundtrip(self):
        c = Clustering([[0, 3], [1, 2], [4]])
        assert Clustering.from_labels(c.labels()) == c


class TestCosts:
    @pytest.mark.parametrize("kind", KINDS)
    def test_singleton_costs_zero(self, line4, kind):
        assert cluster_cost(line4, [2], kind) == 0

    def test_line_whole(self, line4):
        assert cluster_cost(line4, range(4), "diam") == 3
        assert cluster_cost(line4, range(4), "drad") == 2
        assert cluster_center(line4, range(4), "drad") == (2.0, 1)

    def test_radius_of_whole_space_equals_discrete(self, line4):
        assert cluster_cost(line4, range(4), "rad") == cluster_cost(line4, range(4), "drad")

    def test_radius_uses_any_point_as_center(self, line4):
        # {0, 2}: the point 1 outside the cluster is a better center
        assert cluster_cost(line4, [0, 2], "rad") == 1
        assert cluster_cost(line4, [0, 2], "drad") == 2

    def test_steiner_candidate_halves_radius(self):
        space = validate_metric([[0, 1], [1, 0]], [[0.5, 0.5]])
        assert cluster_cost(space, [0, 1], "rad") == 0.5
        assert cluster_cost(space, [0, 1], "diam") == 1
        assert cluster_center(space, [0, 1], "rad") == (0.5, 2)

    def test_empty_cluster(self, line4):
        with pytest.raises(EmptyCluster):
            cluster_cost(line4, [], "diam")

    def test_out_of_range(self, line4):
        with pytest.raises(IndexError):
            cluster_cost(line4, [0, 9], "diam")

    @pytest.mark.parametrize("blocks,want", [([[0, 1], [2, 3]], 1), ([[0, 3], [1], [2]], 3)])
    def test_clustering_cost_examples(self, line4, blocks, want):
        assert clustering_cost(line4, Clustering(blocks), "diam") == want

    @pytest.mark.parametrize("kind", KINDS)
    def test_singletons_cost_zero(self, line4, kind):
        assert clustering_cost(line4, Clustering.singletons(4), kind) == 0


class TestScale:
    def test_identity(self, line4):
        assert scale_metric(line4, 1) == line4

    def test_linear(self, line4):
        assert scale_metric(line4, 3).dist[0, 1] == 3

    def test_min_distance_precondition(self):
        space = validate_metric([[0, 0.5], [0.5, 0]])
        assert scale_metric(space, 5).min_distance() == 2.5

    @pytest.mark.parametrize("factor", [0, -1])
    def test_nonpositive(self, line4, factor):
        with pytest.raises(NonpositiveFactor):
            scale_metric(line4, factor)


@given(small_metrics(min_n=1, max_n=7, integer=False), st.data())
def test_cost_sandwich(space, data):
    block = data.draw(st.sets(st.integers(0, space.n - 1), min_size=1))
    diam = cluster_cost(space, block, "diam")
    rad = cluster_cost(space, block, "rad")
    drad = cluster_cost(space, block, "drad")
    assert diam / 2 - 1e-9 <= rad <= drad + 1e-9
    assert drad <= diam + 1e-9


@given(small_metrics(min_n=2, max_n=7, integer=False), st.data())
def test_diameter_and_radius_monotone_under_inclusion(space, data):
    big = data.draw(st.sets(st.integers(0, space.n - 1), min_size=2))
    small = data.draw(st.sets(st.sampled_from(sorted(big)), min_size=1))
    for kind in ("diam", "rad"):
        assert cluster_cost(space, small, kind) <= cluster_cost(space, big, kind) + 1e-9


def test_discrete_radius_is_not_monotone():
    # dropping the only central point raises the discrete radius
    space = line_metric(3)
    assert cluster_cost(space, [0, 1, 2], "drad") == 1
    assert cluster_cost(space, [0, 2], "drad") == 2


@given(small_metrics(min_n=1, max_n=6, integer=False), st.floats(0.1, 10))
def test_scaling_multiplies_costs(space, factor):
    scaled = scale_metric(space, factor)
    block = list(range(space.n))
    for kind in KINDS:
        assert cluster_cost(scaled, block, kind) == pytest.approx(factor * cluster_cost(space, block, kind))


class TestIO:
    def test_roundtrip(self, tmp_path):
        space = validate_metric([[0, 1], [1, 0]], [[0.5, 0.5]], ["a", "b"], ["hub"])
        path = tmp_path / "s.json"
        save_space(space, path, {"meta": {"seed": 1}})
        back = load_space(path)
        assert back == space
        assert back.labels == ["a", "b"] and back.center_labels == ["hub"]
        assert json.loads(path.read_text())["meta"] == {"seed": 1}

    def test_dict_without_candidates(self, line4):
        data = space_to_dict(line4)
        assert data["centers"] is None
        assert space_from_dict(data) == line4

    def test_load_validates(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"matrix": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}))
        with pytest.raises(TriangleViolation):
            load_space(path)


def test_space_equality_ignores_labels():
    a = FiniteMetricSpace([[0, 1], [1, 0]], labels=["x", "y"])
    b = FiniteMetricSpace([[0, 1], [1, 0]])
    assert a == b
