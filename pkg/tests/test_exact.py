import numpy as np
import pytest
from hypothesis import given, settings

from hierclust.errors import IncompleteProfile, InstanceTooLarge, KindMismatch
from hierclust.exact import (
    OptimalProfile,
    optimal_clustering,
    optimal_cost,
    optimal_profile,
    subset_costs,
)
from hierclust.generators import line_metric, repaired_metric, uniform_metric
from hierclust.metric import Clustering, CostKind, clustering_cost, validate_metric

from conftest import brute_force_optimum, small_metrics

KINDS = list(CostKind)


class TestLineMetric:
    def test_diameter_profile(self, line4):
        prof = optimal_profile(line4, "diam")
        assert prof.costs == (3, 1, 1, 0)

    @pytest.mark.parametrize("kind", ["rad", "drad"])
    def test_radius_profiles(self, line4, kind):
        assert optimal_profile(line4, kind).costs == (2, 1, 1, 0)

    def test_two_blocks(self, line4):
        assert optimal_cost(line4, 2, "diam") == 1
        assert optimal_clustering(line4, 2, "diam").blocks == ((0, 1), (2, 3))
        assert optimal_cost(line4, 2, "drad") == 1

    def test_three_block_witness_is_padded(self, line4):
        w = optimal_clustering(line4, 3, "diam")
        assert w.blocks == ((0, 1), (2,), (3,))

    def test_lexicographic_witness(self, line4):
        w = optimal_clustering(line4, 2, "drad")
        assert w.blocks == ((0,), (1, 2, 3))
        assert clustering_cost(line4, w, "drad") == 1

    def test_extremes(self, line4):
        assert optimal_clustering(line4, 1, "diam").blocks == ((0, 1, 2, 3),)
        assert optimal_clustering(line4, 4, "rad") == Clustering.singletons(4)


def test_single_point():
    space = validate_metric([[0]])
    assert optimal_profile(space, "diam").costs == (0,)


def test_two_points():
    space = validate_metric([[0, 5], [5, 0]])
    assert optimal_profile(space, "diam").costs == (5, 0)


def test_limit():
    space = uniform_metric(5)
    with pytest.raises(InstanceTooLarge):
        optimal_cost(space, 2, "diam", limit=4)


def test_k_out_of_range(line4):
    with pytest.raises(ValueError):
        optimal_cost(line4, 0, "diam")


def test_subset_table_cached(line4):
    assert subset_costs(line4, "diam") is subset_costs(line4, "diam")
    assert subset_costs(line4, "diam")[0b1001] == 3


def test_steiner_candidates_enter_radius():
    space = validate_metric([[0, 2], [2, 0]], [[1, 1]])
    assert optimal_profile(space, "rad").costs == (1, 0)
    assert optimal_profile(space, "drad").costs == (2, 0)


@settings(max_examples=25)
@given(small_metrics(min_n=1, max_n=7, integer=True))
def test_matches_brute_force(space):
    for kind in KINDS:
        prof = optimal_profile(space, kind)
        for k in range(1, space.n + 1):
            want = brute_force_optimum(space, k, kind)
            assert prof.cost(k) == pytest.approx(want, abs=1e-9)
            w = prof.witness(k)
            assert len(w) == k
            assert clustering_cost(space, w, kind) == pytest.approx(want, abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_matches_brute_force_at_nine_points(seed):
    space = repaired_metric(9, seed)
    prof = optimal_profile(space, "diam")
    for k in (2, 3, 5):
        assert prof.cost(k) == pytest.approx(brute_force_optimum(space, k, "diam"))


@given(small_metrics(min_n=1, max_n=8, integer=False))
def test_profile_invariants(space):
    profs = {kind: optimal_profile(space, kind) for kind in KINDS}
    for kind, prof in profs.items():
        costs = np.array(prof.costs)
        assert np.all(np.diff(costs) <= 1e-12)
        assert costs[-1] == 0
    rad, drad, diam = (np.array(profs[k].costs) for k in
                       (CostKind.RADIUS, CostKind.DISCRETE_RADIUS, CostKind.DIAMETER))
    assert np.all(rad <= drad + 1e-9)
    assert np.all(drad <= diam + 1e-9)
    assert np.all(diam <= 2 * rad + 1e-9)


class TestProfileSerialisation:
    def test_roundtrip(self, line4):
        prof = optimal_profile(line4, "drad")
        data = prof.to_dict()
        assert data["cost_kind"] == "drad"
        assert [lv["k"] for lv in data["levels"]] == [1, 2, 3, 4]
        assert data["levels"][1]["blocks"] == [[0], [1, 2, 3]]
        assert OptimalProfile.from_dict(data) == prof

    def test_shared_witnesses(self):
        whole, single = Clustering.whole(3), Clustering.singletons(3)
        prof = OptimalProfile.from_levels("diam", [2, 2, 0], [whole, whole, single])
        data = prof.to_dict()
        assert "witnesses" in data and len(data["witnesses"]) == 2
        assert OptimalProfile.from_dict(data) == prof

    def test_missing_level(self, line4):
        data = optimal_profile(line4, "diam").to_dict()
        del data["levels"][2]
        with pytest.raises(IncompleteProfile):
            OptimalProfile.from_dict(data)

    def test_validate(self, line4):
        prof = optimal_profile(line4, "diam")
        with pytest.raises(KindMismatch):
            prof.validate("rad")
        with pytest.raises(IncompleteProfile):
            prof.validate(n=5)
        bad = OptimalProfile(CostKind.DIAMETER, 2, (1.0, 0.0), (Clustering.singletons(2),), (0, 0))
        with pytest.raises(IncompleteProfile):
            bad.validate()
