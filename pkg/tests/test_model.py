import itertools
import random
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairdesign.errors import CapacityError, DomainError
from pairdesign.model import (
    ModelSpec,
    PairedComparison,
    Profile,
    comparison_depth,
    difference_vector,
    effect_code,
    enumerate_orbit,
    orbit_indices,
    orbit_size,
    profile_codes,
    regression_vector,
)


def profiles(K):
    return st.lists(st.sampled_from([1, 2]), min_size=K, max_size=K).map(lambda x: Profile(tuple(x)))


@st.composite
def pairs(draw, max_k=7):
    K = draw(st.integers(1, max_k))
    return PairedComparison(draw(profiles(K)), draw(profiles(K)))


def all_pairs(K):
    profs = [Profile(p) for p in itertools.product((1, 2), repeat=K)]
    return [PairedComparison(a, b) for a in profs for b in profs]


class TestModelSpec:
    @pytest.mark.parametrize("K", range(1, 60))
    def test_parameter_count(self, K):
        spec = ModelSpec(K)
        assert K * (K * K + 5) % 6 == 0
        assert spec.p == K * (K * K + 5) // 6
        assert spec.blocks == (K, comb(K, 2), comb(K, 3))

    def test_degenerate_blocks(self):
        assert ModelSpec(1).blocks == (1, 0, 0)
        assert ModelSpec(2).blocks == (2, 1, 0)

    @pytest.mark.parametrize("bad", [0, -3, 2.5, True, "4"])
    def test_rejects_bad_k(self, bad):
        with pytest.raises(DomainError):
            ModelSpec(bad)


def test_effect_code():
    assert effect_code(1) == 1
    assert effect_code(2) == -1
    assert effect_code(1) ** 2 == effect_code(2) ** 2 == 1
    with pytest.raises(DomainError):
        effect_code(3)


def test_profile_validation_and_index():
    with pytest.raises(DomainError):
        Profile((1, 3))
    with pytest.raises(DomainError):
        Profile(())
    for K in range(1, 6):
        for idx in range(2**K):
            assert Profile.from_index(K, idx).index == idx
    ordered = [Profile(p) for p in itertools.product((1, 2), repeat=4)]
    assert [p.index for p in ordered] == list(range(16))


class TestRegressionVector:
    def test_all_first_levels(self):
        np.testing.assert_array_equal(regression_vector(Profile((1, 1, 1)), ModelSpec(3)), np.ones(7))

    def test_hand_expanded(self):
        # g = (-1, 1, 1): pairs (1,2),(1,3),(2,3) -> -1,-1,1; triple -> -1
        expected = [-1, 1, 1, -1, -1, 1, -1]
        np.testing.assert_array_equal(regression_vector(Profile((2, 1, 1)), ModelSpec(3)), expected)

    def test_length_k4(self):
        assert regression_vector(Profile((1, 2, 2, 1)), ModelSpec(4)).shape == (14,)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            regression_vector(Profile((1, 2)), ModelSpec(3))

    @given(st.integers(1, 8).flatmap(profiles))
    def test_entries_square_to_one(self, profile):
        f = regression_vector(profile, ModelSpec(profile.K))
        assert np.all(f**2 == 1)

    @pytest.mark.parametrize("K", [1, 2, 3, 5])
    def test_profile_codes_agree(self, K):
        spec = ModelSpec(K)
        codes = profile_codes(K)
        for idx in range(2**K):
            np.testing.assert_array_equal(codes[idx], regression_vector(Profile.from_index(K, idx), spec))


class TestDifferenceVector:
    def test_identical_pair(self):
        i = Profile((1, 2, 1, 2))
        assert not difference_vector(PairedComparison(i, i), ModelSpec(4)).any()

    def test_one_attribute(self):
        diff = difference_vector(PairedComparison(Profile((1,)), Profile((2,))), ModelSpec(1))
        np.testing.assert_array_equal(diff, [2])
        assert diff[0] ** 2 == 4

    def test_full_flip_k3(self):
        diff = difference_vector(PairedComparison(Profile((1, 1, 1)), Profile((2, 2, 2))), ModelSpec(3))
        np.testing.assert_array_equal(diff, [2, 2, 2, 0, 0, 0, 2])

    def test_mismatched_k(self):
        with pytest.raises(DomainError):
            PairedComparison(Profile((1, 2)), Profile((1, 2, 1)))
        with pytest.raises(DomainError):
            difference_vector(PairedComparison(Profile((1, 2)), Profile((2, 2))), ModelSpec(3))

    @given(pairs())
    def test_values_and_antisymmetry(self, pair):
        spec = ModelSpec(pair.K)
        diff = difference_vector(pair, spec)
        assert set(np.unique(diff)) <= {-2.0, 0.0, 2.0}
        np.testing.assert_array_equal(difference_vector(pair.swapped(), spec), -diff)

    @pytest.mark.parametrize("K", range(1, 7))
    def test_nonzero_count_by_depth(self, K):
        spec = ModelSpec(K)
        for pair in all_pairs(K):
            d = pair.depth
            expected = d + d * (K - d) + comb(d, 3) + d * comb(K - d, 2)
            assert np.count_nonzero(difference_vector(pair, spec)) == expected


def test_comparison_depth():
    assert comparison_depth(PairedComparison(Profile((1, 1)), Profile((1, 1)))) == 0
    assert comparison_depth(PairedComparison(Profile((1, 2, 1)), Profile((2, 2, 2)))) == 2
    for K in (1, 4, 9):
        pc = PairedComparison(Profile((1,) * K), Profile((2,) * K))
        assert comparison_depth(pc) == pc.depth == K


class TestOrbits:
    def test_k3_d2_against_filter(self):
        brute = [pc for pc in all_pairs(3) if pc.depth == 2]
        got = list(enumerate_orbit(ModelSpec(3), 2))
        assert len(got) == 24
        assert got == sorted(brute, key=lambda pc: (pc.first.levels, pc.second.levels))

    def test_k1(self):
        got = list(enumerate_orbit(ModelSpec(1), 1))
        assert [(pc.first.levels, pc.second.levels) for pc in got] == [((1,), (2,)), ((2,), (1,))]

    @pytest.mark.parametrize("K", [1, 3, 6])
    def test_depth_zero(self, K):
        spec = ModelSpec(K)
        got = list(enumerate_orbit(spec, 0))
        assert len(got) == 2**K
        assert all(not difference_vector(pc, spec).any() for pc in got)

    @pytest.mark.parametrize("K", range(1, 9))
    def test_orbits_partition_all_pairs(self, K):
        sizes = [len(orbit_indices(K, d)[0]) for d in range(K + 1)]
        assert sizes == [orbit_size(K, d) for d in range(K + 1)]
        assert sum(sizes) == 4**K

    @pytest.mark.parametrize("K", range(1, 6))
    def test_indices_match_enumeration(self, K):
        spec = ModelSpec(K)
        for d in range(K + 1):
            first, second = orbit_indices(K, d)
            pcs = list(enumerate_orbit(spec, d))
            assert [pc.first.index for pc in pcs] == first.tolist()
            assert [pc.second.index for pc in pcs] == second.tolist()
            assert all(pc.depth == d for pc in pcs)

    @pytest.mark.parametrize("K", range(2, 6))
    def test_invariance_under_symmetries(self, K):
        rng = random.Random(K)
        spec = ModelSpec(K)
        for _ in range(5):
            perm = list(range(K))
            rng.shuffle(perm)
            flips = [rng.random() < 0.5 for _ in range(K)]

            def act(profile):
                levels = [profile.levels[perm[k]] for k in range(K)]
                return Profile(tuple(3 - x if f else x for x, f in zip(levels, flips)))

            for d in range(K + 1):
                orbit = set(enumerate_orbit(spec, d))
                image = {PairedComparison(act(pc.first), act(pc.second)) for pc in orbit}
                assert image == orbit

    def test_depth_out_of_range(self):
        with pytest.raises(DomainError):
            list(enumerate_orbit(ModelSpec(3), 4))
        with pytest.raises(DomainError):
            orbit_size(3, -1)

    def test_enumeration_cap(self, monkeypatch):
        monkeypatch.setenv("PAIRDESIGN_MAX_K", "4")
        with pytest.raises(CapacityError):
            next(enumerate_orbit(ModelSpec(5), 1))
        assert len(list(enumerate_orbit(ModelSpec(4), 1))) == 64
        monkeypatch.setenv("PAIRDESIGN_MAX_K", "nope")
        with pytest.raises(DomainError):
            next(enumerate_orbit(ModelSpec(3), 1))

    def test_default_cap(self):
        with pytest.raises(CapacityError):
            next(enumerate_orbit(ModelSpec(21), 1))
