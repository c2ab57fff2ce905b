import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nspolar import oracle
from nspolar.channels import ChannelModel, symmetric_capacity
from nspolar.construction import (
    CodeSpec,
    PuncturePattern,
    bit_reversal,
    build_code,
    compose,
    inverse,
    load_code,
    ones_frequency,
    ordering_permutation,
    qup_pattern,
    random_permutation,
    save_code,
    select_information_set,
    zn_recursion,
    zn_recursion_log,
)


def test_bit_reversal_examples():
    assert bit_reversal(3).tolist() == [0, 4, 2, 6, 1, 5, 3, 7]
    assert bit_reversal(0).tolist() == [0]
    assert bit_reversal(2).tolist() == [0, 2, 1, 3]


@pytest.mark.parametrize("n", range(0, 11))
def test_bit_reversal_self_inverse(n):
    psi = bit_reversal(n)
    assert np.array_equal(psi[psi], np.arange(1 << n))


def test_compose_examples():
    ident = np.arange(8)
    psi = bit_reversal(3)
    assert np.array_equal(compose(ident, psi), psi)
    assert np.array_equal(compose(psi, psi), ident)
    assert compose([1, 2, 0, 3], [0, 2, 1, 3]).tolist() == [1, 0, 2, 3]
    with pytest.raises(ValueError):
        compose([0, 1], [0, 1, 2])
    with pytest.raises(ValueError):
        compose([0, 0], [0, 1])


@given(st.integers(1, 64), st.integers(0, 2**31))
def test_inverse_composes_to_identity(N, seed):
    p = random_permutation(N, seed)
    assert np.array_equal(compose(p, inverse(p)), np.arange(N))
    assert np.array_equal(compose(inverse(p), p), np.arange(N))


def test_ordering_permutation_examples():
    caps = [0.9, 0.1, 0.5, 0.5]
    chans = [ChannelModel.bec(1 - c) for c in caps]
    assert ordering_permutation(chans).tolist() == [1, 2, 3, 0]
    inc = [ChannelModel.bec(e) for e in (0.9, 0.5, 0.2)]
    assert ordering_permutation(inc).tolist() == [0, 1, 2]
    same = [ChannelModel.bsc(0.1)] * 5
    assert ordering_permutation(same).tolist() == list(range(5))


def test_ordering_keys_can_disagree_for_bac():
    # capacity and Bhattacharyya orderings differ for this pair
    chans = [ChannelModel.bac(0.0, 0.1), ChannelModel.bsc(0.03)]
    c = [symmetric_capacity(w) for w in chans]
    z = [w.bhattacharyya() for w in chans]
    assert c[0] < c[1] and z[0] < z[1]
    assert ordering_permutation(chans, "capacity").tolist() != ordering_permutation(chans, "bhattacharyya").tolist()


def test_zn_recursion_examples():
    np.testing.assert_allclose(zn_recursion([0.5, 0.5]).z, [0.75, 0.25], atol=1e-15)
    np.testing.assert_allclose(zn_recursion([0.5] * 4).z, [0.9375, 0.4375, 0.5625, 0.0625], atol=1e-15)
    assert np.all(zn_recursion(np.zeros(8)).z == 0.0)
    with pytest.raises(ValueError):
        zn_recursion([0.5] * 3)
    with pytest.raises(ValueError):
        zn_recursion([1.5, 0.2])


def test_zn_recursion_matches_bec_oracle():
    rng = np.random.default_rng(5)
    for N in (2, 4, 8, 64, 1024):
        z0 = rng.uniform(0, 1, N)
        np.testing.assert_allclose(zn_recursion(z0).z, oracle.bec_polarize(z0), rtol=1e-12, atol=1e-15)


def test_log_domain_does_not_underflow():
    # 2^-1000 per channel: the product channel is far below double range
    t = zn_recursion_log(np.full(1024, -1000.0 * np.log(2)))
    assert np.all(np.isfinite(t.log_z))
    assert t.log_z[-1] == pytest.approx(-1024 * 1000 * np.log(2))


@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=2))
def test_single_level_identities(pair):
    a, b = pair
    out = zn_recursion([a, b]).z
    assert out[1] == pytest.approx(a * b, abs=1e-15)
    assert out[0] + out[1] <= a + b + 1e-12
    assert 0.0 <= out.min() and out.max() <= 1.0


@given(st.integers(1, 6), st.integers(0, 2**31))
@settings(max_examples=40)
def test_recursion_level_sums_bounded(n, seed):
    # the pair sum never grows, so the total over all indices is non-increasing
    z0 = np.random.default_rng(seed).uniform(0, 1, 1 << n)
    assert zn_recursion(z0).z.sum() <= z0.sum() + 1e-12


def test_select_information_set_examples():
    t = zn_recursion([0.5] * 4)
    # returns the frozen set
    assert select_information_set(t, 2).tolist() == [0, 2]
    assert select_information_set(t, 0).tolist() == [0, 1, 2, 3]
    assert select_information_set(zn_recursion(np.zeros(4)), 4).tolist() == []
    with pytest.raises(ValueError):
        select_information_set(t, 4, n_punctured=1)


def test_select_freezes_largest_bounds():
    # the information set holds the smallest bounds: index 3 (0.0625) and 1 (0.4375)
    t = zn_recursion([0.5] * 4)
    frozen = select_information_set(t, 2)
    info = np.setdiff1d(np.arange(4), frozen)
    assert t.z[info].max() < t.z[frozen].min()


def test_select_ties_freeze_lower_index_first():
    assert select_information_set(np.zeros(4), 2).tolist() == [0, 1]


def test_qup_examples():
    assert qup_pattern(8, 3).w.tolist() == [0, 1, 0, 1, 0, 1, 1, 1]
    assert qup_pattern(8, 0).w.tolist() == [1] * 8
    assert qup_pattern(4, 2).w.tolist() == [0, 1, 0, 1]
    with pytest.raises(ValueError):
        qup_pattern(8, 8)


@given(st.integers(1, 10), st.data())
def test_qup_zeros_on_bit_reversed_prefix(n, data):
    N = 1 << n
    Np = data.draw(st.integers(0, N - 1))
    p = qup_pattern(N, Np)
    assert p.n_punctured == Np
    assert set(p.positions.tolist()) == set(bit_reversal(n)[:Np].tolist())


def test_ones_frequency_examples():
    assert ones_frequency(1024, 40) == 0.51953125
    assert ones_frequency(8, 0) == 0.5
    assert ones_frequency(8, 8) == 1.0


def test_build_code_prop1_example():
    eps = (0.4, 0.3, 0.2, 0.1)
    spec = build_code([ChannelModel.bec(e) for e in eps], 2, "explicit", perm=[0, 3, 1, 2])
    assert spec.info_set.tolist() == [1, 3]
    # middle bound from the closed form e1 e4 + e2 e3 - e1 e2 e3 e4
    assert np.exp(spec.log_z[1]) == pytest.approx(0.0976, abs=1e-12)


@pytest.mark.parametrize("kind", ["identity", "bitreversal", "ordered", "ordered_bitreversal", "random"])
def test_uniform_channels_match_regular_code(kind):
    chans = [ChannelModel.bsc(0.07)] * 64
    regular = build_code(chans, 32, "identity")
    spec = build_code(chans, 32, kind, seed=11)
    assert np.array_equal(spec.frozen_set, regular.frozen_set)


def test_puncture_boundary_builds():
    chans = [ChannelModel.bsc(p) for p in np.linspace(0.01, 0.1, 16)]
    spec = build_code(chans, 10, "ordered_bitreversal", n_punctured=6)
    assert spec.info_set.size == 10
    # punctured positions carry Z=1 and are always frozen
    assert set(spec.puncture.positions.tolist()) <= set(spec.frozen_set.tolist())


@given(st.integers(1, 60), st.integers(0, 2**31))
@settings(max_examples=30)
def test_ordered_bitreversal_punctures_weakest_cells(Np, seed):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.001, 0.3, 64)
    chans = [ChannelModel.bsc(v) for v in p]
    spec = build_code(chans, 64 - Np, "ordered_bitreversal", n_punctured=Np)
    physical = set(spec.permutation[spec.puncture.positions].tolist())
    weakest = set(ordering_permutation(chans)[:Np].tolist())
    assert physical == weakest


def test_pair_swap_equivalence_n4():
    rng = np.random.default_rng(2)
    for _ in range(20):
        chans = [oracle.DiscreteChannel.from_model(ChannelModel.bsc(v)) for v in rng.uniform(0.01, 0.4, 4)]
        base = oracle.synthesized_capacities(chans)
        for swap in ([1, 0, 2, 3], [0, 1, 3, 2]):
            np.testing.assert_allclose(oracle.synthesized_capacities([chans[i] for i in swap]), base, atol=1e-12)


def test_codespec_round_trip(tmp_path):
    chans = [ChannelModel.bac(a, b) for a, b in np.random.default_rng(0).uniform(0, 0.2, (16, 2))]
    spec = build_code(chans, 9, "ordered_bitreversal", n_punctured=3)
    path = tmp_path / "code.json"
    save_code(spec, path)
    back = load_code(path)
    assert back.n == spec.n and back.k == spec.k
    assert np.array_equal(back.frozen_set, spec.frozen_set)
    assert np.array_equal(back.permutation, spec.permutation)
    assert np.array_equal(back.puncture.w, spec.puncture.w)
    assert back.channels == spec.channels
    np.testing.assert_array_equal(back.log_z, spec.log_z)


def test_codespec_validation():
    with pytest.raises(ValueError):
        CodeSpec(2, 2, [0], np.arange(4), PuncturePattern.none(4))
    with pytest.raises(ValueError):
        CodeSpec(2, 2, [0, 1], [0, 0, 1, 2], PuncturePattern.none(4))


def test_build_code_errors():
    with pytest.raises(ValueError):
        build_code([ChannelModel.bsc(0.1)] * 6, 3)
    with pytest.raises(ValueError):
        build_code([ChannelModel.bsc(0.1)] * 8, 3, "explicit")
    with pytest.raises(ValueError):
        build_code([ChannelModel.bsc(0.1)] * 8, 3, "random")
    with pytest.raises(ValueError):
        build_code([ChannelModel.bsc(0.1)] * 8, 3, "sideways")
