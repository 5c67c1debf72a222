import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from app.core.errors import DimensionMismatchError, OverlappingVariablesError, UserLimitError
from app.models.channel import DMWiretapChannel, nonempty_subsets
from app.services.information import (
    deterministic_channel,
    entropy,
    joint_distribution,
    mi_bundle,
    mutual_information,
    rationalize,
    sample_channel,
    sample_inputs,
    seeded_rng,
    uniform_inputs,
    validate_channel,
)


def _brute_mi(ch, inputs, subset, conditioned, target):
    """I(X_S; target | X_C)，直接列舉 p(x, y, z)"""
    table = {}
    for x in itertools.product(*(range(size) for size in ch.input_sizes)):
        weight = math.prod(inputs[k].pmf[x[k]] for k in range(ch.num_users))
        for y in range(ch.y_size):
            for z in range(ch.z_size):
                p = weight * ch.transition[x + (y, z)]
                if p == 0:
                    continue
                key = (
                    tuple(x[k - 1] for k in sorted(subset)),
                    tuple(x[k - 1] for k in sorted(conditioned)),
                    y if target == "Y" else z,
                )
                table[key] = table.get(key, 0.0) + p

    def marginal(select):
        out = {}
        for key, p in table.items():
            reduced = select(key)
            out[reduced] = out.get(reduced, 0.0) + p
        return out

    p_ac = marginal(lambda k: (k[0], k[1]))
    p_bc = marginal(lambda k: (k[1], k[2]))
    p_c = marginal(lambda k: k[1])
    return sum(
        p * math.log2(p * p_c[k[1]] / (p_ac[(k[0], k[1])] * p_bc[(k[1], k[2])]))
        for k, p in table.items()
    )


def test_validate_channel_reports_row_sum():
    table = np.zeros((2, 2, 2, 1))
    table[..., 0, 0] = 1.0
    table[1, 1, 0, 0] = 0.7
    violations = validate_channel(DMWiretapChannel((2, 2), 2, 1, table))
    assert [v.kind for v in violations] == ["row_sum"]
    assert violations[0].index == (1, 1)


def test_validate_channel_reports_negative_entry():
    table = np.zeros((2, 2, 2, 1))
    table[..., 0, 0] = 1.0
    table[0, 0, 0, 0] = 1.5
    table[0, 0, 1, 0] = -0.5
    kinds = {v.kind for v in validate_channel(DMWiretapChannel((2, 2), 2, 1, table))}
    assert kinds == {"negative"}


def test_shape_mismatch_rejected():
    with pytest.raises(DimensionMismatchError):
        DMWiretapChannel((2, 2), 2, 2, np.zeros((2, 2, 2)))


def test_xor_witness_information(xor_witness):
    ch, inputs = xor_witness
    mi = mi_bundle(ch, inputs)
    assert mi.i_y_given(1) == 1
    assert mi.i_y_given(2) == 1
    assert mi.i_y_given((1, 2)) == 1
    assert mi.i_y(2) == 0
    assert mi.i_z(1) == 1
    assert mi.i_z(2) == 0
    assert mi.i_z((1, 2)) == 1
    assert mi.i_z_given(2) == 0


def test_methods_agree_on_random_channel():
    rng = seeded_rng(5)
    ch = sample_channel(rng, (2, 3), 3, 2)
    joint = joint_distribution(ch, sample_inputs(rng, ch.input_sizes))
    for a, b, c in [({"X1"}, {"Y"}, {"X2"}), ({"X1", "X2"}, {"Z"}, set()), ({"X2"}, {"Z"}, {"X1"})]:
        first = mutual_information(joint, a, b, c, method="entropy")
        second = mutual_information(joint, a, b, c, method="divergence")
        assert first == pytest.approx(second, abs=1e-10)


def test_overlapping_variables_rejected(xor_witness):
    ch, inputs = xor_witness
    joint = joint_distribution(ch, inputs)
    with pytest.raises(OverlappingVariablesError):
        mutual_information(joint, {"X1"}, {"X1", "Y"})


def test_input_size_mismatch(xor_witness):
    ch, _ = xor_witness
    with pytest.raises(DimensionMismatchError):
        joint_distribution(ch, uniform_inputs((2, 3)))


def test_chain_identity_is_exact():
    rng = seeded_rng(17)
    ch = sample_channel(rng, (2, 2), 2, 2)
    mi = mi_bundle(ch, sample_inputs(rng, ch.input_sizes))
    assert isinstance(mi.i_z((1, 2)), Fraction)
    assert mi.i_z((1, 2)) == mi.i_z(1) + mi.i_z_given(2)
    assert mi.i_z((1, 2)) == mi.i_z(2) + mi.i_z_given(1)
    assert mi.i_y_given((1, 2)) == mi.i_y(2) + mi.i_y_given(1)


def test_rationalize_denominator():
    assert rationalize(0.25) == Fraction(1, 4)
    assert rationalize(Fraction(1, 3)) == Fraction(1, 3)
    assert rationalize(1e-13) == 0


def test_too_many_users():
    ch = DMWiretapChannel((2,) * 3, 1, 1, np.ones((2, 2, 2, 1, 1)))
    with pytest.raises(UserLimitError):
        mi_bundle(ch, uniform_inputs(ch.input_sizes), max_users=2)


@pytest.mark.parametrize("num_users", [2, 3])
def test_bundle_matches_direct_summation(num_users):
    rng = seeded_rng(99, num_users)
    for _ in range(50):
        sizes = tuple(int(s) for s in rng.integers(2, 4, size=num_users))
        ch = sample_channel(rng, sizes, int(rng.integers(2, 4)), int(rng.integers(2, 4)))
        inputs = sample_inputs(rng, sizes)
        mi = mi_bundle(ch, inputs)
        users = set(range(1, num_users + 1))
        for subset in nonempty_subsets(num_users):
            rest = users - subset
            assert float(mi.i_y_given(subset)) == pytest.approx(_brute_mi(ch, inputs, subset, rest, "Y"), abs=1e-9)
            assert float(mi.i_z_given(subset)) == pytest.approx(_brute_mi(ch, inputs, subset, rest, "Z"), abs=1e-9)
            assert float(mi.i_z(subset)) == pytest.approx(_brute_mi(ch, inputs, subset, set(), "Z"), abs=1e-9)
            assert float(mi.i_y(subset)) == pytest.approx(_brute_mi(ch, inputs, subset, set(), "Y"), abs=1e-9)


@pytest.mark.parametrize("seed", range(100))
def test_chain_rule_and_nonnegativity(seed):
    rng = seeded_rng(1000, seed)
    ch = sample_channel(rng, (2, 3), 3, 2)
    mi = mi_bundle(ch, sample_inputs(rng, ch.input_sizes))
    for table in (mi.y_cond, mi.z_cond, mi.z_marginal, mi.y_marginal):
        assert all(value >= 0 for value in table.values())
    assert mi.i_z((1, 2)) == mi.i_z(1) + mi.i_z_given(2)
    assert mi.i_z((1, 2)) == mi.i_z(2) + mi.i_z_given(1)
    assert mi.i_y_given((1, 2)) == mi.i_y(1) + mi.i_y_given(2)
    assert mi.i_y_given((1, 2)) == mi.i_y(2) + mi.i_y_given(1)


@pytest.mark.parametrize("seed", range(20))
def test_data_processing_when_z_is_function_of_y(seed):
    rng = seeded_rng(2000, seed)
    main = rng.dirichlet(np.ones(4), size=4).reshape(2, 2, 4)
    table = np.zeros((2, 2, 4, 2))
    for y in range(4):
        # Z = Y mod 2
        table[:, :, y, y % 2] = main[:, :, y]
    ch = DMWiretapChannel((2, 2), 4, 2, table)
    mi = mi_bundle(ch, sample_inputs(rng, ch.input_sizes))
    slack = Fraction(1, 10**9)
    for subset in nonempty_subsets(2):
        assert mi.i_z(subset) <= mi.i_y(subset) + slack
        assert mi.i_z_given(subset) <= mi.i_y_given(subset) + slack


@pytest.mark.parametrize("seed", range(20))
def test_joint_distribution_sums_to_one(seed):
    rng = seeded_rng(3000, seed)
    ch = sample_channel(rng, (3, 2), 2, 3)
    joint = joint_distribution(ch, sample_inputs(rng, ch.input_sizes))
    assert joint.table.min() >= 0
    assert float(joint.table.sum()) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_swapping_users_swaps_bundle(seed):
    rng = seeded_rng(4000, seed)
    ch = sample_channel(rng, (2, 3), 3, 2)
    inputs = sample_inputs(rng, ch.input_sizes)
    swapped = DMWiretapChannel((3, 2), 3, 2, np.transpose(ch.transition, (1, 0, 2, 3)))
    mi = mi_bundle(ch, inputs)
    mirrored = mi_bundle(swapped, inputs[::-1])
    for name in ("i_y_given", "i_z_given", "i_z", "i_y"):
        for k, other in ((1, 2), (2, 1)):
            assert float(getattr(mirrored, name)(k)) == pytest.approx(float(getattr(mi, name)(other)), abs=1e-11)
        assert float(getattr(mirrored, name)((1, 2))) == pytest.approx(float(getattr(mi, name)((1, 2))), abs=1e-11)


def test_unused_output_symbols_contribute_nothing(xor_witness):
    ch, inputs = xor_witness
    # y = 2 與 z = 2 的機率為 0
    padded = deterministic_channel((2, 2), 3, 3, lambda a, b: a ^ b, lambda a, b: a)
    assert mi_bundle(padded, inputs).as_floats() == mi_bundle(ch, inputs).as_floats()
    joint = joint_distribution(padded, inputs)
    assert entropy(joint, {"Y"}) == 1.0
    assert mutual_information(joint, {"X1"}, {"Y"}, {"X2"}, method="divergence") == pytest.approx(1.0)


def test_point_mass_inputs_carry_no_information(xor_witness, point_mass_inputs):
    ch, _ = xor_witness
    mi = mi_bundle(ch, point_mass_inputs)
    assert all(value == 0 for value in mi.as_floats().values())
