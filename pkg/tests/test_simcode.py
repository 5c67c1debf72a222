import itertools

import numpy as np
import pytest

from app.config import settings
from app.core.errors import (
    CodebookLimitError,
    EnumerationLimitError,
    InvalidInputError,
    PreconditionError,
    ResourceLimitError,
)
from app.models.channel import InputDistribution
from app.models.coding import CodeConfig, Codebook, SubcodebookLayout, UserRates
from app.services.information import mi_bundle, sample_channel, seeded_rng, uniform_inputs
from app.services.simcode import (
    decode,
    encode,
    exact_leakage,
    generate_codebooks,
    n_statistic,
    run_trials,
    sample_n_statistic,
    theorem3_bounds,
    typical_set_test,
    typicality_probability,
)

BALANCED_1 = [[0, 0, 1, 1], [1, 1, 0, 0]]
BALANCED_2 = [[0, 1, 0, 1], [1, 0, 1, 0]]


def _config(n, first, second=None, eps=1.0, seed=0):
    return CodeConfig(n=n, rates=(first, second or first), eps=eps, seed=seed)


def _balanced_codebook(words1=BALANCED_1, words2=BALANCED_2):
    """每個使用者兩則機密訊息、每對碼字的聯合型態皆均勻"""
    layout = SubcodebookLayout(num_secret=2, num_open=1, num_guard=1)
    return Codebook(
        n=4,
        layouts=(layout, layout),
        codewords=(np.array(words1), np.array(words2)),
        seed=0,
        inputs=tuple(uniform_inputs((2, 2))),
    )


@pytest.mark.parametrize(
    "seq, pmf, eps, expected",
    [
        ([0, 0, 0], [1.0, 0.0], 0.01, True),
        ([0, 1], [1.0, 0.0], 10.0, False),
        ([0, 1, 0, 1, 1, 0, 0, 1], [0.5, 0.5], 0.1, True),
        ([0, 1, 1, 1, 1, 0, 0, 1], [0.5, 0.5], 0.1, False),
        ([0, 1, 1, 1, 1, 0, 0, 1], [0.5, 0.5], 0.25, True),
    ],
)
def test_typical_set_test(seq, pmf, eps, expected):
    assert typical_set_test(seq, pmf, eps) is expected


def test_typical_set_test_rejects_foreign_symbol():
    with pytest.raises(InvalidInputError):
        typical_set_test([0, 2], [0.5, 0.5], 0.1)


def test_config_limits():
    with pytest.raises(ResourceLimitError):
        _config(11, UserRates(0.1))
    with pytest.raises(InvalidInputError):
        _config(4, UserRates(0.1), eps=0.0)
    with pytest.raises(InvalidInputError):
        UserRates(-0.1)


def test_codebook_shape_and_determinism(xor_constant_z):
    ch, inputs = xor_constant_z
    cfg = _config(4, UserRates(0.5), seed=3)
    first = generate_codebooks(ch, inputs, cfg)
    second = generate_codebooks(ch, inputs, cfg)
    assert [words.shape for words in first.codewords] == [(4, 4), (4, 4)]
    for a, b in zip(first.codewords, second.codewords):
        np.testing.assert_array_equal(a, b)


def test_codebook_point_mass(xor_constant_z):
    ch, _ = xor_constant_z
    inputs = [InputDistribution(np.array([1.0, 0.0]))] * 2
    cb = generate_codebooks(ch, inputs, _config(5, UserRates(0.4)))
    assert all(not words.any() for words in cb.codewords)


def test_codebook_symbol_frequency(xor_constant_z):
    ch, inputs = xor_constant_z
    symbols = []
    for seed in range(50):
        cb = generate_codebooks(ch, inputs, _config(4, UserRates(0.5), seed=seed))
        symbols.extend(np.concatenate([words.ravel() for words in cb.codewords]))
    assert np.mean(symbols) == pytest.approx(0.5, abs=0.05)


def test_codebook_limit(xor_constant_z):
    ch, inputs = xor_constant_z
    with pytest.raises(CodebookLimitError):
        generate_codebooks(ch, inputs, _config(10, UserRates(1.0)))


def test_encode_uniform_over_bin(xor_constant_z):
    ch, inputs = xor_constant_z
    cfg = _config(4, UserRates(0.25, 0.25, 0.5))
    cb = generate_codebooks(ch, inputs, cfg)
    layout = cb.layouts[0]
    assert layout.num_guard == 4
    rng = seeded_rng(1)
    picks = [encode(cb, 0, 1, 1, rng) for _ in range(10_000)]
    counts = np.bincount(picks, minlength=layout.size)
    for index in layout.bin(1, 1):
        assert layout.split(index)[:2] == (1, 1)
        assert abs(counts[index] - 2500) < 200
    assert counts.sum() == counts[list(layout.bin(1, 1))].sum()


def test_encode_out_of_range(xor_constant_z):
    ch, inputs = xor_constant_z
    cb = generate_codebooks(ch, inputs, _config(4, UserRates(0.25)))
    with pytest.raises(InvalidInputError):
        encode(cb, 0, 2, 0, seeded_rng(0))
    with pytest.raises(InvalidInputError):
        encode(cb, 2, 0, 0, seeded_rng(0))


def test_decode_noiseless_channel(noiseless_constant_z):
    ch, _ = noiseless_constant_z
    cb = _balanced_codebook()
    for a, b in itertools.product(range(2), repeat=2):
        y = 2 * np.array(BALANCED_1[a]) + np.array(BALANCED_2[b])
        assert decode(cb, ch, y, 0.01) == (a, 0, b, 0)


def test_decode_ambiguous_and_atypical(noiseless_constant_z):
    ch, _ = noiseless_constant_z
    twin = _balanced_codebook(words1=[BALANCED_1[0], BALANCED_1[0]])
    y = 2 * np.array(BALANCED_1[0]) + np.array(BALANCED_2[0])
    assert decode(twin, ch, y, 0.01) is None
    assert decode(_balanced_codebook(), ch, [0, 0, 0, 0], 0.01) is None


def test_noiseless_trials_without_errors(noiseless_constant_z):
    ch, inputs = noiseless_constant_z
    cfg = _config(4, UserRates(0.25), eps=0.01)
    result = run_trials(ch, inputs, cfg, trials=50, codebook=_balanced_codebook(), n_samples=0)
    assert result.errors == 0
    assert result.leakage.mutual_information == 0
    assert result.leakage.total_probability == pytest.approx(1.0)
    assert result.leakage.entropy_given_z == pytest.approx(2.0)
    assert result.leakage.entropy_given_mz == pytest.approx(0.0)


def test_overloaded_rates_fail(xor_constant_z):
    ch, inputs = xor_constant_z
    result = run_trials(ch, inputs, _config(6, UserRates(1.0), eps=1.5), trials=200, leakage=False, n_samples=0)
    assert result.error_probability > 0.5


def test_error_probability_falls_with_blocklength(xor_constant_z):
    ch, inputs = xor_constant_z

    def average(n):
        rates = []
        for seed in range(40):
            cfg = _config(n, UserRates(0.35), eps=1.5, seed=seed)
            rates.append(run_trials(ch, inputs, cfg, trials=500, leakage=False, n_samples=0).error_probability)
        return float(np.mean(rates))

    short, middle, long = (average(n) for n in (4, 6, 8))
    # n = 4、6 取整後的實際速率不同，兩者不直接比較
    assert long <= middle
    assert long <= short
    assert long <= 0.3


def test_trials_are_reproducible(xor_constant_z):
    ch, inputs = xor_constant_z
    cfg = _config(6, UserRates(0.3), eps=1.5, seed=9)
    serial = run_trials(ch, inputs, cfg, trials=300, leakage=False, n_samples=0, workers=1)
    again = run_trials(ch, inputs, cfg, trials=300, leakage=False, n_samples=0, workers=1)
    parallel = run_trials(ch, inputs, cfg, trials=300, leakage=False, n_samples=0, workers=3)
    assert serial.errors == again.errors == parallel.errors


def test_trials_must_be_positive(xor_constant_z):
    ch, inputs = xor_constant_z
    with pytest.raises(PreconditionError):
        run_trials(ch, inputs, _config(4, UserRates(0.25)), trials=0)


def test_guard_rates_reduce_leakage(noiseless_xor_z):
    ch, inputs = noiseless_xor_z
    secret = 1 / 6

    def leakage(guard, seed):
        cfg = _config(6, UserRates(secret, 0.0, guard), eps=0.1, seed=seed)
        report = exact_leakage(ch, generate_codebooks(ch, inputs, cfg))
        assert report.superadditivity_margin >= -1e-9
        assert abs(report.chain_residual) <= 1e-9
        assert report.total_probability == pytest.approx(1.0, abs=1e-9)
        return report.rate

    unguarded = np.mean([leakage(0.0, seed) for seed in range(20)])
    guarded = np.mean([leakage(0.5, seed) for seed in range(20)])
    assert unguarded - guarded >= 0.05


def test_leakage_enumeration_cap(noiseless_xor_z):
    ch, inputs = noiseless_xor_z
    cb = generate_codebooks(ch, inputs, _config(6, UserRates(1 / 6)))
    with pytest.raises(EnumerationLimitError):
        exact_leakage(ch, cb, max_atoms=100)


def test_skipped_leakage_reported_as_none(noiseless_xor_z, monkeypatch):
    ch, inputs = noiseless_xor_z
    monkeypatch.setattr(settings, "MAX_LEAKAGE_ATOMS", 10)
    result = run_trials(ch, inputs, _config(4, UserRates(0.25), seed=1), trials=10, n_samples=0)
    assert result.leakage is None
    assert result.equivocation_margin is None


def test_n_statistic_counts_whole_subcodebook_when_loose():
    rng = seeded_rng(3)
    ch = sample_channel(rng, (2, 2), 2, 2)
    inputs = uniform_inputs(ch.input_sizes)
    cb = generate_codebooks(ch, inputs, _config(4, UserRates(0.25, 0.25, 0.25)))
    count, z_typical = n_statistic(cb, ch, [0, 1, 1, 0], 1, 0, 1e6)
    assert count == 16
    assert z_typical


def test_n_statistic_matches_recount():
    rng = seeded_rng(8)
    ch = sample_channel(rng, (2, 2), 2, 2)
    inputs = uniform_inputs(ch.input_sizes)
    cb = generate_codebooks(ch, inputs, _config(6, UserRates(1 / 6, 1 / 6, 1 / 3), seed=4))
    joint = (
        inputs[0].pmf[:, None, None] * inputs[1].pmf[None, :, None] * ch.eavesdropper_channel()
    ).ravel()
    z = [0, 1, 0, 0, 1, 1]
    for m1, m2 in itertools.product(range(2), repeat=2):
        expected = 0
        for l1 in cb.layouts[0].subcodebook(m1):
            for l2 in cb.layouts[1].subcodebook(m2):
                symbols = (cb.codewords[0][l1] * 2 + cb.codewords[1][l2]) * 2 + np.array(z)
                expected += typical_set_test(symbols, joint, 0.5)
        assert n_statistic(cb, ch, z, m1, m2, 0.5)[0] == expected


def test_bounds_with_silent_eavesdropper(xor_constant_z):
    ch, inputs = xor_constant_z
    bounds = theorem3_bounds(mi_bundle(ch, inputs), _config(4, UserRates(0.5), eps=0.1))
    assert bounds.delta == pytest.approx(0.0)
    assert bounds.delta_users == pytest.approx((0.0, 0.0))
    assert bounds.delta1 == pytest.approx(0.5)
    assert bounds.mean_bound == pytest.approx(4.0)
    assert bounds.var_bound == pytest.approx(4.0 + 2 * 4.0)


def test_bounds_use_effective_rates(noiseless_xor_z):
    ch, inputs = noiseless_xor_z
    cfg = _config(6, UserRates(1 / 6, 0.0, 0.5), eps=0.1)
    bounds = theorem3_bounds(mi_bundle(ch, inputs), cfg)
    assert bounds.delta == pytest.approx(0.0)
    assert bounds.delta_users == pytest.approx((0.5, 0.5))
    assert bounds.mean_bound == pytest.approx(8.0)
    assert bounds.tail_bound == pytest.approx(2 ** -3 + 2 * 2 ** -6)


def test_mean_n_statistic_below_bound(noiseless_xor_z):
    ch, inputs = noiseless_xor_z
    cfg = _config(6, UserRates(1 / 6, 0.0, 0.5), eps=0.1, seed=5)
    summary = sample_n_statistic(ch, inputs, cfg, samples=200)
    bounds = theorem3_bounds(mi_bundle(ch, inputs), cfg)
    assert summary.samples == 200
    assert summary.mean <= bounds.mean_bound
    assert 0.0 <= summary.typical_fraction <= 1.0


def test_fixed_codebook_n_statistic_summary(noiseless_xor_z):
    ch, inputs = noiseless_xor_z
    cfg = _config(4, UserRates(0.25, 0.0, 0.25), eps=2.0, seed=2)
    result = run_trials(ch, inputs, cfg, trials=20, n_samples=30)
    assert result.n_statistic.samples == 30
    assert 0 <= result.n_statistic.mean <= 4


def test_typicality_probability_loose_eps():
    rng = seeded_rng(12)
    ch = sample_channel(rng, (2, 2), 2, 2)
    inputs = uniform_inputs(ch.input_sizes)
    cfg = _config(4, UserRates(0.25, 0.25, 0.25), eps=1e6)
    result = typicality_probability(ch, inputs, cfg, [0, 1, 0, 1])
    assert result.probability == pytest.approx(1.0)
    assert result.expected_count == pytest.approx(16.0)


def test_typicality_probability_in_unit_interval(noiseless_xor_z):
    ch, inputs = noiseless_xor_z
    cfg = _config(4, UserRates(0.25), eps=0.5)
    result = typicality_probability(ch, inputs, cfg, [0, 1, 1, 0])
    assert 0.0 <= result.probability <= 1.0
    with pytest.raises(EnumerationLimitError):
        typicality_probability(ch, inputs, cfg, [0, 1, 1, 0], max_sequences=10)
