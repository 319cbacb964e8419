import math

import numpy as np
import pytest
from scipy.stats import binom

from gmacsec.channel_model import builtin
from gmacsec.info_core import binary_entropy as h
from gmacsec.wiretap_sim import (ROW, Codebook, EnumerationBudgetError, SamplingError,
                                 build_codebook, check_invariants, corner_codebook,
                                 decode_destination, decode_eavesdropper, default_eps, encode,
                                 is_typical, make_partitions, measure_equivocation, sample_typical,
                                 simulate, superposition_inputs, transmit, trial_rng)


def _ones_codebook(words, cells=1):
    """User 1 words in one row; user 2 always sends ones."""
    words = np.asarray(words)
    n = words.shape[1]
    return Codebook.from_words(q=np.zeros((1, n)), x1=words[None, None], x2=np.ones((1, 1, 1, n)),
                               cells1=cells)


def test_typical_uniform_binary_counts():
    rng = trial_rng(0, 5)
    for _ in range(200):
        s = sample_typical(np.array([0.5, 0.5]), 8, 0.13, rng)
        assert 3 <= s.sum() <= 5


def test_typical_point_mass():
    s = sample_typical(np.array([0.0, 1.0, 0.0]), 12, 0.05, trial_rng(1, 0))
    assert np.all(s == 1)


def test_typical_acceptance_rate_matches_binomial():
    # one candidate per call: the success fraction is the acceptance probability
    target = binom.pmf([7, 8, 9], 16, 0.5).sum()
    rng = trial_rng(2, 0)
    trials, hits = 4000, 0
    for _ in range(trials):
        try:
            sample_typical(np.array([0.5, 0.5]), 16, 0.07, rng, budget=1)
            hits += 1
        except SamplingError:
            pass
    sd = math.sqrt(target * (1 - target) / trials)
    assert abs(hits / trials - target) < 4 * sd


def test_typical_budget_exhausted():
    with pytest.raises(SamplingError):
        sample_typical(np.array([0.3, 0.7]), 5, 0.01, trial_rng(0, 0), budget=1000)


def test_default_eps():
    assert default_eps(8) == 0.1 and default_eps(16) == 0.1
    assert default_eps(32) == 0.05


def test_degenerate_single_row_codebook():
    cb = build_codebook(builtin("degraded_binary", p=0.3), superposition_inputs(0.2), 4,
                        0.0, 0.01, 0.0, seed=1)
    assert cb.A == cb.B == cb.S == cb.T == cb.M0 == 1
    stats = measure_equivocation(cb, *make_partitions(1, 1, 1, 1),
                                 builtin("degraded_binary", p=0.3), 20, seed=1)
    assert stats.lam == 0.0


def test_corner_codebook_bypass():
    cb, g1, g2 = corner_codebook()
    assert cb.n == 1 and cb.A == 2 and cb.B == 1 and cb.user1.cells == 1
    assert cb.x1[0, :, 0, 0].tolist() == [0, 1]
    assert cb.x2[0, 0, 0, 0] == 1


def test_codebook_deterministic():
    ch = builtin("degraded_binary", p=0.3)
    a = build_codebook(ch, superposition_inputs(0.25), 10, 0.2, 0.6, 0.0, seed=9)
    b = build_codebook(ch, superposition_inputs(0.25), 10, 0.2, 0.6, 0.0, seed=9)
    assert np.array_equal(a.x1, b.x1) and np.array_equal(a.q, b.q) and a.user1 == b.user1
    c = build_codebook(ch, superposition_inputs(0.25), 10, 0.2, 0.6, 0.0, seed=10)
    assert not np.array_equal(a.x1, c.x1)


def test_codewords_are_typical():
    cb = build_codebook(builtin("degraded_binary", p=0.3), superposition_inputs(0.25), 16, 0.1,
                        0.5, 0.0, seed=3)
    for q in cb.q:
        assert is_typical(q, np.array([0.5, 0.5]), cb.eps)


@pytest.mark.parametrize("B, J, sizes", [(8, 4, [2, 2, 2, 2]), (7, 3, [3, 2, 2]), (5, 5, [1] * 5)])
def test_partition_sizes(B, J, sizes):
    g, _ = make_partitions(B, J, 1, 1)
    assert sorted(g.sizes().tolist(), reverse=True) == sizes
    assert g.balance() <= 2
    if J == B:
        assert g.assignment.tolist() == list(range(B))


def test_partition_balance_everywhere():
    for B in range(1, 40):
        for J in range(1, B + 1):
            assert make_partitions(B, J, 1, 1)[0].balance() <= 2
    with pytest.raises(ValueError):
        make_partitions(3, 4, 1, 1)


def test_encoder_column_choice():
    words = np.arange(8)[:, None] >> np.arange(3) & 1
    cb = _ones_codebook(words, cells=1)
    g1, g2 = make_partitions(8, 1, 1, 1)
    picks = [encode(cb, g1, g2, 0, 0, 0, trial_rng(0, 1, k))[2][2] for k in range(4000)]
    counts = np.bincount(picks, minlength=8)
    assert counts.min() > 400
    cb = _ones_codebook(words, cells=8)
    g1, g2 = make_partitions(8, 8, 1, 1)
    for j in range(8):
        assert encode(cb, g1, g2, 0, j, 0, trial_rng(0, 1, j))[2][2] == j
    with pytest.raises(IndexError):
        encode(cb, g1, g2, 0, 8, 0, trial_rng(0, 1))


def test_transmit_examples():
    rng = trial_rng(4, 1)
    x1 = rng.integers(2, size=5000)
    x2 = rng.integers(2, size=5000)
    y, _, y2 = transmit(builtin("multiplier_bias"), x1, x2, rng)
    assert np.array_equal(y, x1 * x2)
    assert np.array_equal(y2, (x1 <= x2).astype(int))
    y, _, y2 = transmit(builtin("degraded_binary", p=0.0), x1, x2, rng)
    assert np.array_equal(y, y2)
    y, _, y2 = transmit(builtin("degraded_binary", p=0.5), x1, x2, rng)
    flips = np.mean(y != y2)
    assert abs(flips - 0.5) < 4 * math.sqrt(0.25 / 5000)


def test_destination_decoder_noiseless_and_ties():
    ch = builtin("multiplier_bias")
    words = np.array([[0, 0, 1], [0, 1, 1], [1, 1, 1], [1, 0, 0]])
    cb = Codebook.from_words(q=np.zeros((1, 3)), x1=words[None, :, None], x2=np.ones((1, 1, 1, 3)),
                             scheme1=ROW)
    for a, w in enumerate(words):
        assert decode_destination(cb, ch, w * 1) == (0, a, 0, 0, 0)
    twins = np.array([[0, 1, 1], [0, 1, 1]])
    cb = Codebook.from_words(q=np.zeros((1, 3)), x1=twins[None, :, None], x2=np.ones((1, 1, 1, 3)),
                             scheme1=ROW)
    assert decode_destination(cb, ch, np.array([0, 1, 1])) == (0, 0, 0, 0, 0)
    g1, g2 = make_partitions(1, 1, 1, 1)
    stats = measure_equivocation(cb, g1, g2, ch, 400, seed=2)
    assert 0.35 < stats.lam < 0.65


def test_eavesdropper_examples():
    ch = builtin("multiplier_bias")
    cb = _ones_codebook(np.array([[0, 1, 1, 0]]))
    assert decode_eavesdropper(cb, ch, np.ones(4, int), (0, 0, 0, 0)) == 0
    # with x2 = 1 user 2 always observes y2 = 1 and must guess
    words = np.arange(4)[:, None] >> np.arange(4) & 1
    cb = _ones_codebook(words)
    g1, g2 = make_partitions(4, 1, 1, 1)
    stats = measure_equivocation(cb, g1, g2, ch, 2000, seed=5)
    assert stats.lam1 == pytest.approx(0.75, abs=0.04)


def test_noiseless_eavesdropper_learns_everything():
    rng = trial_rng(6, 9)
    ch = builtin("degraded_binary", p=0.0)
    vals = []
    for n in (8, 16):
        words = rng.integers(2, size=(2 ** (n // 4), n))
        cb = _ones_codebook(words, cells=len(words))
        g1, g2 = make_partitions(len(words), len(words), 1, 1)
        vals.append(measure_equivocation(cb, g1, g2, ch, 200, seed=n).equivocation1)
    assert vals[1] <= vals[0] and vals[1] < 0.01


def test_corner_construction_is_perfectly_secret():
    cb, g1, g2 = corner_codebook()
    stats = measure_equivocation(cb, g1, g2, builtin("multiplier_bias"), 500, seed=0)
    assert stats.equivocation1 == 1.0 and stats.lam == 0.0
    assert stats.meta["equivocation1_min"] == stats.meta["equivocation1_max"] == 1.0


def test_simulation_deterministic_and_within_ceiling():
    ch = builtin("degraded_binary", p=0.3)
    d = superposition_inputs(0.25)
    a, _ = simulate(ch, d, 10, 0.2, 0.6, 0.0, 150, seed=21)
    b, _ = simulate(ch, d, 10, 0.2, 0.6, 0.0, 150, seed=21)
    assert a.record() == b.record()
    assert a.meta["equivocation1_max"] <= a.meta["realized_rates"]["R1"] + 1e-9
    assert check_invariants(a) == []


def test_map_decoder_beats_typicality():
    ch = builtin("degraded_binary", p=0.3)
    d = superposition_inputs(0.25)
    for seed in (1, 2, 3):
        m, _ = simulate(ch, d, 8, 0.2, 0.5, 0.0, 300, seed=seed, mode="map")
        t, _ = simulate(ch, d, 8, 0.2, 0.5, 0.0, 300, seed=seed, mode="typicality")
        assert m.lam <= t.lam


def test_regimes_follow_rates():
    ch = builtin("degraded_binary", p=0.3)
    d = superposition_inputs(0.25)
    leak = d.information(ch)["leak1"]
    assert leak == pytest.approx(h(0.25 * 0.7 + 0.75 * 0.3) - h(0.3), abs=1e-12)
    cb = build_codebook(ch, d, 8, 0.0, leak / 2, 0.0, seed=0)
    assert cb.user1.regime == "no_secrecy" and cb.B == 1
    cb = build_codebook(ch, d, 8, 0.0, 0.6, 0.0, seed=0, R1=0.1)
    assert cb.user1.regime == "row"
    cb = build_codebook(ch, d, 8, 0.0, 0.6, 0.0, seed=0)
    assert cb.user1.regime == "binning"


def test_rates_outside_region_give_high_error():
    ch = builtin("degraded_binary", p=0.3)
    stats, _ = simulate(ch, superposition_inputs(0.25), 8, 0.6, 0.9, 0.0, 200, seed=8)
    assert stats.lam > 0.8


def test_enumeration_budget():
    ch = builtin("degraded_binary", p=0.3)
    with pytest.raises(EnumerationBudgetError):
        build_codebook(ch, superposition_inputs(0.5), 24, 0.5, 0.5, 0.0, seed=0, eps=0.2)
    # a hand-made codebook small enough to store but too large to decode jointly
    cb = Codebook.from_words(q=np.zeros((1, 2)), x1=np.zeros((1, 1024, 1, 2)),
                             x2=np.zeros((1, 1025, 1, 2)))
    with pytest.raises(EnumerationBudgetError):
        decode_destination(cb, ch, np.zeros(2, int))
