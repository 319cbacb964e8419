import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmacsec.info_core import (FiniteDist, InconsistentInformationError, binary_entropy,
                               binary_epi_floor, cond_mi_array, cond_mutual_info, entropy,
                               inverse_binary_entropy, star, xor_noise_output)

# high-precision values computed with mpmath at 50 digits
H_QUARTER = 0.8112781244591328
INV_H = 0.2499999845680059
EPI_FLOOR = 0.887317241972850867


def _random_joint(rng, shape):
    m = rng.random(shape) ** 3
    return m / m.sum()


def _brute_cond_mi(p):
    """I(A;B|C) over axes (a, b, c) by a plain triple loop."""
    pc = p.sum(axis=(0, 1))
    pac = p.sum(axis=1)
    pbc = p.sum(axis=0)
    total = 0.0
    for a, b, c in itertools.product(*map(range, p.shape)):
        if p[a, b, c] > 0:
            total += p[a, b, c] * math.log2(p[a, b, c] * pc[c] / (pac[a, c] * pbc[b, c]))
    return total


def test_binary_entropy_values():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.25) == pytest.approx(H_QUARTER, abs=1e-14)


def test_binary_entropy_rejects_outside_unit_interval():
    with pytest.raises(ValueError):
        binary_entropy(1.2)


def test_inverse_binary_entropy_values():
    assert inverse_binary_entropy(1.0) == 0.5
    assert inverse_binary_entropy(0.0) == 0.0
    assert inverse_binary_entropy(0.8112781) == pytest.approx(INV_H, abs=1e-11)
    with pytest.raises(ValueError):
        inverse_binary_entropy(-0.1)


def test_inverse_roundtrip_on_grid():
    for c in np.linspace(0.0, 1.0, 10_001):
        assert abs(binary_entropy(inverse_binary_entropy(c)) - c) <= 1e-10


def test_star_values():
    assert star(0.5, 0.3) == 0.5
    assert star(0.0, 0.3) == 0.3
    assert star(0.25, 0.25) == 0.375


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_star_commutative_and_associative(a, b, c):
    assert star(a, b) == pytest.approx(star(b, a), abs=1e-14)
    assert star(a, star(b, c)) == pytest.approx(star(star(a, b), c), abs=1e-14)


def test_epi_floor_values():
    assert binary_epi_floor(1.0, 0.2) == pytest.approx(1.0, abs=1e-12)
    assert binary_epi_floor(0.0, 0.2) == pytest.approx(binary_entropy(0.2), abs=1e-12)
    assert binary_epi_floor(0.8112781, 0.11) == pytest.approx(EPI_FLOOR, abs=1e-9)
    with pytest.raises(ValueError):
        binary_epi_floor(0.5, 0.0)


@pytest.mark.parametrize("rho", [0.05, 0.11, 0.25])
def test_epi_floor_strictly_convex(rho):
    u = np.linspace(0.0, 1.0, 1001)
    f = np.array([binary_epi_floor(x, rho) for x in u])
    assert np.all(np.diff(f, 2) > 0)


def test_epi_floor_flat_at_half_crossover():
    u = np.linspace(0.0, 1.0, 1001)
    f = np.array([binary_epi_floor(x, 0.5) for x in u])
    assert np.all(np.abs(f - 1.0) <= 1e-12)


def test_entropy_examples():
    assert entropy(FiniteDist(np.full(4, 0.25)), [0]) == pytest.approx(2.0)
    assert entropy(FiniteDist(np.array([1.0, 0, 0])), [0]) == 0.0
    d = FiniteDist(np.array([[0.1, 0.15], [0.2, 0.55]]), ("a", "b"))
    assert entropy(d, ["a"]) == pytest.approx(binary_entropy(0.25), abs=1e-14)


def test_finite_dist_validation():
    with pytest.raises(ValueError):
        FiniteDist(np.array([0.5, 0.4]))
    with pytest.raises(ValueError):
        FiniteDist(np.array([1.2, -0.2]))
    with pytest.raises(KeyError):
        entropy(FiniteDist(np.array([0.5, 0.5]), ("a",)), ["b"])


def test_mutual_information_examples():
    indep = FiniteDist(np.full((2, 2), 0.25))
    assert cond_mutual_info(indep, [0], [1]) == 0.0
    same = FiniteDist(np.diag([0.5, 0.5]))
    assert cond_mutual_info(same, [0], [1]) == pytest.approx(1.0)
    # y = x1 * x2 with uniform independent inputs; axes (x1, x2, y)
    m = np.zeros((2, 2, 2))
    for a, b in itertools.product(range(2), repeat=2):
        m[a, b, a * b] = 0.25
    assert cond_mutual_info(FiniteDist(m), [0], [2], [1]) == pytest.approx(0.5, abs=1e-14)


def test_negative_information_raises():
    # unnormalized mass: entropies no longer come from one joint law
    bad = np.full((2, 2), 0.5)
    with pytest.raises(InconsistentInformationError):
        cond_mi_array(bad, [0], [1])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.tuples(*[st.integers(1, 3)] * 3))
def test_cond_mi_matches_triple_loop(seed, shape):
    p = _random_joint(np.random.default_rng(seed), shape)
    assert cond_mutual_info(FiniteDist(p), [0], [1], [2]) == pytest.approx(_brute_cond_mi(p), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_chain_rule(seed):
    d = FiniteDist(_random_joint(np.random.default_rng(seed), (2, 3, 3)))
    lhs = cond_mutual_info(d, [0, 1], [2])
    rhs = cond_mutual_info(d, [0], [2]) + cond_mutual_info(d, [1], [2], [0])
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_xor_noise_output_single_bit():
    py = xor_noise_output(np.array([1.0, 0.0]), 0.2)
    assert np.allclose(py, [0.8, 0.2])
    assert xor_noise_output(np.full(8, 1 / 8), 0.3) == pytest.approx(np.full(8, 1 / 8))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.floats(1e-3, 0.5))
def test_vector_output_entropy_above_floor(n, seed, p0):
    px = _random_joint(np.random.default_rng(seed), (2 ** n,))
    hx = entropy(FiniteDist(px), [0])
    hy = entropy(FiniteDist(xor_noise_output(px, p0)), [0])
    assert hy >= n * binary_epi_floor(min(hx / n, 1.0), p0) - 1e-9
