"""Probability/fidelity conversion bounds and their constructive checks."""

import math

import numpy as np
import pytest

from concentrate import (
    EpsTooLargeError,
    SizeOrderError,
    SizeOutOfRangeError,
    TTooSmallError,
    best_fidelity_to_target,
    fidelity_to_prob_params,
    recovery_bound,
    new_spectrum,
    optimal_probability,
    prob_to_fidelity,
    verify_fidelity_conversion,
    verify_recovery_bound,
)
from conftest import near_uniform_spectrum, random_spectrum


def test_prob_to_fidelity_examples():
    assert prob_to_fidelity(1.0, 5, 5) == 1.0
    assert prob_to_fidelity(0.5, 2, 4) == pytest.approx(0.25, abs=1e-15)
    eps = 0.125
    assert prob_to_fidelity(1 - eps, 8, 8) == pytest.approx(1 - eps, abs=1e-15)
    with pytest.raises(SizeOrderError):
        prob_to_fidelity(0.9, 5, 4)


def test_prob_to_fidelity_monotonicity():
    assert prob_to_fidelity(0.6, 3, 6) > prob_to_fidelity(0.5, 3, 6)
    assert prob_to_fidelity(0.6, 4, 6) > prob_to_fidelity(0.6, 3, 6)
    assert prob_to_fidelity(0.6, 3, 7) < prob_to_fidelity(0.6, 3, 6)


def test_fidelity_to_prob_params_examples():
    assert fidelity_to_prob_params(60, 0.0) == (10, 1.0)
    size, bound = fidelity_to_prob_params(100, 0.01)
    assert size == 15 and bound == pytest.approx(0.94, abs=1e-15)
    with pytest.raises(EpsTooLargeError):
        fidelity_to_prob_params(100, 1 / 6)
    with pytest.raises(TTooSmallError):
        fidelity_to_prob_params(6, 0.0)
    with pytest.raises(TTooSmallError):
        fidelity_to_prob_params(7, 0.1)  # floor(7 * 0.4 / 6) = 0


def test_recovery_bound_examples():
    # vacuous exactly when T * F = 1
    assert recovery_bound(4, 0.25) == pytest.approx(0.0, abs=1e-15)
    assert recovery_bound(100, 1.0) == pytest.approx(9.0 / math.log(100.0), abs=1e-12)
    assert recovery_bound(4, 0.04) < 0.0
    with pytest.raises(SizeOutOfRangeError):
        recovery_bound(1, 0.5)


def test_recovery_bound_uses_natural_log():
    # distinguishable from a base-2 implementation at T = 4
    got = recovery_bound(4, 1.0)
    assert got == pytest.approx(1.0 / math.log(4.0), abs=1e-12)
    assert abs(got - 1.0 / math.log2(4.0)) > 0.1


def test_recovery_bound_never_exceeds_sqrt_t():
    for t in range(2, 400, 13):
        assert recovery_bound(t, 1.0) <= math.sqrt(t)


def test_best_fidelity_examples():
    flat = new_spectrum([0.25] * 4)
    assert best_fidelity_to_target(flat, 4) == pytest.approx(1.0, abs=1e-12)
    p = new_spectrum([0.5, 0.3, 0.2])
    expected = (math.sqrt(0.5) + math.sqrt(0.3)) ** 2 / 2
    assert best_fidelity_to_target(p, 2) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(SizeOutOfRangeError):
        best_fidelity_to_target(p, 4)


def test_verify_recovery_bound_uniform_case():
    d = 9
    flat = new_spectrum([1.0 / d] * d, renormalize=True)
    check = verify_recovery_bound(flat, d)
    assert check.fidelity == pytest.approx(1.0, abs=1e-12)
    assert check.best_sqrt_pl == pytest.approx(math.sqrt(d), abs=1e-9)
    assert check.holds


def test_verify_recovery_bound_example_spectrum():
    check = verify_recovery_bound(new_spectrum([0.5, 0.3, 0.2]), 3)
    assert check.holds
    assert check.best_sqrt_pl >= check.bound


def test_verify_recovery_bound_no_violations_randomized():
    rng = np.random.default_rng(83)
    for _ in range(60):
        d = int(rng.integers(2, 24))
        p = random_spectrum(rng, d, floor=0.2 / d)
        for t in range(2, d + 1):
            assert verify_recovery_bound(p, t).holds


def test_verify_fidelity_conversion_uniform_passes_without_stripping():
    d = 12
    flat = new_spectrum([1.0 / d] * d, renormalize=True)
    check = verify_fidelity_conversion(flat, d)
    assert check.eps == pytest.approx(0.0, abs=1e-12)
    assert check.stripped_count == 0 and check.stripped_mass == 0.0
    assert check.all_ok
    assert check.promised_size == d // 6


def test_verify_fidelity_conversion_example_spectrum():
    check = verify_fidelity_conversion(new_spectrum([0.3, 0.25, 0.25, 0.2]), 4)
    assert check.all_ok
    assert check.mass_ok and check.cap_ok and check.size_ok and check.prob_ok


def test_verify_fidelity_conversion_rejects_poor_fidelity():
    skew = new_spectrum([0.9] + [0.1 / 15] * 15, renormalize=True)
    with pytest.raises(EpsTooLargeError):
        verify_fidelity_conversion(skew, 16)


def test_verify_fidelity_conversion_no_violations_near_uniform():
    rng = np.random.default_rng(89)
    for _ in range(60):
        d = int(rng.integers(7, 65))
        p = near_uniform_spectrum(rng, d)
        check = verify_fidelity_conversion(p, d)
        assert check.eps < 1 / 6
        assert check.all_ok


def test_fidelity_route_not_worse_at_equal_size():
    rng = np.random.default_rng(97)
    for _ in range(30):
        d = int(rng.integers(2, 10))
        p = random_spectrum(rng, d)
        size = int(rng.integers(1, d + 1))
        prob = optimal_probability(p, size)
        assert prob_to_fidelity(prob, size, size) >= prob - 1e-15
