import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from freelab.cumulants import (
    CumulantSequence,
    MomentSequence,
    condition_number,
    cumulants_by_partitions,
    free_cumulants,
    functional_at,
    hankel_functional,
    hankel_report,
    is_moment_sequence,
    moments_by_partitions,
    moments_from_cumulants,
    moments_mp_power,
    negative_intervals,
    noncrossing_partitions,
    nc_mobius,
    required_order,
    scan_sign,
)
from freelab.errors import ConfigError, DomainError


def catalan(n):
    return math.comb(2 * n, n) // (n + 1)


def test_free_cumulant_examples():
    assert free_cumulants(MomentSequence((1, 2, 5, 14))).values == (1, 1, 1, 1)
    assert free_cumulants((0, 1, 0, 2)).values == (0, 1, 0, 0)
    lam = Fraction(3)
    # MP(3,1): moments from K_n = 3 through the partition sum
    m = moments_by_partitions((lam,) * 5)
    assert m.values[:2] == (lam, lam + lam ** 2)
    assert free_cumulants(m).values == (lam,) * 5


def test_float_path_uses_floats():
    K = free_cumulants((1.0, 2.0, 5.0, 14.0))
    assert all(isinstance(v, float) for v in K.values)
    assert K.values == pytest.approx((1, 1, 1, 1), abs=1e-13)


def test_noncrossing_counts_are_catalan():
    for n in range(1, 9):
        assert len(noncrossing_partitions(n)) == catalan(n)


def test_mobius_values():
    # mu(0_n, 1_n) = (-1)^(n-1) Cat_(n-1)
    for n in range(1, 7):
        finest = tuple((i,) for i in range(n))
        assert nc_mobius(finest, n) == (-1) ** (n - 1) * catalan(n - 1)
        assert nc_mobius((tuple(range(n)),), n) == 1


fractions = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@settings(max_examples=40, deadline=None)
@given(st.lists(fractions, min_size=1, max_size=7))
def test_oracle_equivalence(vals):
    m = tuple(vals)
    K = free_cumulants(m)
    assert K.values == cumulants_by_partitions(m).values
    assert moments_by_partitions(K).values == m
    assert moments_from_cumulants(K).values == m


@settings(max_examples=30, deadline=None)
@given(st.lists(fractions, min_size=2, max_size=6), fractions)
def test_shift_covariance(vals, c):
    # moments of X + c from the binomial expansion
    m = [Fraction(1)] + list(vals)
    shifted = tuple(sum(math.comb(n, k) * m[k] * c ** (n - k) for k in range(n + 1)) for n in range(1, len(m)))
    K, Ks = free_cumulants(tuple(vals)), free_cumulants(shifted)
    assert Ks.values[0] == K.values[0] + c
    assert Ks.values[1:] == K.values[1:]


@settings(max_examples=30, deadline=None)
@given(st.lists(fractions, min_size=1, max_size=6))
def test_scaling(vals):
    c = Fraction(2)
    K = free_cumulants(tuple(vals))
    Kc = free_cumulants(tuple(c ** n * v for n, v in enumerate(vals, start=1)))
    assert Kc.values == tuple(c ** n * k for n, k in enumerate(K.values, start=1))


def test_semicircle_cumulants_vanish():
    m = tuple(0 if n % 2 else catalan(n // 2) for n in range(1, 13))
    K = free_cumulants(m)
    assert K.values[1] == 1
    assert all(k == 0 for i, k in enumerate(K.values) if i != 1)
    assert hankel_functional(K, "h22") == 0
    assert hankel_functional(K, "k6") == 0


def test_moments_mp_power_examples():
    assert moments_mp_power(1, 4, precision="exact").values == (1, 2, 5, 14)
    assert moments_mp_power(1, 4, symmetrized=True).values == pytest.approx((0, 1, 0, 2), abs=1e-14)
    assert moments_mp_power(2, 1).values[0] == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(DomainError):
        moments_mp_power(-1, 4)
    with pytest.raises(ConfigError):
        moments_mp_power(1, 41)


def test_exact_rational_catalan():
    m = moments_mp_power(Fraction(1), 12, precision="exact")
    assert m.values == tuple(Fraction(catalan(n)) for n in range(1, 13))
    with pytest.raises(ConfigError):
        moments_mp_power(0.5, 3, precision="exact")


def test_large_exponent_no_overflow():
    m = moments_mp_power(3.7, 40)
    assert all(math.isfinite(v) and v > 0 for v in m.values)


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_quadrature_source_matches_closed_form(r):
    q = moments_mp_power(r, 6, source="quadrature").values
    c = moments_mp_power(r, 6).values
    for a, b in zip(q, c):
        assert abs(a - b) <= 1e-8 * max(1.0, b)


def test_mp_power_moments_are_moment_sequences():
    for r in (0.3, 1.0, 2.5):
        assert is_moment_sequence(moments_mp_power(r, 10))
        assert is_moment_sequence(moments_mp_power(r, 10, symmetrized=True))
    assert not is_moment_sequence((0.0, 1.0, 0.0, 0.5))  # m4 < m2^2


def test_hankel_functional_examples():
    ones = CumulantSequence((1,) * 14)
    assert hankel_functional(ones, "h22") == 0
    threes = CumulantSequence((3,) * 6)
    assert hankel_functional(threes, "h22") == 0
    K = CumulantSequence(tuple(Fraction(n) for n in range(1, 15)))
    assert hankel_functional(K, "sym_h") == 2 * 6 - 4 ** 2
    assert hankel_functional(K, "minor(0)") == 2
    assert hankel_functional(K, "minor(1)") == 2 * 4 - 3 * 3
    # det of (K_{2i+2j-2}) with K_n = n is a rank-2 Hankel matrix
    assert hankel_functional(K, "sym_det4") == 0


def test_hankel_functional_errors():
    with pytest.raises(ConfigError):
        hankel_functional(CumulantSequence((1, 1, 1)), "h22")
    with pytest.raises(ConfigError):
        hankel_functional(CumulantSequence((1,) * 14), "nope")
    assert required_order("sym_det4") == 14
    assert required_order("minor(3)") == 8


def test_h22_vanishes_at_r1_exactly():
    K = free_cumulants(moments_mp_power(1, 4, precision="exact"))
    assert K.values == (1, 1, 1, 1)
    assert hankel_functional(K, "h22") == 0


def test_det4_condition_reported():
    rep = hankel_report("sym_det4", 1.8)
    assert rep.value < 0
    assert rep.condition is not None and rep.condition > 1
    assert condition_number(CumulantSequence((1.0,) * 6), "h22") is None


def test_extended_precision_matches_double_for_mild_functional():
    with mpmath.workdps(50):
        v50 = float(functional_at("h22", 0.6))
    v16 = hankel_functional(free_cumulants(moments_mp_power(0.6, 4)), "h22")
    assert v16 == pytest.approx(v50, rel=1e-9)


def test_scan_sign_h22():
    br = scan_sign("h22", 0.2, 0.99)
    assert len(br) == 1
    b = br[0]
    assert b.refined_root == pytest.approx(0.35, abs=0.02)
    lo, hi = b.interval
    assert lo <= b.refined_root <= hi and b.tol <= 5e-7
    assert functional_at("h22", lo) * functional_at("h22", hi) < 0


def test_scan_sign_k6():
    roots = [b.refined_root for b in scan_sign("k6", 0.3, 0.5)]
    assert roots == [pytest.approx(0.335, abs=0.02), pytest.approx(0.42, abs=0.02)]


def test_scan_sign_sym_det4():
    roots = [b.refined_root for b in scan_sign("sym_det4", 1.5, 2.0)]
    assert roots == [pytest.approx(1.68, abs=0.03), pytest.approx(1.94, abs=0.03)]


def test_scan_workers_do_not_change_output():
    a = scan_sign("k6", 0.3, 0.5, workers=1)
    b = scan_sign("k6", 0.3, 0.5, workers=2)
    assert a == b


def test_scan_sign_validation():
    with pytest.raises(ConfigError):
        scan_sign("h22", 0.5, 0.4)
    with pytest.raises(ConfigError):
        scan_sign("h22", 0.2, 0.5, step=0.02)
    assert scan_sign("h22", 0.5, 0.6) == []


def test_negative_intervals():
    assert negative_intervals([0, 1, 2, 3, 4], [1, -1, -2, 1, -1]) == [(1, 2), (4, 4)]
