import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freelab.errors import ConfigError, DivergentMomentError, DomainError
from freelab.measures import (
    Beta,
    BooleanStable,
    DistributionSpec,
    FreePoisson,
    Power,
    ScaleMixture,
    Semicircle,
    SubHCM,
    Symmetrize,
    apply_power,
    apply_scale_mixture,
    apply_symmetrize,
    density_array,
    density_eval,
    moment,
    spec_from_dict,
    spec_to_dict,
    subhcm_normalize,
    support,
    total_mass,
)
from freelab.quadrature import integrate, integrate_algebraic_tail

SC = DistributionSpec(Semicircle(0.0, 1.0))
MP11 = DistributionSpec(FreePoisson(1.0, 1.0))
B = DistributionSpec(Beta(0.5, 1.5))


def test_density_examples():
    assert density_eval(SC, 0.0) == pytest.approx(1 / math.pi, rel=1e-14)
    assert density_eval(DistributionSpec(BooleanStable(0.5)), 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-13)
    v = density_eval(B, 0.25)
    assert v == pytest.approx(2 * math.sqrt(3) / math.pi, rel=1e-13)
    assert v == pytest.approx(density_eval(DistributionSpec(FreePoisson(1.0, 0.25)), 0.25), rel=1e-12)


def test_density_outside_support_is_zero():
    assert density_eval(SC, 3.0) == 0.0
    assert density_eval(B, 1.5) == 0.0


def test_density_at_atom_rejected():
    with pytest.raises(DomainError):
        density_eval(DistributionSpec(FreePoisson(0.25, 1.0)), 0.0)


def test_support_examples():
    s = support(DistributionSpec(FreePoisson(4.0, 1.0)))
    assert s.intervals == ((1.0, 9.0),) and s.atom_at_zero == 0.0
    s = support(DistributionSpec(FreePoisson(0.25, 1.0), (Power(2.0),)))
    (lo, hi), = s.intervals
    assert lo == pytest.approx(0.0625) and hi == pytest.approx(5.0625)
    assert s.atom_at_zero == pytest.approx(0.75)
    s = support(DistributionSpec(Semicircle(0, 1), (Power(2.0),)))
    (lo, hi), = s.intervals
    assert lo == pytest.approx(0.0, abs=1e-15) and hi == pytest.approx(4.0)


def test_negative_power_support_reversed():
    s = support(DistributionSpec(FreePoisson(2.0, 1.0), (Power(-2.0),)))
    a, b = (math.sqrt(2) - 1) ** 2, (math.sqrt(2) + 1) ** 2
    (lo, hi), = s.intervals
    assert lo == pytest.approx(b ** -2, rel=1e-12) and hi == pytest.approx(a ** -2, rel=1e-12)


def test_negative_power_matches_closed_form():
    # t = 1/2, p = 2: sqrt((B^t - x^t)(x^t - A^t)) / x^(t+1) * t / (2 pi)
    spec = DistributionSpec(FreePoisson(2.0, 1.0), (Power(-2.0),))
    (A, Bv), = support(spec).intervals
    x = 0.5 * (A + Bv)
    t = 0.5
    ref = t / (2 * math.pi) * math.sqrt((Bv ** t - x ** t) * (x ** t - A ** t)) / x ** (t + 1)
    assert density_eval(spec, x) == pytest.approx(ref, rel=1e-12)


def test_identity_power_and_normalisation():
    xs = np.linspace(0.05, 0.95, 7)
    np.testing.assert_allclose(density_array(apply_power(B, 1.0), xs), density_array(B, xs), rtol=1e-14)
    assert total_mass(apply_power(B, 2.0)) == pytest.approx(1.0, abs=1e-10)


def test_power_rules():
    with pytest.raises(ConfigError):
        Power(0.0)
    with pytest.raises(ConfigError):
        DistributionSpec(FreePoisson(0.5, 1.0), (Power(-1.0),))


def test_symmetrize():
    s = apply_symmetrize(B)
    assert density_eval(s, 0.25) == pytest.approx(math.sqrt(3) / math.pi, rel=1e-13)
    assert density_eval(s, -0.25) == pytest.approx(math.sqrt(3) / math.pi, rel=1e-13)
    assert total_mass(s) == pytest.approx(1.0, abs=1e-10)
    assert abs(moment(s, 1)) < 1e-10 and abs(moment(s, 3)) < 1e-10
    with pytest.raises(ConfigError):
        DistributionSpec(Semicircle(), (Symmetrize(),))
    with pytest.raises(ConfigError):
        DistributionSpec(Beta(1, 2), (Symmetrize(), Power(2.0)))


def test_scale_mixture():
    xs = np.array([0.1, 0.5, 1.0, 2.0, 7.0])
    bs = DistributionSpec(BooleanStable(0.5))
    np.testing.assert_allclose(density_array(apply_scale_mixture(bs, [1.0], [1.0]), xs), density_array(bs, xs),
                               rtol=1e-15)
    mix = apply_scale_mixture(bs, [0.5, 0.5], [1.0, 2.0])
    ref = 0.5 / (2 * math.pi) + 0.5 * 0.5 * (1 / math.pi) * 0.5 ** -0.5 / 1.5
    assert density_eval(mix, 1.0) == pytest.approx(ref, rel=1e-13)
    assert total_mass(apply_scale_mixture(B, [0.3, 0.7], [1.0, 2.5])) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ConfigError):
        ScaleMixture((0.5,), (1.0, 2.0))
    with pytest.raises(ConfigError):
        ScaleMixture((1.0,), (-1.0,))


def test_subhcm_normalize():
    assert subhcm_normalize(0.5, ((1.0, 1.0),)) == pytest.approx(1 / math.pi, rel=1e-12)
    assert subhcm_normalize(0.5, ((2.0, 1.0),)) == pytest.approx(math.sqrt(2) / math.pi, rel=1e-12)
    with pytest.raises(ConfigError):
        SubHCM(2.0, ((1.0, 1.0),))


@settings(max_examples=15, deadline=None)
@given(p=st.floats(0.2, 1.5), t1=st.floats(0.3, 3.0), g1=st.floats(0.8, 2.5), t2=st.floats(0.3, 3.0),
       g2=st.floats(0.2, 2.0))
def test_subhcm_normalised(p, t1, g1, t2, g2):
    spec = DistributionSpec(SubHCM(p, ((t1, g1), (t2, g2))))
    assert total_mass(spec) == pytest.approx(1.0, abs=1e-9)


def test_moments_examples():
    assert [moment(MP11, n) for n in range(1, 5)] == pytest.approx([1, 2, 5, 14], rel=1e-13)
    assert moment(SC, 2) == pytest.approx(1.0, abs=1e-10)
    assert moment(SC, 4) == pytest.approx(2.0, abs=1e-10)
    assert abs(moment(SC, 3)) < 1e-12
    half = DistributionSpec(FreePoisson(1.0, 1.0), (Power(0.5),))
    assert moment(half, 2) == pytest.approx(1.0, rel=1e-13)
    assert moment(half, 2, method="quad") == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(DivergentMomentError):
        moment(DistributionSpec(BooleanStable(0.5)), 1)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_closed_vs_quadrature_moments(r):
    spec = DistributionSpec(FreePoisson(1.0, 1.0), (Power(r),))
    for n in range(1, 7):
        c = moment(spec, n, method="closed")
        q = moment(spec, n, method="quad")
        assert abs(c - q) <= 1e-8 * max(1.0, abs(c))


def test_beta_half_is_mp_quarter():
    xs = np.linspace(0.01, 0.99, 50)
    diff = density_array(B, xs) - density_array(DistributionSpec(FreePoisson(1.0, 0.25)), xs)
    assert np.max(np.abs(diff)) < 1e-10


def test_semicircle_square_is_mp11():
    xs = np.linspace(0.01, 3.99, 60)
    s2 = DistributionSpec(Semicircle(0, 1), (Power(2.0),))
    assert np.max(np.abs(density_array(s2, xs) - density_array(MP11, xs))) < 1e-10


@settings(max_examples=30, deadline=None)
@given(r=st.floats(0.3, 3.0), x=st.floats(0.05, 0.95))
def test_pushforward_consistency(r, x):
    lhs = density_eval(apply_power(B, r), x ** r) * r * x ** (r - 1)
    assert lhs == pytest.approx(density_eval(B, x), rel=1e-10)


@pytest.mark.parametrize("spec", [
    SC,
    DistributionSpec(FreePoisson(0.25, 1.0)),
    DistributionSpec(FreePoisson(2.0, 1.0), (Power(-0.5),)),
    DistributionSpec(Beta(0.5, 1.5), (Power(2.0), Symmetrize())),
    DistributionSpec(SubHCM(0.5, ((1.0, 1.0),)), (Power(2.0),)),
    DistributionSpec(BooleanStable(0.5), (Power(-2.0),)),
])
def test_normalisation(spec):
    assert total_mass(spec) == pytest.approx(1.0, abs=1e-9)


def test_consecutive_powers_collapse():
    a = DistributionSpec(Beta(0.5, 1.5), (Power(2.0), Power(1.5)))
    b = DistributionSpec(Beta(0.5, 1.5), (Power(3.0),))
    xs = np.linspace(0.05, 0.95, 9)
    np.testing.assert_allclose(density_array(a, xs), density_array(b, xs), rtol=1e-12)


@pytest.mark.parametrize("spec", [
    SC,
    DistributionSpec(SubHCM(0.5, ((1.0, 1.0), (2.0, 0.5))), (Power(-2.0), ScaleMixture((0.5, 0.5), (1.0, 3.0)))),
    DistributionSpec(Beta(0.5, 1.5), (Power(2.0), Symmetrize())),
])
def test_spec_json_round_trip(spec):
    assert spec_from_dict(spec_to_dict(spec)) == spec


def test_spec_json_rejects_unknown_fields():
    with pytest.raises(ConfigError):
        spec_from_dict({"kind": {"type": "Beta", "p": 1, "q": 2, "x": 0}})
    with pytest.raises(ConfigError):
        spec_from_dict({"kind": {"type": "Beta", "p": 1, "q": 2}, "extra": 1})


def test_quadrature_endpoint_singularity():
    val, _ = integrate(lambda x: x ** -0.5 / (1 + x), 0.0, 1.0)
    assert val == pytest.approx(math.pi / 2, rel=1e-11)
    with np.errstate(over="ignore"):
        val, _ = integrate(lambda x: 1 / ((1 + x) * np.sqrt(x)), 0.0, math.inf)
    assert val == pytest.approx(math.pi, rel=1e-11)


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(0.01, 3.0))
def test_algebraic_tail(alpha):
    # int_1^inf x^(-1-alpha) dx = 1/alpha, even when alpha is tiny
    val, _ = integrate_algebraic_tail(lambda x: x ** (-1 - alpha), 1.0, alpha)
    assert val == pytest.approx(1 / alpha, rel=1e-10)


def test_fractional_moment_heavy_tail():
    # E[X^s] = 1/cos(pi s) for the Boolean 1/2-stable law, here s = 0.4
    spec = DistributionSpec(BooleanStable(0.5), (Power(0.2),))
    assert moment(spec, 2) == pytest.approx(1 / math.cos(0.4 * math.pi), rel=1e-10)
