from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

import oracles
from quantum3d import _pykernels
from quantum3d.kernel import ParamPoly, TruncationError, ZSeries, rational

try:
    from quantum3d import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

V = ParamPoly.var
a1, a2, c1, c2, rho = V("a1"), V("a2"), V("c1"), V("c2"), V("rho")

small = st.fractions(min_value=-4, max_value=4, max_denominator=4)
names = st.sampled_from(["a1", "a2", "c1", "c2", "rho"])


@st.composite
def polys(draw, max_terms=4):
    p = ParamPoly.zero()
    for _ in range(draw(st.integers(0, max_terms))):
        term = ParamPoly.const(draw(small))
        for n in draw(st.lists(names, max_size=3)):
            term = term * V(n)
        p = p + term
    return p


@st.composite
def series(draw, order=4):
    return ZSeries([draw(polys(2)) for _ in range(order + 1)], order)


# -- rationals ------------------------------------------------------------------

def test_rational_parses_strings_exactly():
    assert rational("2/3") == mpq(2, 3)
    assert rational("-4/6") == mpq(-2, 3)
    assert rational(Fraction(1, 7)) == mpq(1, 7)


@pytest.mark.parametrize("bad", ["1/0", "x", "1.5", "", "2/-3"])
def test_rational_rejects_malformed(bad):
    with pytest.raises((ValueError, ZeroDivisionError)):
        rational(bad)


def test_rational_rejects_floats():
    with pytest.raises(TypeError):
        rational(0.5)


# -- polynomial arithmetic ----------------------------------------------------------

def test_jacobi_inner_product_expands():
    assert (a2 * c1) * (1 + rho) == a2 * c1 + a2 * c1 * rho


def test_product_with_zero_annihilates():
    assert (a2 * c1 + rho) * ParamPoly.zero() == ParamPoly.zero()


def test_difference_of_squares():
    assert (a1 + a2) * (a1 - a2) == a1 ** 2 - a2 ** 2


def test_rho_one_trivializes_the_jacobi_condition():
    jac = (1 - rho) * (a2 * c1 * (1 + rho) - a1 * c2)
    assert jac.substitute({"rho": 1}).is_zero()


def test_substitute_with_empty_bindings_is_identity():
    p = a2 * c1 * (1 + rho) - a1 * c2
    assert p.substitute({}) == p


def test_direct_evaluation():
    p = a2 * c1 * (1 + rho) - a1 * c2
    got = p.substitute({"a2": 1, "c1": 1, "rho": -3, "a1": 2, "c2": 1})
    assert got.is_constant() and got.constant_value() == -4


def test_substitute_rejects_unknown_names():
    with pytest.raises(ValueError):
        a1.substitute({"zeta": 1})


def test_public_constructor_rejects_unknown_variable():
    with pytest.raises((KeyError, ValueError)):
        V("u0")


def test_divide_exact():
    p = (a1 - a2) * (c1 + 2)
    assert p.divide_exact(a1 - a2) == c1 + 2
    assert (a1 + 1).divide_exact(a2) is None


@given(polys(), polys(), polys())
def test_polynomial_ring_axioms(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p * q == q * p
    assert p - p == ParamPoly.zero()


@given(polys(), polys(), st.dictionaries(names, small, max_size=5))
def test_substitution_is_a_ring_homomorphism(p, q, b):
    assert (p * q).substitute(b) == p.substitute(b) * q.substitute(b)
    assert (p + q).substitute(b) == p.substitute(b) + q.substitute(b)


# -- series ----------------------------------------------------------------------------

def z(order, *coeffs):
    return ZSeries(list(coeffs), order)


def test_truncated_product_drops_high_orders():
    assert z(1, 1, 1) * z(1, 1, -1) == z(1, 1, 0)


def test_sinh_prefix_squared_matches_schoolbook():
    s = z(4, 0, 1, 0, mpq(1, 6), 0)
    expected = oracles.series_mul([0, 1, 0, Fraction(1, 6), 0], [0, 1, 0, Fraction(1, 6), 0], 4)
    assert expected == [0, 0, 1, 0, Fraction(1, 3)]
    assert s * s == z(4, *(mpq(c.numerator, c.denominator) for c in expected))


def test_additive_identity():
    s = z(3, 1, a1, 0, rho)
    assert s + ZSeries.zero(3) == s


def test_negate_z_flips_odd_coefficients():
    assert z(2, a1, a2, c1).negate_z() == z(2, a1, -a2, c1)


def test_div_z():
    assert z(4, 0, 1, 0, mpq(1, 6), 0).div_z() == z(3, 1, 0, mpq(1, 6), 0)


def test_parity():
    assert z(3, 1, 0, mpq(1, 6), 0).parity_check("even")
    assert not z(3, 1, 1, 0, 0).parity_check("even")
    assert z(3, 0, 1, 0, 2).is_odd()


def test_mixed_orders_raise():
    with pytest.raises(TruncationError):
        z(2, 1) + z(3, 1)


@given(series(), series(), series())
def test_series_ring_axioms(s, t, u):
    assert (s * t) * u == s * (t * u)
    assert s * (t + u) == s * t + s * u
    assert s * t == t * s


@given(series(), series())
def test_series_product_matches_schoolbook(s, t):
    env = {"a1": 2, "a2": -1, "c1": mpq(1, 3), "c2": 5, "rho": mpq(-3, 2)}
    num = [oracles.frac(c.substitute(env).constant_value()) for c in s.coeffs()]
    den = [oracles.frac(c.substitute(env).constant_value()) for c in t.coeffs()]
    got = [oracles.frac(c.substitute(env).constant_value()) for c in (s * t).coeffs()]
    assert got == oracles.series_mul(num, den, 4)


@given(series())
def test_negate_z_is_an_involution(s):
    assert s.negate_z().negate_z() == s


# -- compiled and pure kernels agree ----------------------------------------------------

@pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
@given(polys(), polys(), small)
def test_compiled_and_pure_polynomial_kernels_agree(p, q, f):
    a, b = p._t, q._t
    for name in ("poly_add", "poly_sub", "poly_mul"):
        assert getattr(_ckernels, name)(a, b) == getattr(_pykernels, name)(a, b)
    assert _ckernels.poly_neg(a) == _pykernels.poly_neg(a)
    assert _ckernels.poly_scale(a, mpq(f)) == _pykernels.poly_scale(a, mpq(f))


@pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
@given(series(), series())
def test_compiled_and_pure_series_kernels_agree(s, t):
    a, b = s._c, t._c
    for name in ("series_add", "series_sub"):
        assert getattr(_ckernels, name)(a, b) == getattr(_pykernels, name)(a, b)
    assert _ckernels.series_mul(a, b, 4) == _pykernels.series_mul(a, b, 4)
    assert _ckernels.series_is_zero(a) == _pykernels.series_is_zero(a)
    assert _ckernels.series_low(a) == _pykernels.series_low(a)
