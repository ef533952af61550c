"""Shared hypothesis strategies: family parameter points and algebra elements."""

from functools import lru_cache

from gmpy2 import mpq
from hypothesis import strategies as st

from quantum3d.algebra import AlgElement
from quantum3d.catalog import catalog_table
from quantum3d.kernel import ZSeries

FAMILY_PARAMS = {
    "family.1.1": ("c1", "c2", "a2", "rho"),
    "family.1.2": ("c1", "a1", "rho"),
    "family.2.1": ("c1", "c2", "c3", "a2", "b2", "a1"),
    "family.3.1": ("c1", "c2", "b1"),
    "family.3.2": ("c1", "b1", "a1"),
}

small = st.fractions(min_value=-3, max_value=3, max_denominator=3)
nonzero = small.filter(lambda q: q != 0)
rho_generic = small.filter(lambda q: q not in (1, -1))


@st.composite
def family_points(draw):
    fam = draw(st.sampled_from(sorted(FAMILY_PARAMS)))
    params = {}
    for name in FAMILY_PARAMS[fam]:
        if name == "rho":
            v = draw(rho_generic)
        elif name == "c2" and fam in ("family.1.1", "family.3.1"):
            v = draw(nonzero)
        else:
            v = draw(small)
        params[name] = mpq(v.numerator, v.denominator)
    return fam, tuple(sorted(params.items()))


@lru_cache(maxsize=512)
def family_table(fam: str, params: tuple, order: int):
    return catalog_table(fam, dict(params), order).table


@st.composite
def elements(draw, order, max_terms=3, max_degree=3):
    terms = {}
    for _ in range(draw(st.integers(1, max_terms))):
        i = draw(st.integers(0, max_degree))
        j = draw(st.integers(0, max_degree - i))
        k = draw(st.integers(0, max_degree - i - j))
        d = draw(st.integers(0, order))
        c = draw(nonzero)
        coeffs = [0] * (order + 1)
        coeffs[d] = mpq(c.numerator, c.denominator)
        s = ZSeries(coeffs, order)
        terms[(i, j, k)] = s if (i, j, k) not in terms else terms[(i, j, k)] + s
    return AlgElement(terms, order)
