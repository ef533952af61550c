from fractions import Fraction
from functools import lru_cache
from itertools import product

import pytest
from gmpy2 import mpq
from hypothesis import assume, given
from hypothesis import strategies as st

from quantum3d.algebra import AlgElement, abelian_table
from quantum3d.catalog import CASE_IDS, catalog_table, evaluate, r_matrix_bivector
from quantum3d.classification import (TRANSFORM_FAMILIES, Bivector, LieAlgebra3, TransformSpec,
                                      apply_transformation, cambio11, classical_cocommutator, coboundary_of,
                                      coboundary_solve, cocommutator_from_bivectors, cocycle_check, jacobson_type,
                                      schouten_classify)
from quantum3d.hopf import HopfData, all_checks, extract_cocommutator
from quantum3d.quantizer import tables_agree
from strategies import family_points, family_table, small

GENS = "ABC"
PAIRS = ((0, 1), (0, 2), (1, 2))


def lie(ab=(0, 0, 0), ac=(0, 0, 0), bc=(0, 0, 0)):
    return LieAlgebra3(ab, ac, bc)


def limit_of(case_id, params=None):
    c = catalog_table(case_id, params, order=2)
    return c, LieAlgebra3.from_table(c.table.classical_limit())


HEISENBERG = lie(bc=(1, 0, 0))


# -- independent reference: ad-action on bivectors and basis changes ------------------

def ref_bracket(g, x, y):
    out = [Fraction(0)] * 3
    for i, j in product(range(3), repeat=2):
        if x[i] and y[j]:
            for k in range(3):
                out[k] += Fraction(x[i]) * Fraction(y[j]) * Fraction(g.c[i][j][k])
    return out


def ref_ad_bivector(g, i, r):
    """ad_{e_i}(r) for r = {(p, q): coeff} on e_p^e_q, result on the p<q basis."""
    e = [[1 if a == b else 0 for b in range(3)] for a in range(3)]
    out = {pq: Fraction(0) for pq in PAIRS}

    def wedge(u, v, f):
        for a, b in product(range(3), repeat=2):
            if a < b:
                out[(a, b)] += f * (Fraction(u[a]) * v[b] - Fraction(u[b]) * v[a])

    for (p, q), f in r.items():
        wedge(ref_bracket(g, e[i], e[p]), e[q], f)
        wedge(e[p], ref_bracket(g, e[i], e[q]), f)
    return out


def ref_coboundary_rows(g, eta_images):
    """One row per (generator, pair): coefficients of (r_AB, r_AC, r_BC) and the target."""
    rows = {}
    for i in range(3):
        cols = [ref_ad_bivector(g, i, {pq: Fraction(1)}) for pq in PAIRS]
        for a, b in PAIRS:
            target = Fraction(eta_images.get(GENS[i], {}).get((GENS[a], GENS[b]), 0))
            rows[(GENS[i], GENS[a] + GENS[b])] = ([c[(a, b)] for c in cols], target)
    return rows


def ref_schouten(g, r):
    """[[r,r]] = [r12,r13] + [r12,r23] + [r13,r23] expanded on e_a (x) e_b (x) e_c."""
    e = [[1 if a == b else 0 for b in range(3)] for a in range(3)]
    r2 = {}
    for (i, j), v in zip(PAIRS, (r.ab, r.ac, r.bc)):
        if v:
            r2[(i, j)], r2[(j, i)] = Fraction(v), -Fraction(v)
    out = {}
    for ((i, j), x), ((k, l), y) in product(r2.items(), repeat=2):
        for s, c in enumerate(ref_bracket(g, e[i], e[k])):
            out[(s, j, l)] = out.get((s, j, l), 0) + x * y * c
        for s, c in enumerate(ref_bracket(g, e[j], e[k])):
            out[(i, s, l)] = out.get((i, s, l), 0) + x * y * c
        for s, c in enumerate(ref_bracket(g, e[j], e[l])):
            out[(i, k, s)] = out.get((i, k, s), 0) + x * y * c
    return {k: v for k, v in out.items() if v}


def ref_schouten_label(g, r):
    t = ref_schouten(g, r)
    if not t:
        return "cybe_zero"
    e = [[1 if a == b else 0 for b in range(3)] for a in range(3)]
    for i in range(3):
        moved = {}
        for (a, b, c), v in t.items():
            for slot in range(3):
                key = [a, b, c]
                for s, f in enumerate(ref_bracket(g, e[i], e[key[slot]])):
                    k2 = tuple(key[:slot] + [s] + key[slot + 1:])
                    moved[k2] = moved.get(k2, 0) + v * f
        if any(moved.values()):
            return "neither"
    return "mcybe_invariant"


def det3(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def inverse3(m):
    d = Fraction(det3(m))
    cof = [[(m[(r + 1) % 3][(c + 1) % 3] * m[(r + 2) % 3][(c + 2) % 3]
             - m[(r + 1) % 3][(c + 2) % 3] * m[(r + 2) % 3][(c + 1) % 3]) for c in range(3)] for r in range(3)]
    return [[cof[c][r] / d for c in range(3)] for r in range(3)]


def change_basis(g, p):
    """Structure constants in the basis f_i = sum_k p[k][i] e_k."""
    inv = inverse3(p)
    f = [[p[k][i] for k in range(3)] for i in range(3)]
    rows = []
    for i, j in PAIRS:
        v = ref_bracket(g, f[i], f[j])
        rows.append([sum(inv[a][k] * v[k] for k in range(3)) for a in range(3)])
    return LieAlgebra3(*[[mpq(x.numerator, x.denominator) for x in r] for r in rows])


# -- Jacobson types ----------------------------------------------------------------------

def test_euclidean_limit_is_type_three_minus_one():
    t = jacobson_type(lie(ab=(0, 1, 0), ac=(0, 0, -1)))
    assert t.label == "III_alpha" and t.alpha == -1


def test_abelian_is_type_one():
    assert jacobson_type(lie()).label == "I"


def test_heisenberg_is_type_two():
    assert jacobson_type(HEISENBERG).label == "II_Heisenberg"


def test_borel_plus_center():
    assert jacobson_type(lie(ab=(0, 1, 0))).label == "II_BorelCentral"


def test_nilshift():
    assert jacobson_type(lie(ac=(1, 1, 0), bc=(0, 1, 0))).label == "III_nilshift"


def test_simple_is_type_four():
    assert jacobson_type(lie(ab=(0, 1, 0), ac=(0, 0, -1), bc=(2, 0, 0))).label == "IV"


def test_jacobi_violation_is_rejected():
    with pytest.raises(ValueError):
        lie(ab=(0, 1, 0), ac=(0, 0, 1), bc=(1, 0, 0))


@pytest.mark.parametrize("case_id", CASE_IDS)
def test_catalog_jacobson_metadata(case_id):
    c, g = limit_of(case_id)
    t = jacobson_type(g)
    assert t.label == c.jacobson["label"]
    if "alpha" in c.jacobson:
        alpha = evaluate(c.jacobson["alpha"], {"rho": c.rho})
        assert t.alpha in (alpha, 1 / alpha)


def lie_algebras():
    cases = st.sampled_from(CASE_IDS).map(lambda c: limit_of(c)[1])
    fams = family_points().map(lambda p: LieAlgebra3.from_table(family_table(*p, 2).classical_limit()))
    return st.one_of(cases, fams)


basis_changes = st.lists(st.integers(-2, 2), min_size=9, max_size=9).map(
    lambda v: [v[0:3], v[3:6], v[6:9]]).filter(lambda m: det3(m) != 0)


@given(lie_algebras(), basis_changes)
def test_jacobson_type_is_basis_independent(g, p):
    before, after = jacobson_type(g), jacobson_type(change_basis(g, p))
    assert before.label == after.label
    assert before.invariant == after.invariant


# -- cocycles --------------------------------------------------------------------------------

@pytest.mark.parametrize("case_id", CASE_IDS)
def test_catalog_cocommutators_are_cocycles(case_id):
    c, g = limit_of(case_id)
    assert cocycle_check(g, classical_cocommutator(c.hopf)).passed


def test_zero_cocommutator_is_a_cocycle():
    assert cocycle_check(HEISENBERG, cocommutator_from_bivectors({})).passed


def test_heisenberg_with_b_to_bc_is_not_a_cocycle():
    eta = cocommutator_from_bivectors({"B": Bivector(bc=1)})
    res = cocycle_check(HEISENBERG, eta)
    assert not res.passed
    # eta([B,C]) - ad_B eta(C) + ad_C eta(B) = 0 - 0 + [C,B]^C = -A^C
    assert res.cocycle["[B,C]"] == Bivector(ac=-1)
    assert res.cocycle["[A,B]"].is_zero() and res.cocycle["[A,C]"].is_zero()


# -- Schouten --------------------------------------------------------------------------------

def test_ab_on_121_is_cybe_zero():
    assert schouten_classify(Bivector(ab=1), limit_of("1.2.1")[1])[0] == "cybe_zero"


def test_zero_r_is_cybe_zero():
    label, tri = schouten_classify(Bivector(), limit_of("2.1.1")[1])
    assert label == "cybe_zero" and tri.is_zero()


def test_bc_on_211_is_mcybe_invariant():
    label, tri = schouten_classify(Bivector(bc=1), limit_of("2.1.1")[1])
    assert label == "mcybe_invariant" and tri.coefficient != 0


def test_non_unimodular_schouten_is_neither():
    g = lie(ab=(0, 1, 0))  # Borel + center, tr ad_A = 1
    r = Bivector(ab=1, ac=1)
    assert ref_schouten_label(g, r) == "neither"
    assert schouten_classify(r, g)[0] == "neither"


@pytest.mark.parametrize("case_id", [c for c in CASE_IDS if catalog_table(c, order=2).r_matrix])
def test_catalog_schouten_labels(case_id):
    c, g = limit_of(case_id)
    assert schouten_classify(r_matrix_bivector(c), g)[0] == c.schouten


bivectors = st.builds(lambda a, b, c: Bivector(*(mpq(x.numerator, x.denominator) for x in (a, b, c))),
                      small, small, small)
scalars = small.filter(bool).map(lambda x: mpq(x.numerator, x.denominator))


@given(lie_algebras(), bivectors)
def test_schouten_matches_the_reference_expansion(g, r):
    label, tri = schouten_classify(r, g)
    ref = ref_schouten(g, r)
    got = {k: Fraction(int(v.numerator), int(v.denominator))
           for k, v in zip(product(range(3), repeat=3), tri.tensor) if v}
    assert got == ref
    assert Fraction(int(tri.coefficient.numerator), int(tri.coefficient.denominator)) == ref.get((0, 1, 2), 0)
    assert label == ref_schouten_label(g, r)


@given(lie_algebras(), bivectors, scalars)
def test_schouten_label_is_scale_invariant(g, r, lam):
    assert schouten_classify(r, g)[0] == schouten_classify(r.scale(lam), g)[0]


# -- coboundaries ------------------------------------------------------------------------------

@pytest.mark.parametrize("case_id", ["1.1.1", "2.1.2", "2.2.2.4", "3.1", "3.2.1", "3.2.3"])
def test_non_coboundary_cases_are_infeasible(case_id):
    c, g = limit_of(case_id)
    res = coboundary_solve(g, classical_cocommutator(c.hopf))
    assert not res.feasible
    assert str(res) == "non-coboundary: infeasible"


def test_zero_cocommutator_admits_zero_r():
    res = coboundary_solve(HEISENBERG, cocommutator_from_bivectors({}))
    assert res.feasible and res.r.is_zero()
    # A^B and A^C are ad-invariant on the Heisenberg algebra; ad_B(B^C) = B^A is not
    assert res.nullity == 2


def test_122_cocommutator_is_the_coboundary_of_bc():
    c, g = limit_of("1.2.2")
    res = coboundary_solve(g, classical_cocommutator(c.hopf))
    assert res.feasible
    assert res.r.ab == 0 and res.r.ac == 0 and res.r.bc != 0


def test_heisenberg_with_equal_twists_is_the_coboundary_of_bc():
    # the rho = 1 point of the 1.2.2 classical layer
    g = HEISENBERG
    res = coboundary_solve(g, extract_cocommutator(HopfData.standard(1, 2)))
    assert res.feasible
    assert res.r == Bivector(bc=-1)


def certificate_holds(g, eta_images, cert):
    rows = ref_coboundary_rows(g, eta_images)
    lhs = [sum(Fraction(f) * rows[k][0][col] for k, f in cert.items()) for col in range(3)]
    rhs = sum(Fraction(f) * rows[k][1] for k, f in cert.items())
    return not any(lhs) and rhs != 0


def as_images(eta):
    return {g: {pair: v.constant_value() for pair, v in img.items()} for g, img in eta.images.items()}


@pytest.mark.parametrize("case_id", ["1.1.1", "2.1.2", "2.2.2.4", "3.1", "3.2.1", "3.2.3"])
def test_infeasibility_certificates_check_out(case_id):
    c, g = limit_of(case_id)
    eta = classical_cocommutator(c.hopf)
    res = coboundary_solve(g, eta)
    assert certificate_holds(g, as_images(eta), res.certificate)


@given(lie_algebras(), bivectors)
def test_coboundary_round_trip(g, r):
    eta = coboundary_of(r, g)
    res = coboundary_solve(g, eta)
    assert res.feasible
    assert coboundary_of(res.r, g) == eta


@given(lie_algebras(), bivectors, bivectors, bivectors)
def test_solver_verdict_matches_the_reference_system(g, x, y, w):
    eta = cocommutator_from_bivectors({"A": x, "B": y, "C": w})
    res = coboundary_solve(g, eta)
    images = as_images(eta)
    if res.feasible:
        rows = ref_coboundary_rows(g, images)
        r = [Fraction(v) for v in (res.r.ab, res.r.ac, res.r.bc)]
        assert all(sum(a * b for a, b in zip(coeffs, r)) == t for coeffs, t in rows.values())
    else:
        assert certificate_holds(g, images, res.certificate)


# -- transformations ------------------------------------------------------------------------------

def test_cambio11_normalises_family_11():
    params = {"c1": 2, "c2": 1, "a2": 3, "rho": 2}
    fam = catalog_table("family.1.1", params, order=6)
    res = apply_transformation(fam.table, fam.hopf, cambio11(2, 1, 3))
    assert tables_agree(res.table, catalog_table("1.1.1", {"rho": 2}, order=6).table)
    assert res.coproduct_invariant
    assert res.hopf == HopfData.standard(2, 6)


def test_cambio11_with_nontrivial_c2():
    params = {"c1": 1, "c2": 2, "a2": -1, "rho": 3}
    fam = catalog_table("family.1.1", params, order=4)
    res = apply_transformation(fam.table, fam.hopf, cambio11(1, 2, -1))
    assert tables_agree(res.table, catalog_table("1.1.1", {"rho": 3}, order=4).table)
    assert res.coproduct_invariant


@pytest.mark.parametrize("family", TRANSFORM_FAMILIES)
def test_identity_transformation(family):
    c = catalog_table("2.2.1", order=4)
    res = apply_transformation(c.table, c.hopf, TransformSpec.identity(family))
    assert tables_agree(res.table, c.table)
    assert res.coproduct_invariant
    assert res.hopf == c.hopf


def test_relabel_of_321_limit():
    c = catalog_table("3.2.1", order=4)
    res = apply_transformation(c.table.classical_limit(), HopfData.primitive(4), TransformSpec("cambio2", gamma_c=1))
    a, b = AlgElement.generator("A", 4), AlgElement.generator("B", 4)
    assert res.table.ab.is_zero()
    assert res.table.ac == a
    assert res.table.bc == a + b
    assert res.coproduct_invariant


def test_singular_transformations_are_rejected():
    with pytest.raises(ValueError):
        TransformSpec("cambio2", beta=1, gamma_c=1, mu=1, nu=1)
    with pytest.raises(ValueError):
        TransformSpec("cambio1", alpha=0)
    with pytest.raises(ValueError):
        TransformSpec("cambio3", mu=1)
    with pytest.raises(ValueError):
        TransformSpec("cambio4")


def test_abelian_is_fixed_by_rescaling():
    res = apply_transformation(abelian_table(3), HopfData.standard(2, 3), TransformSpec("cambio1", alpha=5))
    assert tables_agree(res.table, abelian_table(3))


@lru_cache(maxsize=None)
def case6(case_id):
    return catalog_table(case_id, order=6)


coefficient = st.sampled_from([mpq(1), mpq(-2), mpq(1, 2), mpq(3)])
offset = st.sampled_from([mpq(0), mpq(1), mpq(-1, 3)])


@st.composite
def transform_specs(draw):
    family = draw(st.sampled_from(TRANSFORM_FAMILIES))
    kw = dict(alpha=draw(coefficient), beta=draw(coefficient), nu=draw(coefficient),
              delta=draw(offset), eta_c=draw(offset))
    if family == "cambio2":
        kw.update(gamma_c=draw(offset), mu=draw(offset))
    assume(kw["beta"] * kw["nu"] != kw.get("gamma_c", 0) * kw.get("mu", 0))
    return TransformSpec(family, **kw)


@given(st.sampled_from(CASE_IDS), transform_specs())
def test_transformations_preserve_the_hopf_structure(case_id, spec):
    c = case6(case_id)
    res = apply_transformation(c.table, c.hopf, spec)
    assume(res.coproduct_invariant)
    assert all(r.passed for r in all_checks(res.hopf, res.table))
    assert extract_cocommutator(res.hopf) == extract_cocommutator(HopfData.standard(c.rho, 6))
