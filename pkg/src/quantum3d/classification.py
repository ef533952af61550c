"""Classical analysis: Jacobson types, bialgebra cocycles, r-matrices and
coproduct-preserving changes of generators.

Bivectors use X^Y = X(x)Y - Y(x)X.  The coboundary of r is
eta_r(X) = (ad_X (x) 1 + 1 (x) ad_X) r.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from gmpy2 import is_square, isqrt, mpq, mpz

from .algebra import (
    AlgElement,
    CommutatorTable,
    GENERATORS,
    commutator,
    generator_series,
)
from .hopf import (
    Cocommutator3,
    HopfData,
    TensorElement,
    coproduct_extend,
    extract_cocommutator,
)
from .kernel import ParamPoly, TruncationError, rational
from .linalg import solve_linear

_PAIRS = ((0, 1), (0, 2), (1, 2))
_UNIT = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def _vec_bracket(c, x, y):
    out = [mpq(0)] * 3
    for i in range(3):
        if not x[i]:
            continue
        for j in range(3):
            if not y[j]:
                continue
            for k in range(3):
                if c[i][j][k]:
                    out[k] += x[i] * y[j] * c[i][j][k]
    return out


def _rank(rows) -> tuple[int, list]:
    """Rank and a row-echelon basis of a list of rational vectors."""
    m = [list(r) for r in rows if any(r)]
    basis = []
    col = 0
    ncols = len(m[0]) if m else 0
    while m and col < ncols:
        piv = next((r for r in m if r[col]), None)
        if piv is None:
            col += 1
            continue
        m.remove(piv)
        piv = [v / piv[col] for v in piv]
        basis.append(piv)
        m = [[a - r[col] * b for a, b in zip(r, piv)] for r in m]
        m = [r for r in m if any(r)]
        col += 1
    return len(basis), basis


class LieAlgebra3:
    """Three-dimensional Lie algebra with basis A, B, C.

    ``c[i][j][k]`` is the coefficient of e_k in [e_i, e_j].
    """

    def __init__(self, ab, ac, bc, check: bool = True):
        z = [mpq(0)] * 3
        c = [[list(z) for _ in range(3)] for _ in range(3)]
        for (i, j), v in zip(_PAIRS, (ab, ac, bc)):
            v = [rational(x) for x in v]
            c[i][j] = v
            c[j][i] = [-x for x in v]
        self.c = c
        if check:
            bad = self.jacobi_residual()
            if any(bad):
                raise ValueError(f"structure constants violate Jacobi: {bad}")

    @classmethod
    def from_table(cls, t: CommutatorTable, check: bool = True) -> "LieAlgebra3":
        rows = []
        for entry in t.entries():
            layer = entry.z_layer(0)
            v = []
            for m in _UNIT:
                p = layer.get(m, ParamPoly.zero())
                if not p.is_constant():
                    raise ValueError("classical limit has symbolic structure constants")
                v.append(p.constant_value())
            extra = [m for m in layer if m not in _UNIT]
            if extra:
                raise ValueError("classical limit is not linear")
            rows.append(v)
        return cls(*rows, check=check)

    def bracket(self, x, y):
        return _vec_bracket(self.c, x, y)

    def structure_constants(self):
        return tuple(tuple(self.c[i][j]) for i, j in _PAIRS)

    def jacobi_residual(self):
        e = [list(u) for u in _UNIT]
        a, b, cc = e
        t1 = self.bracket(a, self.bracket(b, cc))
        t2 = self.bracket(b, self.bracket(cc, a))
        t3 = self.bracket(cc, self.bracket(a, b))
        return [x + y + w for x, y, w in zip(t1, t2, t3)]

    def ad(self, i: int):
        """Matrix of ad_{e_i}: column j is [e_i, e_j]."""
        return [[self.c[i][j][k] for j in range(3)] for k in range(3)]

    def derived(self) -> list:
        return _rank([self.c[i][j] for i, j in _PAIRS])[1]

    def __eq__(self, other):
        return isinstance(other, LieAlgebra3) and self.c == other.c

    def __repr__(self):
        return f"LieAlgebra3(ab={self.c[0][1]}, ac={self.c[0][2]}, bc={self.c[1][2]})"


@dataclass(frozen=True)
class JacobsonType:
    """Jacobson class; for Type III also alpha (up to alpha <-> 1/alpha).

    ``invariant`` is alpha + 1/alpha, which is always rational; ``alpha`` is
    set when the eigenvalue ratio is itself rational.
    """

    label: str
    alpha: object = None
    invariant: object = None

    def __str__(self):
        if self.label == "III_alpha":
            if self.alpha is not None:
                return f"III_alpha({self.alpha})"
            return f"III_alpha(alpha+1/alpha={self.invariant})"
        return self.label


def _rational_sqrt(q):
    q = mpq(q)
    if q < 0:
        return None
    n, d = mpz(q.numerator), mpz(q.denominator)
    if is_square(n) and is_square(d):
        return mpq(isqrt(n), isqrt(d))
    return None


def jacobson_type(g: LieAlgebra3) -> JacobsonType:
    basis = g.derived()
    dim = len(basis)
    if dim == 0:
        return JacobsonType("I")
    if dim == 3:
        return JacobsonType("IV")
    if dim == 1:
        w = basis[0]
        central = all(not any(g.bracket(list(u), w)) for u in _UNIT)
        return JacobsonType("II_Heisenberg" if central else "II_BorelCentral")
    # dim 2: pick x outside L' and take ad_x restricted to L'
    w1, w2 = basis
    x = next(list(u) for u in _UNIT if _rank([w1, w2, list(u)])[0] == 3)
    m = []
    for w in (w1, w2):
        img = g.bracket(x, w)
        sol = solve_linear([({0: w1[k], 1: w2[k]}, img[k]) for k in range(3)], [0, 1])
        if not sol.consistent:
            raise ValueError("derived algebra is not an ideal; Jacobi must fail")
        m.append((sol.values[0], sol.values[1]))
    (p, q), (r, s) = m  # columns of the 2x2 matrix
    tr = p + s
    det = p * s - q * r
    if det == 0:
        raise ValueError("ad_x is singular on the derived algebra")
    inv = tr * tr / det - 2  # alpha + 1/alpha
    if tr * tr == 4 * det:
        if q == 0 and r == 0:
            return JacobsonType("III_alpha", mpq(1), inv)
        return JacobsonType("III_nilshift", None, inv)
    # alpha solves alpha^2 - inv*alpha + 1 = 0
    root = _rational_sqrt(inv * inv - 4)
    if root is None:
        return JacobsonType("III_alpha", None, inv)
    a = (inv + root) / 2
    if abs(a) < 1:
        a = 1 / a
    return JacobsonType("III_alpha", a, inv)


# -- bivectors ---------------------------------------------------------------

@dataclass(frozen=True)
class Bivector:
    """r = ab A^B + ac A^C + bc B^C."""

    ab: object = mpq(0)
    ac: object = mpq(0)
    bc: object = mpq(0)

    def __post_init__(self):
        for name in ("ab", "ac", "bc"):
            object.__setattr__(self, name, rational(getattr(self, name)))

    def matrix(self):
        m = [[mpq(0)] * 3 for _ in range(3)]
        for (i, j), v in zip(_PAIRS, (self.ab, self.ac, self.bc)):
            m[i][j] = v
            m[j][i] = -v
        return m

    @classmethod
    def from_matrix(cls, m) -> "Bivector":
        return cls(m[0][1], m[0][2], m[1][2])

    def scale(self, q) -> "Bivector":
        q = rational(q)
        return Bivector(self.ab * q, self.ac * q, self.bc * q)

    def is_zero(self) -> bool:
        return not (self.ab or self.ac or self.bc)

    def __str__(self):
        parts = [f"({v})*{n}" for v, n in zip((self.ab, self.ac, self.bc), ("A^B", "A^C", "B^C")) if v]
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class Trivector:
    """t A^B^C, with the full 27-component tensor kept for diagnostics."""

    coefficient: object
    tensor: tuple = field(default=(), compare=False, repr=False)

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.tensor) if self.tensor else self.coefficient == 0


def _ad2(g: LieAlgebra3, i: int, m):
    """(ad_{e_i} (x) 1 + 1 (x) ad_{e_i}) applied to a 2-tensor matrix."""
    out = [[mpq(0)] * 3 for _ in range(3)]
    c = g.c
    for a in range(3):
        for b in range(3):
            v = m[a][b]
            if not v:
                continue
            for k in range(3):
                if c[i][a][k]:
                    out[k][b] += v * c[i][a][k]
                if c[i][b][k]:
                    out[a][k] += v * c[i][b][k]
    return out


def _ad3(g: LieAlgebra3, i: int, t):
    out = {}
    c = g.c
    for (a, b, d), v in t.items():
        if not v:
            continue
        for k in range(3):
            for key, f in (((k, b, d), c[i][a][k]), ((a, k, d), c[i][b][k]), ((a, b, k), c[i][d][k])):
                if f:
                    out[key] = out.get(key, 0) + v * f
    return {k: v for k, v in out.items() if v}


def schouten(r: Bivector, g: LieAlgebra3) -> Trivector:
    """[[r,r]] = [r12,r13] + [r12,r23] + [r13,r23]."""
    m = r.matrix()
    c = g.c
    t = {}

    def add(key, v):
        t[key] = t.get(key, 0) + v

    nz = [(i, j, m[i][j]) for i in range(3) for j in range(3) if m[i][j]]
    for (i, j, x), (k, l, y) in product(nz, nz):
        xy = x * y
        for s in range(3):
            if c[i][k][s]:
                add((s, j, l), xy * c[i][k][s])
            if c[j][k][s]:
                add((i, s, l), xy * c[j][k][s])
            if c[j][l][s]:
                add((i, k, s), xy * c[j][l][s])
    full = tuple(t.get(key, mpq(0)) for key in product(range(3), repeat=3))
    return Trivector(t.get((0, 1, 2), mpq(0)), full)


def schouten_classify(r: Bivector, g: LieAlgebra3) -> tuple[str, Trivector]:
    tri = schouten(r, g)
    if tri.is_zero():
        return "cybe_zero", tri
    t = {key: v for key, v in zip(product(range(3), repeat=3), tri.tensor) if v}
    if all(not _ad3(g, i, t) for i in range(3)):
        return "mcybe_invariant", tri
    return "neither", tri


# -- cocommutators -------------------------------------------------------------

def _eta_matrix(eta: Cocommutator3, g: str):
    m = [[mpq(0)] * 3 for _ in range(3)]
    for (x, y), v in eta.images.get(g, {}).items():
        v = v.constant_value() if isinstance(v, ParamPoly) else rational(v)
        i, j = GENERATORS.index(x), GENERATORS.index(y)
        m[i][j] += v
        m[j][i] -= v
    return m


def cocommutator_from_bivectors(images: dict) -> Cocommutator3:
    """Build a cocommutator from generator -> Bivector (coefficients of z X^Y)."""
    out = {}
    for gname in GENERATORS:
        b = images.get(gname, Bivector())
        out[gname] = {pair: ParamPoly.const(v) for pair, v in
                      zip((("A", "B"), ("A", "C"), ("B", "C")), (b.ab, b.ac, b.bc)) if v}
    return Cocommutator3(out)


def coboundary_of(r: Bivector, g: LieAlgebra3) -> Cocommutator3:
    m = r.matrix()
    return cocommutator_from_bivectors({GENERATORS[i]: Bivector.from_matrix(_ad2(g, i, m)) for i in range(3)})


@dataclass(frozen=True)
class CocycleResult:
    cocycle: dict
    co_jacobi: tuple
    passed: bool


def cocycle_check(g: LieAlgebra3, eta: Cocommutator3) -> CocycleResult:
    """1-cocycle condition on basis pairs and the Jacobi identity of the dual bracket."""
    d = [_eta_matrix(eta, x) for x in GENERATORS]
    cocycle = {}
    for i, j in _PAIRS:
        br = g.c[i][j]
        lhs = [[sum(br[k] * d[k][a][b] for k in range(3)) for b in range(3)] for a in range(3)]
        ri = _ad2(g, i, d[j])
        rj = _ad2(g, j, d[i])
        res = [[lhs[a][b] - ri[a][b] + rj[a][b] for b in range(3)] for a in range(3)]
        cocycle[f"[{GENERATORS[i]},{GENERATORS[j]}]"] = Bivector.from_matrix(res)
    # dual bracket: [e^a, e^b]* = sum_k d[k][a][b] e^k
    dual = [[[d[k][a][b] for k in range(3)] for b in range(3)] for a in range(3)]
    e = [[mpq(1) if i == k else mpq(0) for k in range(3)] for i in range(3)]
    t1 = _vec_bracket(dual, e[0], _vec_bracket(dual, e[1], e[2]))
    t2 = _vec_bracket(dual, e[1], _vec_bracket(dual, e[2], e[0]))
    t3 = _vec_bracket(dual, e[2], _vec_bracket(dual, e[0], e[1]))
    cojac = tuple(x + y + w for x, y, w in zip(t1, t2, t3))
    passed = all(b.is_zero() for b in cocycle.values()) and not any(cojac)
    return CocycleResult(cocycle, cojac, passed)


@dataclass(frozen=True)
class CoboundaryResult:
    """Either a bivector r with coboundary eta (and the kernel dimension) or a certificate."""

    feasible: bool
    r: Bivector | None = None
    nullity: int = 0
    certificate: dict | None = None

    def __str__(self):
        if self.feasible:
            return f"coboundary: r = {self.r} (solution space dimension {self.nullity})"
        return "non-coboundary: infeasible"


def coboundary_solve(g: LieAlgebra3, eta: Cocommutator3) -> CoboundaryResult:
    basis = [Bivector(1, 0, 0).matrix(), Bivector(0, 1, 0).matrix(), Bivector(0, 0, 1).matrix()]
    images = [[_ad2(g, i, b) for b in basis] for i in range(3)]
    rows = []
    labels = []
    for i in range(3):
        target = _eta_matrix(eta, GENERATORS[i])
        for a, b in _PAIRS:
            rows.append(({col: images[i][col][a][b] for col in range(3)}, target[a][b]))
            labels.append((GENERATORS[i], GENERATORS[a] + GENERATORS[b]))
    sol = solve_linear(rows, [2, 1, 0])
    if not sol.consistent:
        cert = {labels[k]: v for k, v in sol.certificate.items()}
        return CoboundaryResult(False, certificate=cert)
    r = Bivector(sol.values[0], sol.values[1], sol.values[2])
    return CoboundaryResult(True, r, len(sol.free))


def classical_cocommutator(h: HopfData) -> Cocommutator3:
    return extract_cocommutator(h)


# -- changes of generators -----------------------------------------------------

TRANSFORM_FAMILIES = ("cambio1", "cambio2", "cambio3")


@dataclass(frozen=True)
class TransformSpec:
    """New generators A' = alpha A, B' = beta B + gamma_c C + delta S1,
    C' = mu B + nu C + eta_c S2, with new deformation parameter z' = z / alpha.

    S1 = sinh(zA)/z.  S2 = sinh(z rho A)/(z rho) for cambio1 and sinh(zA)/z
    otherwise.  cambio1 and cambio3 do not mix B and C.
    """

    family: str
    alpha: object = 1
    beta: object = 1
    gamma_c: object = 0
    delta: object = 0
    mu: object = 0
    nu: object = 1
    eta_c: object = 0

    def __post_init__(self):
        if self.family not in TRANSFORM_FAMILIES:
            raise ValueError(f"unknown transformation family {self.family!r}")
        for name in ("alpha", "beta", "gamma_c", "delta", "mu", "nu", "eta_c"):
            object.__setattr__(self, name, rational(getattr(self, name)))
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")
        if self.family in ("cambio1", "cambio3") and (self.gamma_c or self.mu):
            raise ValueError(f"{self.family} has no gamma_c or mu coefficients")
        if self.beta * self.nu - self.gamma_c * self.mu == 0:
            raise ValueError("the (B, C) block of the transformation is not invertible")

    @classmethod
    def identity(cls, family: str = "cambio2") -> "TransformSpec":
        return cls(family)


@dataclass
class TransformResult:
    table: CommutatorTable
    hopf: HopfData
    images: dict
    coproduct_residuals: dict
    coproduct_invariant: bool

    def __iter__(self):
        yield self.table
        yield self.hopf


def _rho_of(h: HopfData):
    eta = extract_cocommutator(h)
    b = eta.coefficient("B", "A", "B")
    c = eta.coefficient("C", "A", "C")
    if b.is_zero():
        return None
    return (c * (1 / b.constant_value())).constant_value()


def _reexpress(e: AlgElement, spec: TransformSpec, s1: AlgElement, s2: AlgElement, order: int) -> AlgElement:
    """Rewrite an element with A-powers on the left and {B,C}-degree <= 1
    in the new generators, then rescale z to the new parameter."""
    det = spec.beta * spec.nu - spec.gamma_c * spec.mu
    # (B, C) = inverse * (B' - delta S1, C' - eta_c S2)
    inv = ((spec.nu / det, -spec.gamma_c / det), (-spec.mu / det, spec.beta / det))
    out = AlgElement.zero(order)
    for (p, j, k), s in e.terms():
        if j + k > 1:
            raise ArithmeticError("image commutators do not close on the new generators")
        apow = AlgElement({(p, 0, 0): 1}, order)
        if j + k == 0:
            out = out + apow.scale(s)
            continue
        row = inv[0] if j else inv[1]
        # A^p (row0 (B' - delta S1) + row1 (C' - eta_c S2)), A-powers commute with S1, S2
        part = AlgElement({(p, 1, 0): row[0], (p, 0, 1): row[1]}, order)
        shift = _shift_by_apow(s1.scale(-spec.delta * row[0]) + s2.scale(-spec.eta_c * row[1]), p)
        out = out + (part + shift).scale(s)
    # A = A'/alpha and z = alpha z'
    resc = {}
    for (p, j, k), s in out.terms():
        resc[(p, j, k)] = s.rescale_z(spec.alpha).scale(1 / spec.alpha ** p)
    return AlgElement(resc, order)


def _shift_by_apow(x: AlgElement, p: int) -> AlgElement:
    return AlgElement({(m[0] + p, m[1], m[2]): s for m, s in x.terms()}, x.order)


def apply_transformation(t: CommutatorTable, h: HopfData, spec: TransformSpec) -> TransformResult:
    n = t.order
    if h.order != n:
        raise TruncationError("table and coproduct truncation orders differ")
    rho = _rho_of(h) if h.label == "standard" else None
    s1 = generator_series("A", "sinh_over_z", 1, n)
    if spec.family == "cambio1":
        r = rho if rho is not None else mpq(1)
        s2 = generator_series("A", "sinh_over_scaled_z", r, n)
    else:
        s2 = s1
    gA = AlgElement.generator("A", n)
    gB = AlgElement.generator("B", n)
    gC = AlgElement.generator("C", n)
    images = {
        "A": gA.scale(spec.alpha),
        "B": gB.scale(spec.beta) + gC.scale(spec.gamma_c) + s1.scale(spec.delta),
        "C": gB.scale(spec.mu) + gC.scale(spec.nu) + s2.scale(spec.eta_c),
    }
    brackets = [commutator(images[x], images[y], t) for x, y in (("A", "B"), ("A", "C"), ("B", "C"))]
    new_entries = [_reexpress(b, spec, s1, s2, n) for b in brackets]
    new_table = CommutatorTable(*new_entries)

    # formal invariance: Delta(image) must have the same shape in the new generators
    residuals = {}
    if h.label == "standard":
        new_h = HopfData.standard(rho, n)
        for gname, twist in (("B", 1), ("C", rho)):
            img = images[gname]
            e_plus = generator_series("A", "exp", twist, n)
            e_minus = generator_series("A", "exp", -twist, n)
            expected = TensorElement.outer(e_plus, img) + TensorElement.outer(img, e_minus)
            residuals[gname] = coproduct_extend(img, h, t) - expected
        one = AlgElement.one(n)
        residuals["A"] = coproduct_extend(images["A"], h, t) - (
            TensorElement.outer(images["A"], one) + TensorElement.outer(one, images["A"]))
    else:
        new_h = HopfData.primitive(n)
        one = AlgElement.one(n)
        for gname, img in images.items():
            expected = TensorElement.outer(img, one) + TensorElement.outer(one, img)
            residuals[gname] = coproduct_extend(img, h, t) - expected
    invariant = all(r.is_zero() for r in residuals.values())
    return TransformResult(new_table, new_h, images, residuals, invariant)


def cambio11(c1, c2, a2) -> TransformSpec:
    """The family-1.1 normalisation: A' = A/c2, B' = c2 B + c1 S1, C' = c2 C + a2 S2."""
    c2 = rational(c2)
    return TransformSpec("cambio1", alpha=1 / c2, beta=c2, delta=c1, nu=c2, eta_c=a2)


__all__ = [
    "LieAlgebra3", "JacobsonType", "Bivector", "Trivector", "TransformSpec", "TransformResult",
    "CocycleResult", "CoboundaryResult", "jacobson_type", "cocycle_check", "schouten", "schouten_classify",
    "coboundary_solve", "coboundary_of", "cocommutator_from_bivectors", "apply_transformation", "cambio11",
    "classical_cocommutator", "TRANSFORM_FAMILIES",
]
