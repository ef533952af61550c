"""Pure-Python coefficient kernels.

A *poly* is a dict mapping a packed exponent integer to a nonzero rational.
A *series* is a tuple of polys indexed by z-degree.  Both are treated as
immutable once returned; every function here builds fresh containers and may
return one of its inputs unchanged when the result is equal to it.

``_ckernels.pyx`` mirrors this module function for function.
"""

FIELD_BITS = 16
MAX_VARS = 256
GUARD = sum(1 << (FIELD_BITS * i + FIELD_BITS - 1) for i in range(MAX_VARS))

EMPTY = {}


class ExponentOverflow(ArithmeticError):
    pass


def poly_add(a, b):
    if not a:
        return b
    if not b:
        return a
    if len(a) < len(b):
        a, b = b, a
    r = dict(a)
    for k, v in b.items():
        w = r.get(k)
        if w is None:
            r[k] = v
        else:
            w = w + v
            if w:
                r[k] = w
            else:
                del r[k]
    return r


def poly_neg(a):
    return {k: -v for k, v in a.items()}


def poly_sub(a, b):
    if not b:
        return a
    if not a:
        return poly_neg(b)
    r = dict(a)
    for k, v in b.items():
        w = r.get(k)
        if w is None:
            r[k] = -v
        else:
            w = w - v
            if w:
                r[k] = w
            else:
                del r[k]
    return r


def poly_scale(a, q):
    if not q or not a:
        return EMPTY
    if q == 1:
        return a
    return {k: v * q for k, v in a.items()}


def poly_mul(a, b):
    if not a or not b:
        return EMPTY
    r = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = ka + kb
            w = r.get(k)
            if w is None:
                r[k] = va * vb
            else:
                r[k] = w + va * vb
            if k & GUARD:
                raise ExponentOverflow("parameter exponent exceeds 32767")
    return {k: v for k, v in r.items() if v}


def series_add(a, b):
    la, lb = len(a), len(b)
    if la < lb:
        a, b, la, lb = b, a, lb, la
    out = list(a)
    for i in range(lb):
        if b[i]:
            out[i] = poly_add(out[i], b[i])
    return tuple(out)


def series_sub(a, b):
    la, lb = len(a), len(b)
    n = la if la > lb else lb
    out = []
    for i in range(n):
        x = a[i] if i < la else EMPTY
        y = b[i] if i < lb else EMPTY
        out.append(poly_sub(x, y))
    return tuple(out)


def series_neg(a):
    return tuple(poly_neg(c) for c in a)


def series_scale(a, p):
    return tuple(poly_mul(c, p) for c in a)


def series_mul(a, b, n):
    """Truncated product keeping z-degrees 0..n."""
    out = [EMPTY] * (n + 1)
    la = min(len(a), n + 1)
    lb = len(b)
    for i in range(la):
        ai = a[i]
        if not ai:
            continue
        top = min(lb, n + 1 - i)
        for j in range(top):
            bj = b[j]
            if bj:
                out[i + j] = poly_add(out[i + j], poly_mul(ai, bj))
    return tuple(out)


def series_is_zero(a):
    for c in a:
        if c:
            return False
    return True


def series_low(a):
    """Lowest z-degree with a nonzero coefficient, or -1 for the zero series."""
    for i, c in enumerate(a):
        if c:
            return i
    return -1


def accumulate(acc, src, factor, n, negate):
    """acc[m] += (or -=) factor * src[m] for every m, truncated at degree n.

    ``acc`` is a dict owned by the caller and is updated in place; entries that
    cancel to zero are removed.
    """
    for m, s in src.items():
        p = series_mul(factor, s, n)
        if series_is_zero(p):
            continue
        cur = acc.get(m)
        if cur is None:
            acc[m] = series_neg(p) if negate else p
            continue
        cur = series_sub(cur, p) if negate else series_add(cur, p)
        if series_is_zero(cur):
            del acc[m]
        else:
            acc[m] = cur
