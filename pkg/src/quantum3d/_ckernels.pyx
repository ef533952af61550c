# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled coefficient kernels; same contract as ``_pykernels``."""

from quantum3d._pykernels import ExponentOverflow, GUARD as _GUARD

cdef object GUARD = _GUARD
cdef dict EMPTY = {}


cpdef dict poly_add(dict a, dict b):
    cdef dict r
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


cpdef dict poly_neg(dict a):
    return {k: -v for k, v in a.items()}


cpdef dict poly_sub(dict a, dict b):
    cdef dict r
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


cpdef dict poly_scale(dict a, object q):
    if not q or not a:
        return EMPTY
    if q == 1:
        return a
    return {k: v * q for k, v in a.items()}


cpdef dict poly_mul(dict a, dict b):
    cdef dict r
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


cpdef tuple series_add(tuple a, tuple b):
    cdef Py_ssize_t la = len(a), lb = len(b), i
    cdef list out
    if la < lb:
        a, b = b, a
        la, lb = lb, la
    out = list(a)
    for i in range(lb):
        if b[i]:
            out[i] = poly_add(<dict>out[i], <dict>b[i])
    return tuple(out)


cpdef tuple series_sub(tuple a, tuple b):
    cdef Py_ssize_t la = len(a), lb = len(b), i, n
    cdef list out = []
    n = la if la > lb else lb
    for i in range(n):
        x = a[i] if i < la else EMPTY
        y = b[i] if i < lb else EMPTY
        out.append(poly_sub(<dict>x, <dict>y))
    return tuple(out)


cpdef tuple series_neg(tuple a):
    return tuple([poly_neg(<dict>c) for c in a])


cpdef tuple series_scale(tuple a, dict p):
    return tuple([poly_mul(<dict>c, p) for c in a])


cpdef tuple series_mul(tuple a, tuple b, Py_ssize_t n):
    cdef list out = [EMPTY] * (n + 1)
    cdef Py_ssize_t la = len(a), lb = len(b), i, j, top
    cdef dict ai, bj
    if la > n + 1:
        la = n + 1
    for i in range(la):
        ai = <dict>a[i]
        if not ai:
            continue
        top = n + 1 - i
        if lb < top:
            top = lb
        for j in range(top):
            bj = <dict>b[j]
            if bj:
                out[i + j] = poly_add(<dict>out[i + j], poly_mul(ai, bj))
    return tuple(out)


cpdef bint series_is_zero(tuple a):
    for c in a:
        if c:
            return False
    return True


cpdef Py_ssize_t series_low(tuple a):
    cdef Py_ssize_t i
    for i in range(len(a)):
        if a[i]:
            return i
    return -1


cpdef accumulate(dict acc, dict src, tuple factor, Py_ssize_t n, bint negate):
    cdef tuple p, cur
    for m, s in src.items():
        p = series_mul(factor, <tuple>s, n)
        if series_is_zero(p):
            continue
        c = acc.get(m)
        if c is None:
            acc[m] = series_neg(p) if negate else p
            continue
        cur = series_sub(<tuple>c, p) if negate else series_add(<tuple>c, p)
        if series_is_zero(cur):
            del acc[m]
        else:
            acc[m] = cur
