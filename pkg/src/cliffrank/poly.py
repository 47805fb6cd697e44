"""Dense univariate polynomials and truncated power series over a field.

Polynomials are lists of raw field values, constant term first, with no
trailing zeros (the zero polynomial is ``[]``).  Power series are plain
coefficient lists of a fixed length; the caller tracks precision.
"""

import random


def trim(a, F):
    a = [F.norm(v) for v in a]
    while a and F.is_zero(a[-1]):
        a.pop()
    return a


def deg(a):
    return len(a) - 1


def padd(a, b, F):
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)], F)


def psub(a, b, F):
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)], F)


def pscale(a, c, F):
    return trim([c * v for v in a], F)


def pmul(a, b, F):
    if not a or not b:
        return []
    out = [F.zero] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        if F.is_zero(u):
            continue
        for j, v in enumerate(b):
            out[i + j] += u * v
    return trim(out, F)


def ppow(a, e, F):
    out = [F.one]
    for _ in range(e):
        out = pmul(out, a, F)
    return out


def pdivmod(a, b, F):
    b = trim(b, F)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = trim(a, F)
    if len(a) < len(b):
        return [], a
    inv = F.inv(b[-1])
    q = [F.zero] * (len(a) - len(b) + 1)
    r = list(a)
    for k in range(len(a) - len(b), -1, -1):
        c = F.norm(r[k + len(b) - 1] * inv)
        q[k] = c
        if not F.is_zero(c):
            for j, v in enumerate(b):
                r[k + j] = F.norm(r[k + j] - c * v)
    return trim(q, F), trim(r[:len(b) - 1], F)


def peval(a, x, F):
    acc = F.zero
    for v in reversed(a):
        acc = F.norm(acc * x + v)
    return acc


def pderiv(a, F):
    return trim([i * a[i] for i in range(1, len(a))], F)


def pmonic(a, F):
    if not a:
        return a
    return pscale(a, F.inv(a[-1]), F)


def pgcd(a, b, F):
    a, b = trim(a, F), trim(b, F)
    while b:
        a, b = b, pdivmod(a, b, F)[1]
    return pmonic(a, F)


def is_squarefree(a, F):
    a = trim(a, F)
    if len(a) <= 2:
        return bool(a)
    return len(pgcd(a, pderiv(a, F), F)) == 1


def pshift(a, x0, F):
    """Coefficients of a(x0 + t) as a polynomial in t."""
    out = []
    for v in reversed(a):
        out = padd(pmul(out, [x0, F.one], F), [v], F)
    return out


def from_roots(roots, F):
    out = [F.one]
    for r in roots:
        out = pmul(out, [F.neg(r), F.one], F)
    return out


def ppowmod(a, e, m, F):
    result = [F.one]
    base = pdivmod(a, m, F)[1]
    while e:
        if e & 1:
            result = pdivmod(pmul(result, base, F), m, F)[1]
        base = pdivmod(pmul(base, base, F), m, F)[1]
        e >>= 1
    return result


def roots_modp(a, F, seed=0):
    """Distinct roots in F_p of a polynomial, sorted.

    Splits off the product of linear factors with gcd(a, x^p - x) and then
    separates roots by random equal-degree splitting.
    """
    a = pmonic(trim(a, F), F)
    if len(a) <= 1:
        return []
    p = F.p
    xp = ppowmod([0, 1], p, a, F)
    lin = pgcd(a, psub(xp, [0, 1], F), F)
    rng = random.Random(seed)
    out = []

    def split(h):
        if len(h) == 1:
            return
        if len(h) == 2:
            out.append(F.norm(-h[0] * F.inv(h[1])))
            return
        if p == 2:
            for r in (0, 1):
                if F.is_zero(peval(h, r, F)):
                    out.append(r)
            return
        while True:
            shift = rng.randrange(p)
            w = ppowmod([shift, 1], (p - 1) // 2, h, F)
            d = pgcd(h, psub(w, [1], F), F)
            if 1 < len(d) < len(h):
                split(d)
                split(pdivmod(h, d, F)[0])
                return

    split(lin)
    return sorted(out)


def poly_roots(a, F):
    """Roots of a in the base field (F_p or Q)."""
    if F.char:
        return roots_modp(a, F)
    from fractions import Fraction
    from sympy import Poly, QQ as SQQ, symbols
    x = symbols("x")
    expr = sum(Fraction(c) * x ** i for i, c in enumerate(a))
    if expr == 0:
        raise ValueError("roots of the zero polynomial")
    roots = Poly(expr, x, domain=SQQ).ground_roots()
    return sorted(Fraction(int(r.p), int(r.q)) for r in roots)


# ---------------------------------------------------------------------------
# truncated power series (coefficient lists of length N)

def smul(a, b, N, F):
    out = [F.zero] * N
    for i in range(min(len(a), N)):
        u = a[i]
        if F.is_zero(u):
            continue
        lim = min(len(b), N - i)
        for j in range(lim):
            out[i + j] += u * b[j]
    return [F.norm(v) for v in out]


def sinv(a, N, F):
    """Inverse of a power series with a nonzero constant term."""
    inv0 = F.inv(a[0])
    out = [F.zero] * N
    out[0] = inv0
    for k in range(1, N):
        acc = F.zero
        for j in range(1, min(k, len(a) - 1) + 1):
            acc += a[j] * out[k - j]
        out[k] = F.norm(-acc * inv0)
    return out


def spow(a, e, N, F):
    out = [F.one] + [F.zero] * (N - 1)
    base = list(a[:N]) + [F.zero] * max(0, N - len(a))
    while e:
        if e & 1:
            out = smul(out, base, N, F)
        base = smul(base, base, N, F)
        e >>= 1
    return out


def snth_root(a, n, r0, N, F):
    """Series r with r**n == a and r[0] == r0 (requires r0**n == a[0]).

    Newton iteration r <- r - (r^n - a)/(n r^(n-1)), doubling precision.
    """
    a = list(a[:N]) + [F.zero] * max(0, N - len(a))
    if not F.is_zero(F.power(r0, n) - a[0]):
        raise ValueError("initial root does not match the constant term")
    inv_n = F.inv(F(n))
    r = [r0]
    prec = 1
    while prec < N:
        prec = min(2 * prec, N)
        r = r + [F.zero] * (prec - len(r))
        rn1 = spow(r, n - 1, prec, F)
        rn = smul(rn1, r, prec, F)
        err = [F.norm(u - v) for u, v in zip(rn, a[:prec])]
        step = smul(err, sinv(rn1, prec, F), prec, F)
        r = [F.norm(u - inv_n * v) for u, v in zip(r, step)]
    return r[:N]


def scompose_poly(poly, s, N, F):
    """poly(s) for a polynomial and a power series s, truncated at N."""
    out = [F.zero] * N
    for v in reversed(poly):
        out = smul(out, s, N, F)
        out[0] = F.norm(out[0] + v)
    return out
