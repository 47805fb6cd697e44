"""Superelliptic curves y^n = f(x), their places, divisors and
Riemann-Roch spaces.

Only two shapes of the fibre over x = infinity are supported:

* totally ramified, gcd(n, deg f) = 1: one place with ramification n;
* split, n | deg f: n unramified places, which must all be rational
  (the n-th roots of the leading coefficient of f must lie in the field).

Local parameters: t = x - x0 at a finite place, t = y at a branch place,
t = 1/x at a split infinite place, and at the totally ramified infinite
place the parameter t with x = 1/(lam t^n) described in ``_local_series``.

Functions are stored as h = (P_0(x) + P_1(x) y + ... + P_{n-1}(x) y^{n-1}) / q(x).
"""

import random
from dataclasses import dataclass
from math import gcd

import numpy as np

from .exactla import ExactMatrix, kernel_basis, field_for
from .poly import (
    deg, is_squarefree, padd, pderiv, peval, pdivmod, pmul,
    ppow, pscale, pshift, scompose_poly, sinv, smul, snth_root, trim,
)


class CurveError(ValueError):
    pass


class UnsupportedPlace(CurveError):
    pass


class SamplingExhausted(RuntimeError):
    pass


_KIND_ORDER = {"finite": 0, "branch": 1, "infinity": 2}


@dataclass(frozen=True)
class Place:
    """A rational place of a superelliptic curve.

    ``kind`` is "finite", "branch" or "infinity"; ``e`` is the
    ramification index of x at the place.
    """

    kind: str
    x: object = None
    y: object = None
    index: int = 0
    e: int = 1

    def sort_key(self):
        return (_KIND_ORDER[self.kind],
                self.x if self.x is not None else 0,
                self.y if self.y is not None else 0,
                self.index)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        if self.kind == "finite":
            return f"Finite({self.x}, {self.y})"
        if self.kind == "branch":
            return f"Branch({self.x})"
        return f"Infinity({self.index})"


class Divisor:
    """Formal integer combination of places (immutable)."""

    __slots__ = ("_c", "_hash")

    def __init__(self, coeffs=None):
        c = {}
        for P, m in (coeffs or {}).items():
            m = int(m)
            if m:
                c[P] = c.get(P, 0) + m
        self._c = {P: m for P, m in c.items() if m}
        self._hash = None

    @classmethod
    def of(cls, *places):
        out = {}
        for P in places:
            out[P] = out.get(P, 0) + 1
        return cls(out)

    def __getitem__(self, P):
        return self._c.get(P, 0)

    def items(self):
        return sorted(self._c.items(), key=lambda kv: kv[0].sort_key())

    def support(self):
        return sorted(self._c)

    @property
    def degree(self):
        return sum(self._c.values())

    def is_effective(self):
        return all(m > 0 for m in self._c.values())

    def positive_part(self):
        return Divisor({P: m for P, m in self._c.items() if m > 0})

    def negative_part(self):
        return Divisor({P: -m for P, m in self._c.items() if m < 0})

    def __add__(self, other):
        out = dict(self._c)
        for P, m in other._c.items():
            out[P] = out.get(P, 0) + m
        return Divisor(out)

    def __neg__(self):
        return Divisor({P: -m for P, m in self._c.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, k):
        return Divisor({P: k * m for P, m in self._c.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Divisor) and self._c == other._c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._c.items()))
        return self._hash

    def __bool__(self):
        return bool(self._c)

    def __repr__(self):
        if not self._c:
            return "Divisor(0)"
        return "Divisor(" + " + ".join(f"{m}*{P!r}" for P, m in self.items()) + ")"


def hurwitz_genus(n, profile, base_genus=0):
    """Genus of a degree-n cover from 2g - 2 = n(2 g0 - 2) + sum(e - 1)."""
    total = n * (2 * base_genus - 2) + sum(e - 1 for e in profile)
    if total % 2:
        raise CurveError(f"ramification profile gives odd 2g-2 = {total}")
    g = total // 2 + 1
    if g < 0:
        raise CurveError("ramification profile gives negative genus")
    return g


def _ext_gcd(a, b):
    if b == 0:
        return (1, 0) if a >= 0 else (-1, 0)
    x, y = _ext_gcd(b, a % b)
    return y, x - (a // b) * y


class CurveModel:
    """The smooth projective curve with affine model y^n = f(x)."""

    def __init__(self, field, n, f):
        F = field
        self.field = F
        self.n = n = int(n)
        self.f = f = trim([F(v) for v in f], F)
        if n < 2:
            raise CurveError("cover degree must be at least 2")
        if F.char and n % F.char == 0:
            raise CurveError(f"characteristic {F.char} divides n = {n}")
        if not f:
            raise CurveError("f must be nonzero")
        self.m = m = deg(f)
        if m < 1:
            raise CurveError("f must be nonconstant")
        if not is_squarefree(f, F):
            raise CurveError("f is not squarefree")
        self.c = c = f[-1]
        self._frev = list(reversed(f))
        if gcd(n, m) == 1:
            self.infinity_kind = "totally-ramified"
            a, b = _ext_gcd(m, n)
            assert a * m + b * n == 1
            self._lam = F.power(c, a)
            self._ycoef = F.power(c, b)
            self._zroots = None
            self.infinite_places = (Place("infinity", index=0, e=n),)
            profile = [n] * (m + 1)
        elif m % n == 0:
            self.infinity_kind = "split"
            self.k = m // n
            roots = F.nth_roots(c, n)
            if len(roots) != n:
                raise CurveError("infinite places are not all rational: "
                                 "leading coefficient lacks n distinct n-th roots")
            self._zroots = sorted(roots)
            self.infinite_places = tuple(Place("infinity", index=i, e=1) for i in range(n))
            profile = [n] * m
        else:
            raise CurveError(f"unsupported infinity kind: gcd({n}, {m}) != 1 and {n} does not divide {m}")
        self.genus = hurwitz_genus(n, profile)
        if self.infinity_kind == "totally-ramified":
            closed = (-2 * n + (m + 1) * (n - 1)) // 2 + 1
        else:
            closed = (-2 * n + m * (n - 1)) // 2 + 1
        if closed != self.genus:
            raise CurveError("genus mismatch between Hurwitz and closed form")
        self._local_cache = {}
        self._rr_cache = {}
        self._rational_places = None

    def __repr__(self):
        return f"CurveModel(y^{self.n} = f(x), deg f = {self.m}, genus {self.genus}, {self.field!r})"

    # ------------------------------------------------------------------
    # places

    def finite_place(self, x0, y0):
        F = self.field
        x0, y0 = F(x0), F(y0)
        if F.is_zero(y0):
            raise CurveError("finite places need y0 != 0; use branch_place")
        if not F.is_zero(F.power(y0, self.n) - peval(self.f, x0, F)):
            raise CurveError(f"({x0}, {y0}) is not on the curve")
        return Place("finite", x0, y0, 0, 1)

    def branch_place(self, x0):
        F = self.field
        x0 = F(x0)
        if not F.is_zero(peval(self.f, x0, F)):
            raise CurveError(f"f({x0}) != 0, not a branch point")
        return Place("branch", x0, F.zero, 0, self.n)

    def infinite_place(self, i=0):
        if not 0 <= i < len(self.infinite_places):
            raise CurveError(f"no infinite place with index {i}")
        return self.infinite_places[i]

    def check_place(self, P):
        F = self.field
        if P.kind == "finite":
            ok = (not F.is_zero(P.y)) and F.is_zero(F.power(P.y, self.n) - peval(self.f, P.x, F))
        elif P.kind == "branch":
            ok = F.is_zero(peval(self.f, P.x, F)) and P.e == self.n
        elif P.kind == "infinity":
            ok = P in self.infinite_places
        else:
            ok = False
        if not ok:
            raise UnsupportedPlace(f"{P!r} is not a rational place of {self!r}")

    def places_over(self, x0):
        """Rational places with x = x0 (branch place or finite places)."""
        F = self.field
        fx = peval(self.f, x0, F)
        if F.is_zero(fx):
            return [Place("branch", F(x0), F.zero, 0, self.n)]
        return [Place("finite", F(x0), y, 0, 1) for y in F.nth_roots(fx, self.n)]

    def fiber(self, x0):
        """The n places over x0 (a divisor of the x-pencil when summed)."""
        F = self.field
        x0 = F(x0)
        fx = peval(self.f, x0, F)
        if F.is_zero(fx):
            raise CurveError(f"x0 = {x0} is a branch point")
        roots = F.nth_roots(fx, self.n)
        if len(roots) != self.n:
            raise CurveError(f"fibre over {x0} is not split over the field")
        return [Place("finite", x0, y, 0, 1) for y in roots]

    def fiber_divisor(self, x0):
        return Divisor.of(*self.fiber(x0))

    def infinity_divisor(self):
        """Divisor of poles of x (a member of the x-pencil)."""
        e = 1 if self.infinity_kind == "split" else self.n
        return Divisor({P: e for P in self.infinite_places})

    def rational_places(self):
        """All rational places (prime fields only), sorted."""
        if self._rational_places is None:
            F = self.field
            if not F.char:
                raise CurveError("rational places can only be enumerated over F_p")
            p = F.p
            xs = np.arange(p, dtype=np.int64)
            vals = np.zeros(p, dtype=np.int64)
            for coef in reversed(self.f):
                vals = (vals * xs + coef) % p
            out = []
            for x0, fx in enumerate(vals.tolist()):
                if fx == 0:
                    out.append(Place("branch", x0, 0, 0, self.n))
                else:
                    out.extend(Place("finite", x0, y, 0, 1) for y in F.nth_roots(fx, self.n))
            out.extend(self.infinite_places)
            self._rational_places = sorted(out)
        return list(self._rational_places)

    def sample_place(self, seed, max_tries=10000):
        """Uniformly sampled finite place (x0 uniform, y0 among the roots)."""
        F = self.field
        if not F.char:
            raise CurveError("sampling needs a prime field")
        rng = random.Random(seed)
        for _ in range(max_tries):
            x0 = rng.randrange(F.p)
            fx = peval(self.f, x0, F)
            if fx == 0:
                continue
            roots = F.nth_roots(fx, self.n)
            if roots:
                return Place("finite", x0, rng.choice(roots), 0, 1)
        raise SamplingExhausted("no finite place found")

    def sample_places(self, count, seed, avoid=(), distinct_x=False, max_tries=100000):
        """``count`` distinct sampled finite places avoiding ``avoid``."""
        rng = random.Random(seed)
        avoid = set(avoid)
        xs_used = {P.x for P in avoid} if distinct_x else set()
        out = []
        for _ in range(max_tries):
            if len(out) == count:
                return out
            P = self.sample_place(rng.randrange(1 << 62))
            if P in avoid or (distinct_x and P.x in xs_used):
                continue
            out.append(P)
            avoid.add(P)
            xs_used.add(P.x)
        if len(out) == count:
            return out
        raise SamplingExhausted(f"could not sample {count} distinct places")

    # ------------------------------------------------------------------
    # canonical divisor

    def canonical_divisor(self):
        """Divisor of dx / y^(n-1); supported at infinity."""
        n, m = self.n, self.m
        if self.infinity_kind == "totally-ramified":
            K = Divisor({self.infinite_places[0]: -n - 1 + m * (n - 1)})
        else:
            K = Divisor({P: self.k * (n - 1) - 2 for P in self.infinite_places})
        if K.degree != 2 * self.genus - 2:
            raise CurveError("canonical divisor has the wrong degree")
        return K

    # ------------------------------------------------------------------
    # local series of x and y

    def _local_series(self, P, N):
        """(sx, xs, sy, ys): x = t^sx * xs(t), y = t^sy * ys(t), N terms each."""
        key = P
        hit = self._local_cache.get(key)
        if hit is not None and hit[0] >= N:
            _, sx, xs, sy, ys = hit
            return sx, xs[:N], sy, ys[:N]
        F = self.field
        n = self.n
        if P.kind == "finite":
            sx, sy = 0, 0
            xs = [P.x, F.one] + [F.zero] * (N - 2)
            xs = xs[:N]
            fs = pshift(self.f, P.x, F)
            fs = fs + [F.zero] * max(0, N - len(fs))
            ys = snth_root(fs[:N], n, P.y, N, F)
        elif P.kind == "branch":
            sx, sy = 0, 1
            Nu = N // n + 2
            s = self._branch_s(P.x, Nu)
            xs = [F.zero] * N
            xs[0] = P.x
            for k in range(1, Nu):
                if k * n < N:
                    xs[k * n] = s[k]
            ys = [F.one] + [F.zero] * (N - 1)
        elif self.infinity_kind == "totally-ramified":
            m = self.m
            sx, sy = -n, -m
            xs = [F.inv(self._lam)] + [F.zero] * (N - 1)
            A = [F.zero] * N
            inv_c = F.inv(self.c)
            lam_pow = F.one
            for i, coef in enumerate(self._frev):
                if n * i >= N:
                    break
                A[n * i] = F.norm(coef * lam_pow * inv_c)
                lam_pow = F.norm(lam_pow * self._lam)
            R = snth_root(A, n, F.one, N, F)
            ys = [F.norm(self._ycoef * v) for v in R]
        else:
            sx, sy = -1, -self.k
            xs = [F.one] + [F.zero] * (N - 1)
            inv_c = F.inv(self.c)
            A = [F.norm(v * inv_c) for v in self._frev[:N]] + [F.zero] * max(0, N - len(self._frev))
            R = snth_root(A, n, F.one, N, F)
            z = self._zroots[P.index]
            ys = [F.norm(z * v) for v in R]
        self._local_cache[key] = (N, sx, xs, sy, ys)
        return sx, xs, sy, ys

    def _branch_s(self, x0, Nu):
        """s(u) with f(x0 + s) = u, s(0) = 0, as a series in u."""
        F = self.field
        fd = pderiv(self.f, F)
        s = [F.zero, F.inv(peval(fd, x0, F))]
        prec = 2
        while prec < Nu:
            prec = min(2 * prec, Nu)
            s = s + [F.zero] * (prec - len(s))
            X = [x0] + s[1:prec]
            val = scompose_poly(self.f, X, prec, F)
            val[1] = F.norm(val[1] - 1)
            der = scompose_poly(fd, X, prec, F)
            step = smul(val, sinv(der, prec, F), prec, F)
            s = [F.norm(a - b) for a, b in zip(s, step)]
        return (s + [F.zero] * Nu)[:Nu]

    def x_valuation(self, P):
        """Valuation of the function x - P.x (finite/branch) or x (infinity)."""
        if P.kind == "finite":
            return 1
        if P.kind == "branch":
            return self.n
        return -P.e

    def poly_valuation(self, q, P):
        """Exact valuation at P of a nonzero polynomial q(x)."""
        F = self.field
        if P.kind == "infinity":
            return deg(q) * self.x_valuation(P)
        mult = 0
        q = list(q)
        while True:
            quo, rem = pdivmod(q, [F.neg(P.x), F.one], F)
            if rem:
                break
            mult += 1
            q = quo
        return mult * self.x_valuation(P)

    def monomial_start(self, P, i, b):
        sx, _, sy, _ = self._local_series(P, 1)
        return i * sx + b * sy

    def expand_monomials(self, monomials, P, A):
        """Expansions of x^i y^b at P, as a dict (i, b) -> list over exponents.

        Returns (S, table) where table[(i, b)][j] is the coefficient of
        t^(S + j) for S + j < A; S is the least start exponent.
        """
        F = self.field
        sx0, _, sy0, _ = self._local_series(P, 1)
        starts = {mono: mono[0] * sx0 + mono[1] * sy0 for mono in monomials}
        S = min(starts.values())
        L = A - S
        if L <= 0:
            return S, {mono: [] for mono in monomials}
        sx, xs, sy, ys = self._local_series(P, L + 2)
        xs, ys = xs[:L], ys[:L]
        max_i = max(i for i, _ in monomials)
        max_b = max(b for _, b in monomials)
        xp = [[F.one] + [F.zero] * (L - 1)]
        for _ in range(max_i):
            xp.append(smul(xp[-1], xs, L, F))
        yp = [[F.one] + [F.zero] * (L - 1)]
        for _ in range(max_b):
            yp.append(smul(yp[-1], ys, L, F))
        table = {}
        for mono in monomials:
            i, b = mono
            off = starts[mono] - S
            ser = smul(xp[i], yp[b], L - off, F) if off < L else []
            table[mono] = [F.zero] * off + ser
            table[mono] = table[mono][:L]
        return S, table

    def expand_bivariate(self, comps, P, A):
        """(S, coeffs) for G = sum comps[b](x) y^b at P, exponents S..A-1."""
        F = self.field
        monos = [(i, b) for b, poly in enumerate(comps) for i, v in enumerate(poly) if not F.is_zero(v)]
        if not monos:
            return None, []
        S, table = self.expand_monomials(monos, P, A)
        out = [F.zero] * max(0, A - S)
        for (i, b) in monos:
            coef = comps[b][i]
            for j, v in enumerate(table[(i, b)]):
                out[j] += coef * v
        return S, [F.norm(v) for v in out]

    def _pole_bound(self, comps):
        """Upper bound on the number of zeros of G = sum comps[b] y^b."""
        total = 0
        for I in self.infinite_places:
            starts = [self.monomial_start(I, i, b)
                      for b, poly in enumerate(comps) for i, v in enumerate(poly) if not self.field.is_zero(v)]
            total += max(0, -min(starts))
        return total

    def bivariate_valuation(self, comps, P):
        """Valuation of G = sum comps[b] y^b at P (None for G = 0)."""
        F = self.field
        if not any(comps):
            return None
        bound = self._pole_bound(comps)
        S, _ = self.expand_bivariate(comps, P, -10 ** 9)
        width = 8
        while True:
            _, coeffs = self.expand_bivariate(comps, P, S + width)
            for j, v in enumerate(coeffs):
                if not F.is_zero(v):
                    return S + j
            if S + width > bound + 1:
                raise CurveError("nonzero function with no detectable leading term")
            width *= 2

    def valuation(self, h, P):
        """v_P(h) for a FunctionRep h (None for h = 0)."""
        v = self.bivariate_valuation(h.comps, P)
        if v is None:
            return None
        return v - self.poly_valuation(h.den, P)

    def expand_window(self, h, P, start, count):
        """Coefficients of t^start .. t^(start+count-1) in the expansion of h."""
        F = self.field
        if count <= 0:
            return []
        if not any(h.comps):
            return [F.zero] * count
        vq = self.poly_valuation(h.den, P)
        A = start + count + vq
        S, G = self.expand_bivariate(h.comps, P, A)
        if not G:
            return [F.zero] * count
        # q = t^vq * u(t) with u a unit
        qS, qser = self.expand_bivariate([h.den], P, vq + len(G))
        qser = qser[vq - qS:]
        u_inv = sinv(qser, len(G), F)
        hs = smul(G, u_inv, len(G), F)
        hstart = S - vq
        out = []
        for e in range(start, start + count):
            j = e - hstart
            out.append(hs[j] if 0 <= j < len(hs) else F.zero)
        return out

    # ------------------------------------------------------------------
    # function helpers

    def function(self, comps, den=None):
        return FunctionRep(self, comps, den)

    def x_function(self):
        F = self.field
        return FunctionRep(self, [[F.zero, F.one]])

    def y_function(self):
        F = self.field
        return FunctionRep(self, [[], [F.one]])

    def constant(self, c):
        return FunctionRep(self, [[self.field(c)]])


class FunctionRep:
    """h = (sum_b comps[b](x) y^b) / den(x) on a superelliptic curve."""

    __slots__ = ("curve", "comps", "den")

    def __init__(self, curve, comps, den=None):
        F = curve.field
        n = curve.n
        comps = [trim(list(c), F) for c in comps]
        if len(comps) > n:
            raise CurveError("too many y-components; reduce first")
        comps = comps + [[] for _ in range(n - len(comps))]
        den = trim(list(den) if den is not None else [F.one], F)
        if not den:
            raise ZeroDivisionError("zero denominator")
        self.curve = curve
        self.comps = comps
        self.den = den

    def is_zero(self):
        return not any(self.comps)

    @staticmethod
    def numerator_product(C, a, b):
        F = C.field
        out = [[] for _ in range(2 * C.n - 1)]
        for i, u in enumerate(a):
            if not u:
                continue
            for j, v in enumerate(b):
                if v:
                    out[i + j] = padd(out[i + j], pmul(u, v, F), F)
        for k in range(len(out) - 1, C.n - 1, -1):
            if out[k]:
                out[k - C.n] = padd(out[k - C.n], pmul(out[k], C.f, F), F)
        return out[:C.n]

    def __mul__(self, other):
        C = self.curve
        F = C.field
        if not isinstance(other, FunctionRep):
            return FunctionRep(C, [pscale(c, F(other), F) for c in self.comps], self.den)
        num = FunctionRep.numerator_product(C, self.comps, other.comps)
        return FunctionRep(C, num, pmul(self.den, other.den, F))

    __rmul__ = __mul__

    def __add__(self, other):
        C = self.curve
        F = C.field
        if self.den == other.den:
            return FunctionRep(C, [padd(a, b, F) for a, b in zip(self.comps, other.comps)], self.den)
        return FunctionRep(C, [padd(pmul(a, other.den, F), pmul(b, self.den, F), F)
                               for a, b in zip(self.comps, other.comps)], pmul(self.den, other.den, F))

    def __neg__(self):
        F = self.curve.field
        return FunctionRep(self.curve, [pscale(c, F.neg(F.one), F) for c in self.comps], self.den)

    def __sub__(self, other):
        return self + (-other)

    def divide_poly(self, q):
        return FunctionRep(self.curve, self.comps, pmul(self.den, q, self.curve.field))

    def __eq__(self, other):
        if not isinstance(other, FunctionRep):
            return NotImplemented
        F = self.curve.field
        return all(pmul(a, other.den, F) == pmul(b, self.den, F)
                   for a, b in zip(self.comps, other.comps))

    def __hash__(self):
        return hash(tuple(tuple(c) for c in self.comps))

    def evaluate(self, x0, y0):
        """Value at the affine point (x0, y0); the denominator must not vanish."""
        F = self.curve.field
        d = peval(self.den, x0, F)
        if F.is_zero(d):
            raise ZeroDivisionError("denominator vanishes at this point")
        acc = F.zero
        ypow = F.one
        for c in self.comps:
            acc += peval(c, x0, F) * ypow
            ypow = F.norm(ypow * y0)
        return F.div(F.norm(acc), d)

    def __repr__(self):
        terms = []
        for b, c in enumerate(self.comps):
            if c:
                terms.append(f"({c})*y^{b}")
        return "FunctionRep(" + (" + ".join(terms) or "0") + f" / {self.den})"


@dataclass
class LaurentSeries:
    """Truncated expansion sum_j coefficients[j] t^(leading_valuation + j)."""

    place: Place
    leading_valuation: object
    coefficients: list
    field: object = None

    @property
    def truncation_order(self):
        return len(self.coefficients)

    def is_zero(self):
        return self.leading_valuation is None

    def __mul__(self, other):
        if self.is_zero() or other.is_zero():
            return LaurentSeries(self.place, None, [], self.field)
        N = min(len(self.coefficients), len(other.coefficients))
        return LaurentSeries(self.place, self.leading_valuation + other.leading_valuation,
                             smul(self.coefficients, other.coefficients, N, self.field), self.field)


def local_expand(C, h, P, order):
    """Laurent expansion of h at P: the first ``order`` coefficients
    starting from the leading (nonzero) term."""
    if order < 1:
        raise ValueError("order must be at least 1")
    C.check_place(P)
    v = C.valuation(h, P)
    if v is None:
        return LaurentSeries(P, None, [], C.field)
    return LaurentSeries(P, v, C.expand_window(h, P, v, order), C.field)


# ---------------------------------------------------------------------------
# Riemann-Roch spaces

@dataclass(frozen=True)
class RRBasis:
    """Basis of H^0(D) = {h : div(h) + D >= 0}, all sharing one denominator."""

    divisor: Divisor
    basis: tuple
    denominator: tuple

    @property
    def dim(self):
        return len(self.basis)


def _ceil_div(a, b):
    return -((-a) // b)


def riemann_roch_space(C, D, verify=True):
    """Basis of H^0(C, O(D)) by the ansatz method.

    h = G / q with q(x) clearing the finite poles allowed by D and
    G = sum P_b(x) y^b; degrees of the P_b are bounded from the infinite
    part of D (with a safety margin of one); the valuation conditions at
    every relevant place are linear in the coefficients of G.
    """
    key = D
    if key in C._rr_cache:
        return C._rr_cache[key]
    F = C.field
    n = C.n
    for P in D.support():
        C.check_place(P)

    groups = {}
    for P, mult in D.items():
        if P.kind != "infinity":
            groups.setdefault(P.x, {})[P] = mult
    e = {x0: max([_ceil_div(mult, P.e) for P, mult in grp.items() if mult > 0], default=0)
         for x0, grp in groups.items()}
    q = [F.one]
    for x0 in sorted(e):
        if e[x0]:
            q = pmul(q, ppow([F.neg(x0), F.one], e[x0], F), F)
    dq = deg(q)

    monomials = []
    for b in range(n):
        if C.infinity_kind == "totally-ramified":
            N_inf = D[C.infinite_places[0]] + n * dq
            top = (N_inf - C.m * b) // n + 1
        else:
            N_max = max(D[I] for I in C.infinite_places) + dq
            top = N_max - C.k * b + 1
        monomials.extend((i, b) for i in range(top + 1))

    if not monomials:
        out = RRBasis(D, (), tuple(q))
        C._rr_cache[key] = out
        return out

    col = {mono: j for j, mono in enumerate(monomials)}
    rows = []

    def add_vanishing(P, A):
        S, table = C.expand_monomials(monomials, P, A)
        for j in range(max(0, A - S)):
            row = [F.zero] * len(monomials)
            for mono in monomials:
                ser = table[mono]
                if j < len(ser):
                    row[col[mono]] = ser[j]
            rows.append(row)

    for I in C.infinite_places:
        need = C.poly_valuation(q, I) - D[I]
        add_vanishing(I, need)

    for x0, grp in sorted(groups.items(), key=lambda kv: kv[0]):
        ex = e[x0]
        over = C.places_over(x0)
        for P in grp:
            if P not in over:
                raise UnsupportedPlace(f"{P!r} not found over x = {x0}")
        for P in over:
            need = ex * P.e - grp.get(P, 0)
            if need > 0:
                add_vanishing(P, need)
        if ex > 0 and over and over[0].kind == "finite" and len(over) < n:
            rows.extend(_nonrational_rows(C, x0, [P.y for P in over], ex, monomials, col))

    M = ExactMatrix(F, rows, len(monomials))
    kern = kernel_basis(M) if rows else [
        [F.one if i == j else F.zero for i in range(len(monomials))] for j in range(len(monomials))]
    basis = []
    for vec in kern:
        comps = [[F.zero] * (max((i for i, bb in monomials if bb == b), default=-1) + 1) for b in range(n)]
        for mono, v in zip(monomials, vec):
            comps[mono[1]][mono[0]] = v
        basis.append(FunctionRep(C, comps, q))
    out = RRBasis(D, tuple(basis), tuple(q))
    if verify:
        for h in basis:
            if not in_riemann_roch_space(C, h, D):
                raise CurveError("a posteriori valuation check failed")
    C._rr_cache[key] = out
    return out


def _nonrational_rows(C, x0, rational_ys, e, monomials, col):
    """Conditions forcing G to vanish to order e at the places over x0
    that are not rational, via reduction modulo the cofactor of the
    rational roots in y^n - f(x0 + t) over k[t]/(t^e)."""
    F = C.field
    n = C.n
    N = e
    fs = pshift(C.f, x0, F)
    fs = (fs + [F.zero] * N)[:N]
    # Y(y) = sum Y[j] y^j with series coefficients
    Y = [[F.neg(v) for v in fs]] + [[F.zero] * N for _ in range(n - 1)] + [[F.one] + [F.zero] * (N - 1)]
    for y0 in rational_ys:
        P = Place("finite", x0, y0, 0, 1)
        _, _, _, eta = C._local_series(P, N)
        eta = eta[:N]
        d = len(Y) - 1
        Q = [None] * d
        Q[d - 1] = Y[d]
        for j in range(d - 1, 0, -1):
            Q[j - 1] = [F.norm(a + b) for a, b in zip(Y[j], smul(eta, Q[j], N, F))]
        Y = Q
    d = len(Y) - 1
    if d == 0:
        return []
    # powers of y reduced modulo Y (monic)
    red = []
    cur = [[F.one] + [F.zero] * (N - 1)] + [[F.zero] * N for _ in range(d - 1)]
    for b in range(n):
        red.append([list(c) for c in cur])
        top = cur[d - 1]
        shifted = [[F.zero] * N] + cur[:d - 1]
        cur = [[F.norm(a - bb) for a, bb in zip(shifted[j], smul(top, Y[j], N, F))] for j in range(d)]
    xpow = [[F.one] + [F.zero] * (N - 1)]
    xs = ([x0, F.one] + [F.zero] * N)[:N]
    max_i = max(i for i, _ in monomials)
    for _ in range(max_i):
        xpow.append(smul(xpow[-1], xs, N, F))
    rows = []
    for j in range(d):
        for tpow in range(N):
            row = [F.zero] * len(monomials)
            for (i, b) in monomials:
                row[col[(i, b)]] = smul(xpow[i], red[b][j], N, F)[tpow]
            rows.append(row)
    return rows


def in_riemann_roch_space(C, h, D):
    """Check div(h) + D >= 0 at all places of D, all infinite places and
    every rational place over a root of the denominator."""
    if h.is_zero():
        return True
    places = set(D.support()) | set(C.infinite_places)
    F = C.field
    from .poly import poly_roots
    for x0 in poly_roots(h.den, F):
        places.update(C.places_over(x0))
    for P in places:
        v = C.valuation(h, P)
        if v is not None and v < -D[P]:
            return False
    return True


def h0(C, D):
    return riemann_roch_space(C, D).dim


# ---------------------------------------------------------------------------
# pushforward towers

@dataclass(frozen=True)
class PushforwardTower:
    """Bookkeeping of pi_* O_C = sum O_{P^1}(-a_i) along a tower of covers.

    ``layers[j]`` holds the twist exponents of the j-th composite cover;
    ``degrees[j]`` and ``profiles[j]`` describe the j-th step (degree over
    the previous curve and its ramification indices) for Hurwitz checks.
    """

    layers: tuple
    degrees: tuple = ()
    profiles: tuple = ()

    def __post_init__(self):
        for tw in self.layers:
            if list(tw).count(0) != 1 or any(a < 0 for a in tw):
                raise CurveError("each layer needs exactly one zero twist a_0 = 0 and no negative twists")

    @classmethod
    def cyclic(cls, n, m):
        """Layer of y^n = f(x) with deg f = m: a_i = ceil(i m / n)."""
        tw = tuple(_ceil_div(i * m, n) for i in range(n))
        profile = (n,) * m + ((n,) if m % n else ())
        return cls((tw,), (n,), (profile,))

    def extend(self, step_twists, degree, profile):
        """Compose with a further cover whose own pushforward splits with
        twists ``step_twists`` in the pencil of the previous layer."""
        prev = self.layers[-1]
        tw = tuple(sorted(a + b for a in prev for b in step_twists))
        return PushforwardTower(self.layers + (tw,), self.degrees + (degree,), self.profiles + (tuple(profile),))

    def genus(self, layer=-1):
        return sum(max(0, a - 1) for a in self.layers[layer])

    def pencil_degree(self, layer=-1):
        return len(self.layers[layer])

    def hurwitz_genus(self, layer=-1):
        idx = range(len(self.layers))[layer]
        g = 0
        for j in range(idx + 1):
            g = hurwitz_genus(self.degrees[j], self.profiles[j], base_genus=g)
        return g


def tower_h0(T, k, layer=-1):
    """h^0 of k times the pencil: sum max(0, k - a_i + 1)."""
    return sum(max(0, k - a + 1) for a in T.layers[layer])


def tower_h1(T, k, layer=-1):
    """h^1 of k times the pencil, i.e. h^0(K - kF): sum max(0, a_i - k - 1)."""
    return sum(max(0, a - k - 1) for a in T.layers[layer])


def new_curve(n, f, char=0):
    return CurveModel(field_for(char), n, f)
