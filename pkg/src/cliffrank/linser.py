"""Linear series on superelliptic curves: r_L(D), Clifford indices,
multiplication maps, Petri maps, base points and very ampleness.

A line bundle is carried by a representative divisor; sections of L are
the functions in H^0(rep(L)).  At a place P a section h is trivialized as
t^rep(P) * h, i.e. we read the coefficients of its expansion starting at
t^(-rep(P)).  For places outside the support of rep(L) this is plain
evaluation.
"""

import random
from dataclasses import dataclass
from math import comb

import numpy as np

from .curve import Divisor, riemann_roch_space, CurveError
from .exactla import ExactMatrix, rank, rank_modp, rref
from .poly import pderiv


class NotVeryAmple(ValueError):
    pass


class NotBasePointFree(ValueError):
    pass


@dataclass(frozen=True)
class LineBundle:
    representative: Divisor

    @property
    def degree(self):
        return self.representative.degree

    def __add__(self, other):
        return LineBundle(self.representative + other.representative)

    def __sub__(self, other):
        return LineBundle(self.representative - other.representative)

    def __mul__(self, k):
        return LineBundle(self.representative * k)

    __rmul__ = __mul__

    def twist(self, D):
        """L(-D)."""
        return LineBundle(self.representative - D)

    def dual(self):
        return LineBundle(-self.representative)


def canonical_bundle(C):
    return LineBundle(C.canonical_divisor())


def sections(C, L):
    return riemann_roch_space(C, L.representative)


def h0_bundle(C, L):
    return sections(C, L).dim


def h1_bundle(C, L):
    return riemann_roch_space(C, C.canonical_divisor() - L.representative).dim


def clifford_index_of_bundle(C, L):
    """deg L - 2 h^0(L) + 2."""
    return L.degree - 2 * h0_bundle(C, L) + 2


def r_L(C, L, D):
    """r_L(D) = h^0(L(-D)) - h^0(L) + deg D (D effective)."""
    if not D.is_effective() and D:
        raise ValueError("r_L needs an effective divisor")
    return h0_bundle(C, L.twist(D)) - h0_bundle(C, L) + D.degree


def cliff_pair(C, L, D):
    return D.degree - 2 * r_L(C, L, D)


def cliff_pair_residual(C, L, D):
    """cliff(L, D') for D' in |L^2 K^-1 (-D)|, computed from the class of
    L(-D') = K L^-1 (D) so D' itself is never needed."""
    K = C.canonical_divisor()
    d_res = 2 * L.degree - (2 * C.genus - 2) - D.degree
    h_res = riemann_roch_space(C, K - L.representative + D).dim
    r_res = h_res - h0_bundle(C, L) + d_res
    return d_res - 2 * r_res


def cliff_two_bundle(C, L1, L2, D):
    return D.degree - r_L(C, L1, D) - r_L(C, L2, D)


# ---------------------------------------------------------------------------
# jets of sections

class JetTable:
    """Trivialized jets of a basis of H^0(L) at rational places."""

    def __init__(self, C, L):
        self.curve = C
        self.bundle = L
        self.basis = sections(C, L)
        self.h = self.basis.dim
        self._cache = {}

    def jets(self, P, count):
        """count x h list: row j holds the t^j coefficients of t^rep(P) h_a."""
        hit = self._cache.get(P)
        if hit is not None and len(hit) >= count:
            return hit[:count]
        C = self.curve
        F = C.field
        start = -self.bundle.representative[P]
        cols = [C.expand_window(h, P, start, count) for h in self.basis.basis]
        rows = [[F.norm(cols[a][j]) for a in range(self.h)] for j in range(count)]
        self._cache[P] = rows
        return rows

    def values_and_derivatives(self, places):
        """Numpy arrays (V, Dv) of jet orders 0 and 1 at a list of places."""
        C = self.curve
        F = C.field
        p = F.p
        rep = self.bundle.representative
        den = list(self.basis.denominator)
        V = np.zeros((len(places), self.h), dtype=np.int64)
        Dv = np.zeros((len(places), self.h), dtype=np.int64)
        fast = [i for i, P in enumerate(places)
                if P.kind == "finite" and rep[P] == 0 and _peval_int(den, P.x, p) != 0]
        fast_set = set(fast)
        if fast:
            xs = np.array([places[i].x for i in fast], dtype=np.int64)
            ys = np.array([places[i].y for i in fast], dtype=np.int64)
            qv = _np_peval(den, xs, p)
            qd = _np_peval(pderiv(den, F), xs, p)
            qinv = _np_inv(qv, p)
            fd = _np_peval(pderiv(C.f, F), xs, p)
            ypow = [np.ones_like(ys)]
            for _ in range(C.n):
                ypow.append(ypow[-1] * ys % p)
            # dy/dx = f'(x) / (n y^(n-1))
            dy = fd * _np_inv(F.norm(C.n) * ypow[C.n - 1] % p, p) % p
            for a, h in enumerate(self.basis.basis):
                g = np.zeros_like(xs)
                gd = np.zeros_like(xs)
                for b, comp in enumerate(h.comps):
                    if not comp:
                        continue
                    cv = _np_peval(comp, xs, p)
                    cd = _np_peval(pderiv(comp, F), xs, p)
                    g = (g + cv * ypow[b]) % p
                    gd = (gd + cd * ypow[b]) % p
                    if b:
                        gd = (gd + b * cv % p * ypow[b - 1] % p * dy) % p
                val = g * qinv % p
                V[fast, a] = val
                Dv[fast, a] = (gd - val * qd % p) % p * qinv % p
        for i, P in enumerate(places):
            if i not in fast_set:
                rows = self.jets(P, 2)
                V[i] = rows[0]
                Dv[i] = rows[1]
        return V, Dv

    def rank_at(self, D):
        """Rank of the jets of H^0(L) along the effective divisor D."""
        F = self.curve.field
        rows = []
        for P, k in D.items():
            rows.extend(self.jets(P, k))
        if not rows:
            return 0
        return rank(ExactMatrix(F, rows, self.h))

    def r(self, D):
        """r_L(D) computed from jets (independent of the RR-based r_L)."""
        return D.degree - self.rank_at(D)


def _peval_int(poly, x, p):
    acc = 0
    for c in reversed(poly):
        acc = (acc * x + c) % p
    return acc


def _np_peval(poly, xs, p):
    acc = np.zeros_like(xs)
    for c in reversed(poly):
        acc = (acc * xs + int(c)) % p
    return acc


def _np_inv(vals, p):
    return np.array([pow(int(v), -1, p) for v in vals], dtype=np.int64)


# ---------------------------------------------------------------------------
# searches

@dataclass
class CliffResult:
    value: object
    witness: object
    certified: bool
    candidates: int
    excluded_codim1: int = 0


# marker for divisors with r > 0 whose span has codimension exactly one
EXCLUDED = "codim-1"


class _Echelon:
    """Small echelon basis over F_p with cheap copies for backtracking."""

    __slots__ = ("p", "rows")

    def __init__(self, p, rows=None):
        self.p = p
        self.rows = rows or []

    def add(self, vec):
        p = self.p
        v = list(vec)
        for piv, row in self.rows:
            c = v[piv]
            if c:
                v = [(a - c * b) % p for a, b in zip(v, row)]
        for i, c in enumerate(v):
            if c:
                inv = pow(c, -1, p)
                v = [a * inv % p for a in v]
                return _Echelon(p, self.rows + [(i, v)])
        return self

    def __len__(self):
        return len(self.rows)


def candidate_count(num_places, lo, hi):
    return sum(comb(num_places + e - 1, e) for e in range(lo, hi + 1))


def _degree_window(C, L, budget):
    lo = max(1, L.degree - 2 * C.genus + 2)
    hi = min(budget, L.degree - C.genus + 1)
    return lo, hi


def cliff_bundle(C, L, search_budget=None, cap=10 ** 6, samples=2000, seed=0,
                 require_very_ample=True, structured=()):
    """cliff(C, L) = min cliff(L, D) over effective D with r_L(D) > 0 and
    h^0(L(-D)) >= 2 (span of codimension at least two).

    Exhaustive over divisors on rational places when the number of
    candidates is at most ``cap`` (certified), otherwise structured
    candidates plus random sampling (uncertified).
    """
    if require_very_ample:
        ok, _ = very_ample(C, L)
        if not ok:
            raise NotVeryAmple("L is not very ample")
    budget = search_budget if search_budget is not None else C.genus + L.degree
    lo, hi = _degree_window(C, L, budget)
    jt = JetTable(C, L)

    def score(e, rank_e):
        r = e - rank_e
        if r > 0:
            return e - 2 * r if jt.h - rank_e >= 2 else EXCLUDED
        return None

    return _search(C, [jt], lo, hi, score, cap, samples, seed, structured, L)


def cliff_curve(C, search_budget=None, **kw):
    """cliff(C) via L = K_C (very ampleness is not required here)."""
    kw.setdefault("require_very_ample", False)
    budget = search_budget if search_budget is not None else C.genus - 1
    return cliff_bundle(C, canonical_bundle(C), budget, **kw)


def cliff_two_bundle_min(C, L1, L2, search_budget=None, cap=10 ** 6, samples=2000, seed=0, structured=()):
    """min over effective D with r_1 > 0 or r_2 > 0 and h^0(L_i(-D)) >= 2
    for both bundles of d - r_1(D) - r_2(D)."""
    lo = max(1, min(L1.degree, L2.degree) - 2 * C.genus + 2)
    budget = search_budget if search_budget is not None else min(L1.degree, L2.degree)
    hi = min(budget, min(L1.degree, L2.degree) - 2)
    j1, j2 = JetTable(C, L1), JetTable(C, L2)

    def score(e, rk1, rk2):
        r1, r2 = e - rk1, e - rk2
        if r1 > 0 or r2 > 0:
            return e - r1 - r2 if j1.h - rk1 >= 2 and j2.h - rk2 >= 2 else EXCLUDED
        return None

    return _search(C, [j1, j2], lo, hi, score, cap, samples, seed, structured, L1)


def _search(C, tables, lo, hi, score, cap, samples, seed, structured, L):
    F = C.field
    if not F.char:
        raise CurveError("divisor searches need a prime field")
    if hi < lo:
        return CliffResult(None, None, True, 0)
    places = C.rational_places()
    N = len(places)
    count = candidate_count(N, lo, hi)
    if count <= cap:
        return _exhaustive(C, tables, places, lo, hi, score)
    return _sampled(C, tables, places, lo, hi, score, samples, seed, structured, L)


def _exhaustive(C, tables, places, lo, hi, score):
    p = C.field.p
    best = [None, None]
    visited = [0]
    excluded = [0]
    jets = [{} for _ in tables]

    def jet(t, idx, order):
        cache = jets[t]
        key = (idx, order)
        if key not in cache:
            cache[key] = tables[t].jets(places[idx], order + 1)[order]
        return cache[key]

    def dfs(start, seq, states, mult):
        e = len(seq)
        for idx in range(start, len(places)):
            m = mult + 1 if (seq and idx == seq[-1]) else 0
            new_states = [s.add(jet(t, idx, m)) for t, s in enumerate(states)]
            new_seq = seq + [idx]
            ee = e + 1
            if ee >= lo:
                visited[0] += 1
                val = score(ee, *[len(s) for s in new_states])
                if val is EXCLUDED:
                    excluded[0] += 1
                elif val is not None and (best[0] is None or val < best[0]):
                    best[0], best[1] = val, list(new_seq)
            if ee < hi and all(tables[t].h - len(s) >= 2 for t, s in enumerate(new_states)):
                dfs(idx, new_seq, new_states, m)

    dfs(0, [], [_Echelon(p) for _ in tables], 0)
    witness = None
    if best[1] is not None:
        witness = Divisor.of(*[places[i] for i in best[1]])
    return CliffResult(best[0], witness, True, visited[0], excluded[0])


def _sampled(C, tables, places, lo, hi, score, samples, seed, structured, L):
    rng = random.Random(seed)
    cands = []
    for D in structured:
        if lo <= D.degree <= hi:
            cands.append(D)
    K = C.canonical_divisor()
    resid = (L.representative - K).positive_part()
    finite_part = Divisor({P: m for P, m in resid.items() if P.kind != "infinity"})
    if finite_part and lo <= finite_part.degree <= hi:
        cands.append(finite_part)
    # fibres of x (pencil members), branch fibres and the polar divisor of x
    xs = sorted({P.x for P in places if P.kind == "finite"})
    rng_x = random.Random(seed + 1)
    for x0 in rng_x.sample(xs, min(20, len(xs))):
        over = [P for P in places if P.kind == "finite" and P.x == x0]
        if len(over) == C.n:
            cands.append(Divisor.of(*over))
    for P in places:
        if P.kind == "branch":
            cands.append(Divisor({P: C.n}))
    cands.append(C.infinity_divisor())
    extra = []
    for D in cands:
        for k in range(2, 4):
            extra.append(D * k)
    cands += extra
    for _ in range(samples):
        e = rng.randint(lo, hi)
        cands.append(Divisor.of(*[rng.choice(places) for _ in range(e)]))
    best, wit = None, None
    seen = 0
    excluded = 0
    for D in cands:
        if not (lo <= D.degree <= hi) or not D.is_effective():
            continue
        seen += 1
        val = score(D.degree, *[t.rank_at(D) for t in tables])
        if val is EXCLUDED:
            excluded += 1
            continue
        if val is None:
            continue
        key = [P.sort_key() for P, _ in D.items()]
        if best is None or val < best or (val == best and key < [P.sort_key() for P, _ in wit.items()]):
            best, wit = val, D
    return CliffResult(best, wit, False, seen, excluded)


# ---------------------------------------------------------------------------
# multiplication maps

@dataclass
class MultiplicationTensor:
    basis1: object
    basis2: object
    basis12: object
    mu: list            # mu[a][b] is the coordinate vector in basis12
    field: object

    @property
    def dims(self):
        return (self.basis1.dim, self.basis2.dim, self.basis12.dim)

    def flattened(self):
        d1, d2, _ = self.dims
        return ExactMatrix(self.field, [self.mu[a][b] for a in range(d1) for b in range(d2)], self.basis12.dim)

    @property
    def rank(self):
        if self.basis12.dim == 0:
            return 0
        return rank(self.flattened())

    @property
    def surjective(self):
        return self.rank == self.basis12.dim

    @property
    def corank(self):
        return self.basis12.dim - self.rank

    def mu_array(self):
        d1, d2, d12 = self.dims
        return np.array(self.mu, dtype=np.int64).reshape(d1, d2, d12)


def _flatten_function(num, width):
    out = []
    for comp in num:
        out.extend(list(comp) + [0] * (width - len(comp)))
    return out


def mult_map(C, L1, L2):
    """Structure constants of H^0(L1) x H^0(L2) -> H^0(L1 + L2).

    With h_a = G_a/q1, k_b = H_b/q2 and g_c = E_c/q12 we solve
    G_a H_b q12 = sum_c mu_abc E_c q1 q2 exactly in k[x, y]/(y^n - f).
    """
    from .curve import FunctionRep
    from .poly import pmul
    F = C.field
    B1, B2 = sections(C, L1), sections(C, L2)
    B12 = riemann_roch_space(C, L1.representative + L2.representative)
    q1, q2, q12 = list(B1.denominator), list(B2.denominator), list(B12.denominator)
    q1q2 = pmul(q1, q2, F)
    symmetric = L1.representative == L2.representative
    targets = []
    pairs = []
    for a, h in enumerate(B1.basis):
        for b, k in enumerate(B2.basis):
            if symmetric and b < a:
                continue
            num = FunctionRep.numerator_product(C, h.comps, k.comps)
            targets.append([pmul(c, q12, F) for c in num])
            pairs.append((a, b))
    sources = [[pmul(c, q1q2, F) for c in g.comps] for g in B12.basis]
    width = max([len(c) for t in targets + sources for c in t] + [1])
    cols = [_flatten_function(s, width) for s in sources]
    rhs = [_flatten_function(t, width) for t in targets]
    d12 = len(cols)
    nrows = C.n * width
    mat = [[cols[c][i] for c in range(d12)] + [rhs[j][i] for j in range(len(rhs))] for i in range(nrows)]
    aug = ExactMatrix(F, mat, d12 + len(rhs))
    R, piv = rref(aug)
    if any(c >= d12 for c in piv) or len(piv) < d12 and d12 and piv[:d12] != list(range(len(piv))):
        raise CurveError("product not in the span of the target basis (internal error)")
    mu = [[None] * B2.dim for _ in range(B1.dim)]
    for j, (a, b) in enumerate(pairs):
        vec = [F.zero] * d12
        for r, c in enumerate(piv):
            vec[c] = R.rows[r][d12 + j]
        mu[a][b] = vec
        if symmetric:
            mu[b][a] = vec
    return MultiplicationTensor(B1, B2, B12, mu, F)


def quadratically_normal(C, L):
    return mult_map(C, L, L).surjective


# ---------------------------------------------------------------------------
# base points, very ampleness, Petri

def _verification_places(C, extra=(), cap=200000, seed=0, samples=200):
    F = C.field
    if F.char and F.p + C.n * F.p <= cap * 4:
        return C.rational_places(), True
    pts = set(extra) | set(C.infinite_places)
    pts.update(C.sample_places(samples, seed))
    return sorted(pts), False


def base_point_free(C, D):
    """(flag, certified): every verification place imposes a condition on
    H^0(D).  ``certified`` means all rational places were checked."""
    L = LineBundle(D)
    jt = JetTable(C, L)
    if jt.h == 0:
        return False, True
    places, certified = _verification_places(C, D.support())
    V, _ = jt.values_and_derivatives(places)
    ok = bool(np.all(np.any(V != 0, axis=1)))
    return ok, certified


def base_points(C, D):
    L = LineBundle(D)
    jt = JetTable(C, L)
    places, _ = _verification_places(C, D.support())
    V, _ = jt.values_and_derivatives(places)
    return [P for P, row in zip(places, V) if not row.any()]


def _projective_key(row, p):
    nz = np.nonzero(row)[0]
    if nz.size == 0:
        return None
    inv = pow(int(row[nz[0]]), -1, p)
    return tuple(int(v) for v in row * inv % p)


def very_ample(C, L):
    """(flag, certified): H^0(L) separates every pair of rational places
    (distinct pairs: evaluation vectors not proportional; p = q: value and
    first derivative independent, i.e. h^0(L - 2p) = h^0(L) - 2)."""
    jt = JetTable(C, L)
    F = C.field
    p = F.p
    if jt.h < 2:
        return False, True
    places, certified = _verification_places(C, L.representative.support())
    V, Dv = jt.values_and_derivatives(places)
    seen = set()
    for i in range(len(places)):
        key = _projective_key(V[i], p)
        if key is None or key in seen:
            return False, certified
        seen.add(key)
        if rank_modp(np.stack([V[i], Dv[i]]), p) < 2:
            return False, certified
    return True, certified


def petri_sides(C, D):
    """Ranks behind both sides of the base-point-free pencil equivalence.

    Returns (petri_surjective, sym_surjective) where the first is the
    surjectivity of H^0(D) x H^0(K - D) -> H^0(K) and the second that of
    H^0(D) x H^0(D) -> H^0(2D).
    """
    K = C.canonical_divisor()
    T1 = mult_map(C, LineBundle(D), LineBundle(K - D))
    T2 = mult_map(C, LineBundle(D), LineBundle(D))
    return T1.surjective, T2.surjective


def petri_surjective(C, D):
    """Petri surjectivity for a base-point-free pencil D, after checking
    that the two sides of the equivalence agree."""
    if h0_bundle(C, LineBundle(D)) != 2:
        raise ValueError("the pencil trick needs h^0(D) = 2")
    ok, _ = base_point_free(C, D)
    if not ok:
        raise NotBasePointFree("D has base points")
    petri, sym = petri_sides(C, D)
    if petri != sym:
        raise AssertionError("the two sides of the pencil equivalence disagree")
    return petri


def d_pointed_plane_search(C, L, d, seed=0, tries=200):
    """A degree-d divisor D with h^1(L(-D)) > 0, or None if not found."""
    g = C.genus
    if L.degree != 2 * g - 2:
        raise ValueError("d-pointed plane search needs deg L = 2g - 2")
    if 2 * d < h0_bundle(C, L) + 1:
        raise ValueError("needs 2d >= h^0(L) + 1")
    K = C.canonical_divisor()
    delta = L.representative - K
    A = delta.positive_part()
    used = set(delta.support())
    rng = random.Random(seed)

    def special(D):
        return riemann_roch_space(C, K - L.representative + D).dim > 0

    if A.degree <= d:
        for attempt in range(5):
            extra = C.sample_places(d - A.degree, rng.randrange(1 << 30), avoid=used) if d > A.degree else []
            D = A + Divisor.of(*extra)
            if special(D):
                return D
    for _ in range(tries):
        D = Divisor.of(*C.sample_places(d, rng.randrange(1 << 30), avoid=used))
        if special(D):
            return D
    return None
