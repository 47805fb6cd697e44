"""Shiffer variations supported on a divisor, realized as matrices through
the residue pairing, together with rank bounds and low-rank witnesses.

A datum puts polar coefficients beta_{i,1..n_i} at the places p_i of
D = sum n_i p_i.  Paired with sections s of L1 and t of L2 it gives

    xi(s, t) = sum_i sum_j beta_ij * [t^(j-1)] (s~ t~)(p_i)

where s~, t~ are the trivialized local expansions.
"""

import random
from collections import Counter
from dataclasses import dataclass, field as dc_field

from .curve import CurveError, Divisor, UnsupportedPlace, riemann_roch_space
from .exactla import ExactMatrix, det, rank, solve
from .linser import JetTable, r_L
from .poly import poly_roots, roots_modp, trim


class SupportCollision(CurveError):
    pass


class NoRootInField(ArithmeticError):
    pass


class NoConstruction(RuntimeError):
    pass


@dataclass(frozen=True)
class ShifferDatum:
    divisor: Divisor
    coefficients: dict = dc_field(hash=False)   # place -> [beta_1, ..., beta_n]

    def __post_init__(self):
        if not self.divisor.is_effective() and self.divisor:
            raise ValueError("Shiffer data live on effective divisors")
        for P, k in self.divisor.items():
            betas = self.coefficients.get(P)
            if betas is None or len(betas) != k:
                raise IndexError(f"need exactly {k} coefficients at {P!r}")
        extra = set(self.coefficients) - set(self.divisor.support())
        if extra:
            raise IndexError(f"coefficients given off the divisor: {sorted(extra)}")

    @property
    def in_star(self):
        return all(betas[-1] != 0 for betas in self.coefficients.values())

    @classmethod
    def random(cls, D, F, rng):
        """Uniform data in T*(D): every coefficient in F^x."""
        return cls(D, {P: [F.random_nonzero(rng) for _ in range(k)] for P, k in D.items()})

    @classmethod
    def simple(cls, D, values=None):
        """Data on a reduced divisor with one coefficient per place."""
        places = D.support()
        if any(D[P] != 1 for P in places):
            raise ValueError("simple data need a reduced divisor")
        values = values if values is not None else [1] * len(places)
        return cls(D, {P: [v] for P, v in zip(places, values)})

    def scale(self, c, F):
        return ShifferDatum(self.divisor, {P: [F.norm(c * b) for b in bs] for P, bs in self.coefficients.items()})


@dataclass
class ShifferMatrix:
    matrix: ExactMatrix
    datum: ShifferDatum
    bundles: tuple

    @property
    def rank(self):
        return rank(self.matrix)


def local_pairing_matrix(betas, F):
    """k x k pairing of local monomials t^u (rows) with t^(k-1-v) (columns)
    under the polar part sum beta_j t^-j; upper triangular with beta_k on
    the diagonal."""
    k = len(betas)
    rows = [[F.zero] * k for _ in range(k)]
    for u in range(k):
        for v in range(k):
            j = u + (k - 1 - v) + 1
            if j <= k:
                rows[u][v] = F.norm(betas[j - 1])
    return ExactMatrix(F, rows, k)


def _check_support(C, L1, L2, D, allow_overlap):
    if allow_overlap:
        return
    for P in D.support():
        if P.kind != "finite":
            raise UnsupportedPlace(f"Shiffer data need finite places, got {P!r}")
        if L1.representative[P] or L2.representative[P]:
            raise SupportCollision(f"{P!r} lies in the support of a representative")


def shiffer_matrix(C, L1, L2, datum, allow_overlap=False, tables=None):
    """h0(L1) x h0(L2) matrix of the datum through the residue pairing."""
    F = C.field
    D = datum.divisor
    _check_support(C, L1, L2, D, allow_overlap)
    j1, j2 = tables if tables is not None else (JetTable(C, L1), None)
    if j2 is None:
        j2 = j1 if L1.representative == L2.representative else JetTable(C, L2)
    out = [[F.zero] * j2.h for _ in range(j1.h)]
    for P, k in D.items():
        betas = datum.coefficients[P]
        A = j1.jets(P, k)
        B = j2.jets(P, k)
        for u in range(k):
            for v in range(k - u):
                beta = betas[u + v]
                if F.is_zero(beta):
                    continue
                Au, Bv = A[u], B[v]
                for a in range(j1.h):
                    c = Au[a] * beta
                    if F.is_zero(F.norm(c)):
                        continue
                    row = out[a]
                    for b in range(j2.h):
                        row[b] += c * Bv[b]
    rows = [[F.norm(v) for v in row] for row in out]
    return ShifferMatrix(ExactMatrix(F, rows, j2.h), datum, (L1, L2))


def point_matrix(T, xi):
    """Matrix (xi(mu(e_a x f_b)))_ab for a functional xi on H^0(L1 L2)."""
    F = T.field
    d1, d2, d12 = T.dims
    if len(xi) != d12:
        raise ValueError(f"functional has length {len(xi)}, expected {d12}")
    rows = [[F.norm(sum(m * x for m, x in zip(T.mu[a][b], xi))) for b in range(d2)] for a in range(d1)]
    return ExactMatrix(F, rows, d2)


def evaluation_functional(C, L12, P):
    """Trivialized evaluation at P on the basis of H^0(L12)."""
    return JetTable(C, L12).jets(P, 1)[0]


def kernel_from_vanishing(C, L, D):
    """Coordinates of H^0(L(-D)) inside the basis of H^0(L)."""
    from .exactla import kernel_basis
    jt = JetTable(C, L)
    rows = []
    for P, k in D.items():
        rows.extend(jt.jets(P, k))
    if not rows:
        return [[C.field.one if i == j else C.field.zero for i in range(jt.h)] for j in range(jt.h)]
    return kernel_basis(ExactMatrix(C.field, rows, jt.h))


# ---------------------------------------------------------------------------
# rank bounds

@dataclass
class RankReport:
    d: int
    r1: int
    r2: int
    trials: int
    histogram: Counter
    violations: int

    @property
    def lower(self):
        return self.d - self.r1 - self.r2

    @property
    def upper(self):
        return self.d - max(self.r1, self.r2)

    @property
    def upper_attained(self):
        return self.histogram.get(self.upper, 0) > 0

    @property
    def lower_attained(self):
        return self.histogram.get(self.lower, 0) > 0

    @property
    def ok(self):
        return self.violations == 0


def rank_bounds_check(C, L1, L2, D, trials=200, seed=0, allow_overlap=False):
    """Sample ``trials`` data in T*(D) and record their ranks against
    [d - r1 - r2, d - max(r1, r2)]."""
    F = C.field
    rng = random.Random(seed)
    r1 = r_L(C, L1, D)
    r2 = r1 if L1.representative == L2.representative else r_L(C, L2, D)
    j1 = JetTable(C, L1)
    j2 = j1 if L1.representative == L2.representative else JetTable(C, L2)
    lo, hi = D.degree - r1 - r2, D.degree - max(r1, r2)
    hist = Counter()
    bad = 0
    for _ in range(trials):
        datum = ShifferDatum.random(D, F, rng)
        rk = shiffer_matrix(C, L1, L2, datum, allow_overlap, tables=(j1, j2)).rank
        hist[rk] += 1
        if not lo <= rk <= hi:
            bad += 1
    return RankReport(D.degree, r1, r2, trials, hist, bad)


# ---------------------------------------------------------------------------
# low-rank constructions

def low_rank_polynomial(vectors, F, weights=None):
    """Coefficients of f(lam) = det(diag(w) + lam a a^T) / prod(w), where
    x_d = sum a_i x_i; f is computed by exact determinants at enough
    sample values of lam and interpolation, not from a closed form."""
    d = len(vectors)
    if d < 2:
        raise ValueError("need at least two vectors")
    a = _combination(vectors, F)
    w = [F.one] * (d - 1) if weights is None else [F(v) for v in weights]
    wprod = F.one
    for v in w:
        wprod = F.norm(wprod * v)
    pts = list(range(d))
    vals = []
    for lam in pts:
        lam = F(lam)
        rows = [[F.norm((w[i] if i == j else 0) + lam * a[i] * a[j]) for j in range(d - 1)] for i in range(d - 1)]
        vals.append(F.div(det(ExactMatrix(F, rows, d - 1)), wprod))
    return _interpolate([F(v) for v in pts], vals, F), a


def _combination(vectors, F):
    """a with x_d = sum a_i x_i; x_1..x_{d-1} must be independent and
    every a_i nonzero."""
    d = len(vectors)
    head = vectors[:-1]
    h = len(vectors[0])
    M = ExactMatrix(F, [[head[i][r] for i in range(d - 1)] for r in range(h)], d - 1)
    if rank(M) != d - 1:
        raise ValueError("x_1 .. x_{d-1} are not independent")
    a = solve(M, list(vectors[-1]))
    if a is None:
        raise ValueError("x_d is not in the span of the others")
    if any(F.is_zero(v) for v in a):
        raise ValueError("x_d needs every coefficient a_i nonzero")
    return a


def _interpolate(xs, ys, F):
    """Newton interpolation; coefficients constant term first."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = F.div(coef[i] - coef[i - 1], xs[i] - xs[i - j])
    out = [coef[-1]]
    for i in range(n - 2, -1, -1):
        # out = out * (x - xs[i]) + coef[i]
        nxt = [F.zero] * (len(out) + 1)
        for k, c in enumerate(out):
            nxt[k + 1] += c
            nxt[k] -= c * xs[i]
        nxt[0] += coef[i]
        out = [F.norm(v) for v in nxt]
    return trim(out, F)


def _nonzero_roots(poly, F):
    if len(poly) <= 1:
        return []
    if F.char and F.p <= 1 << 16:
        from .poly import peval
        return [x for x in range(1, F.p) if F.is_zero(peval(poly, x, F))]
    if F.char:
        return [r for r in roots_modp(poly, F) if r]
    return [r for r in poly_roots(poly, F) if r]


def low_rank_coefficients(vectors, F, weights=None):
    """A nonzero lam with rank(sum w_i x_i x_i^T + lam x_d x_d^T) <= d - 2."""
    f, _ = low_rank_polynomial(vectors, F, weights)
    roots = _nonzero_roots(f, F)
    if not roots:
        raise NoRootInField("f(lam) has no nonzero root in the base field")
    return roots[0]


def min_rank_witness(C, L, D, seed=0, method=None, tries=50):
    """A datum on D whose Shiffer matrix has rank d - 2 r_L(D).

    method "omega": a section g of L^2 K^-1 (-D) with simple zeros on D
    defines the residue data beta_i = 1 / (g~'(p_i) y_i^(n-1)); used when D
    and the residual series are base point free.
    method "perturb": r_L(D) = 1 and r_{L^2}(D) = 0; perturb the last
    coefficient of a diagonal datum by a root of f(lam).
    """
    F = C.field
    r = r_L(C, L, D)
    target = D.degree - 2 * r
    rng = random.Random(seed)
    if r == 0:
        datum = ShifferDatum.random(D, F, rng)
        return datum
    methods = [method] if method else ["omega", "perturb"]
    errors = []
    for m in methods:
        try:
            if m == "omega":
                datum = _omega_datum(C, L, D, rng, tries)
            elif m == "perturb":
                datum = _perturb_datum(C, L, D, rng, tries)
            else:
                raise ValueError(f"unknown method {m!r}")
        except (NoConstruction, NoRootInField, ValueError) as exc:
            errors.append(f"{m}: {exc}")
            continue
        if shiffer_matrix(C, L, L, datum, allow_overlap=True).rank == target:
            return datum
        errors.append(f"{m}: rank did not drop to {target}")
    raise NoConstruction("; ".join(errors))


def _omega_datum(C, L, D, rng, tries):
    F = C.field
    if any(k != 1 for _, k in D.items()) or any(P.kind != "finite" for P in D.support()):
        raise NoConstruction("the residue construction needs a reduced divisor at finite places")
    K = C.canonical_divisor()
    R = L.representative * 2 - K
    B = riemann_roch_space(C, R - D)
    if B.dim == 0:
        raise NoConstruction("L^2 K^-1 (-D) has no sections")
    r = r_L(C, L, D)
    target = D.degree - 2 * r
    for _ in range(tries):
        coeffs = [F.random(rng) for _ in range(B.dim)]
        g = None
        for c, h in zip(coeffs, B.basis):
            term = h * c
            g = term if g is None else g + term
        if g is None or g.is_zero():
            continue
        betas = {}
        ok = True
        for P in D.support():
            lin = C.expand_window(g, P, -R[P] + 1, 1)[0]
            if F.is_zero(lin):
                ok = False
                break
            betas[P] = [F.inv(F.norm(lin * F.power(P.y, C.n - 1)))]
        if not ok:
            continue
        datum = ShifferDatum(D, betas)
        if shiffer_matrix(C, L, L, datum, allow_overlap=True).rank == target:
            return datum
    raise NoConstruction("no section of the residual series gave the expected rank")


def _perturb_datum(C, L, D, rng, tries):
    F = C.field
    if any(k != 1 for _, k in D.items()):
        raise NoConstruction("the perturbation construction needs a reduced divisor")
    if r_L(C, L, D) != 1:
        raise NoConstruction("needs r_L(D) = 1")
    if r_L(C, L * 2, D) != 0:
        raise NoConstruction("needs r_{L^2}(D) = 0")
    jt = JetTable(C, L)
    places = D.support()
    vecs = [jt.jets(P, 1)[0] for P in places]
    # order the places so that the last evaluation vector depends on all others
    order = None
    for last in range(len(places) - 1, -1, -1):
        cand = [i for i in range(len(places)) if i != last] + [last]
        try:
            _combination([vecs[i] for i in cand], F)
        except ValueError:
            continue
        order = cand
        break
    if order is None:
        raise NoConstruction("evaluation vectors are not in general position in their span")
    vecs = [vecs[i] for i in order]
    places = [places[i] for i in order]
    for attempt in range(tries):
        w = [F.one] * (len(vecs) - 1) if attempt == 0 else [F.random_nonzero(rng) for _ in range(len(vecs) - 1)]
        try:
            lam = low_rank_coefficients(vecs, F, w)
        except NoRootInField:
            continue
        values = w + [lam]
        return ShifferDatum(D, {P: [v] for P, v in zip(places, values)})
    raise NoRootInField("no weights gave a root in the base field")


def datum_functional(C, L12, datum, allow_overlap=True):
    """The functional of a datum on the basis of H^0(L12):
    g_c -> sum_i sum_j beta_ij [t^(j-1)] g~_c(p_i)."""
    F = C.field
    jt = JetTable(C, L12)
    out = [F.zero] * jt.h
    for P, k in datum.divisor.items():
        rows = jt.jets(P, k)
        for j, beta in enumerate(datum.coefficients[P]):
            out = [F.norm(o + beta * v) for o, v in zip(out, rows[j])]
    return out
