"""Secant varieties, rank loci and determinantal equations.

Convention used throughout: Sec^k(C) is the closure of the union of the
linear spans of k + 1 points of the embedded curve, so Sec^0(C) = C.
Points of P(H^0(L)^dual) are coordinate vectors on the chosen basis of
H^0(L); forms of degree k are coefficient vectors on the monomials of
degree k in those coordinates (itertools order).
"""

import random
from dataclasses import dataclass, field as dc_field
from itertools import combinations, combinations_with_replacement, permutations, product
from math import comb

import numpy as np

from .curve import CurveError, Divisor, riemann_roch_space
from .exactla import kernel_modp, matmul_modp, rank, rank_modp
from .linser import JetTable, LineBundle, mult_map
from .shiffer import (ShifferDatum, datum_functional, min_rank_witness, point_matrix,
                      shiffer_matrix)


class UnstableDimension(RuntimeError):
    pass


def _require_prime(F, degree=1):
    if not F.char:
        raise CurveError("secant computations run over F_p")
    if F.char <= degree:
        raise CurveError(f"characteristic must exceed the degree {degree}")


# ---------------------------------------------------------------------------
# monomials

def monomials(nvars, degree):
    return list(combinations_with_replacement(range(nvars), degree))


def _tensor_to_monomial_index(nvars, degree):
    """For each flat index of an nvars^degree tensor, its monomial index."""
    mons = monomials(nvars, degree)
    pos = {m: i for i, m in enumerate(mons)}
    idx = np.empty(nvars ** degree, dtype=np.int64)
    for flat, tup in enumerate(product(range(nvars), repeat=degree)):
        idx[flat] = pos[tuple(sorted(tup))]
    return idx, len(mons)


def evaluate_monomials(points, degree, p):
    """len(points) x #monomials matrix of monomial values mod p."""
    Z = np.asarray(points, dtype=np.int64) % p
    mons = monomials(Z.shape[1], degree)
    out = np.ones((Z.shape[0], len(mons)), dtype=np.int64)
    for j, m in enumerate(mons):
        col = np.ones(Z.shape[0], dtype=np.int64)
        for v in m:
            col = col * Z[:, v] % p
        out[:, j] = col
    return out


# ---------------------------------------------------------------------------
# sampling

@dataclass
class SecantPoint:
    vector: list
    places: tuple
    coefficients: tuple
    seed: int


@dataclass
class SamplePointCloud:
    ambient_dim: int
    points: list
    level: int
    seed: int
    provenance: list = dc_field(default_factory=list)   # (places, coefficients) per point

    def __len__(self):
        return len(self.points)


def sample_secant_point(C, L12, j, seed, table=None):
    """A random point on the span of j + 1 distinct curve points (a point of
    Sec^j).  The same seed replays the same point."""
    F = C.field
    _require_prime(F)
    jt = table or JetTable(C, L12)
    rng = random.Random(seed)
    avoid = L12.representative.support()
    places = C.sample_places(j + 1, rng.randrange(1 << 62), avoid=avoid)
    coeffs = [F.random_nonzero(rng) for _ in places]
    V, _ = jt.values_and_derivatives(places)
    vec = [F.norm(sum(c * int(V[i, a]) for i, c in enumerate(coeffs))) for a in range(jt.h)]
    if not any(vec):
        # a zero combination: resample deterministically
        return sample_secant_point(C, L12, j, seed + 1_000_003, jt)
    return SecantPoint(vec, tuple(places), tuple(coeffs), seed)


def secant_cloud(C, L12, j, count, seed=0):
    """``count`` independent points of Sec^j in P(H^0(L12)^dual)."""
    F = C.field
    _require_prime(F)
    p = F.p
    jt = JetTable(C, L12)
    rng = random.Random(seed)
    avoid = L12.representative.support()
    pts, prov = [], []
    while len(pts) < count:
        places = C.sample_places(j + 1, rng.randrange(1 << 62), avoid=avoid)
        coeffs = [F.random_nonzero(rng) for _ in places]
        V, _ = jt.values_and_derivatives(places)
        vec = np.zeros(jt.h, dtype=np.int64)
        for c, row in zip(coeffs, V):
            vec = (vec + c * row) % p
        if not vec.any():
            continue
        pts.append(vec)
        prov.append((tuple(places), tuple(coeffs)))
    return SamplePointCloud(jt.h, pts, j, seed, prov)


# ---------------------------------------------------------------------------
# minors

@dataclass
class MinorSpan:
    degree: int
    basis: np.ndarray
    nvars: int

    @property
    def dim(self):
        return int(self.basis.shape[0])


def minor_forms(T, k):
    """Yield each k x k minor of M = (sum_c mu_abc z_c) as a degree-k form."""
    F = T.field
    _require_prime(F, k)
    p = F.p
    d1, d2, N = T.dims
    if not 1 <= k <= min(d1, d2):
        raise ValueError(f"minor size {k} out of range for a {d1} x {d2} matrix")
    mu = T.mu_array() % p
    idx, nmons = _tensor_to_monomial_index(N, k)
    perms = [(perm, _sign(perm)) for perm in permutations(range(k))]
    for rows in combinations(range(d1), k):
        for cols in combinations(range(d2), k):
            tensor = np.zeros(N ** k, dtype=np.int64)
            for perm, sgn in perms:
                t = mu[rows[0], cols[perm[0]]]
                for i in range(1, k):
                    t = np.outer(t, mu[rows[i], cols[perm[i]]]).ravel() % p
                tensor = (tensor + sgn * t) % p
            form = np.bincount(idx, weights=tensor, minlength=nmons)
            yield np.asarray(np.round(form), dtype=np.int64) % p


def _sign(perm):
    s = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            s = -s
    return s


def minor_span(T, k, chunk=512):
    """Span of all k x k minors of the multiplication matrix, as forms of
    degree k on P(H^0(L12)^dual)."""
    F = T.field
    p = F.p
    N = T.dims[2]
    nmons = comb(N + k - 1, k)
    basis = np.zeros((0, nmons), dtype=np.int64)
    pending = []

    def flush(basis, pending):
        if not pending:
            return basis
        from .exactla import rref_modp
        R, piv = rref_modp(np.vstack([basis] + pending), p)
        return R[:len(piv)]

    for form in minor_forms(T, k):
        if form.any():
            pending.append(form[None, :])
        if len(pending) >= chunk:
            basis = flush(basis, pending)
            pending = []
    basis = flush(basis, pending)
    return MinorSpan(k, basis, N)


def forms_vanish_on(forms, cloud, degree, p):
    """True when every form vanishes at every cloud point."""
    if len(cloud.points) == 0 or forms.shape[0] == 0:
        return True
    E = evaluate_monomials(cloud.points, degree, p)
    return not matmul_modp(E, forms.T, p).any()


def vanishing_ideal_dim(cloud, degree, p, oversample=4, check_stability=True):
    """Dimension and basis of the degree-``degree`` forms vanishing on the
    cloud.  The dimension must be identical on the prefixes of size N/4,
    N/2 and N (two doublings), otherwise UnstableDimension is raised."""
    nmons = comb(cloud.ambient_dim + degree - 1, degree)
    if len(cloud.points) == 0:
        return nmons, np.eye(nmons, dtype=np.int64)
    if check_stability and len(cloud.points) < oversample * nmons:
        raise UnstableDimension(f"cloud has {len(cloud.points)} points, needs {oversample * nmons}")
    E = evaluate_monomials(cloud.points, degree, p)
    n = E.shape[0]
    dims = [nmons - rank_modp(E[:max(1, n // s)], p) for s in (4, 2, 1)] if check_stability else [None]
    if check_stability and len(set(dims)) != 1:
        raise UnstableDimension(f"dimension did not stabilize: {dims}")
    K = kernel_modp(E, p)
    return K.shape[0], K


# ---------------------------------------------------------------------------
# determinantal presentation

@dataclass
class DetReport:
    k: int
    minors_dim: int
    ideal_dim: int
    contained: bool
    hypothesis_factors: bool        # deg L_i >= 2g + 1 + k
    hypothesis_product: bool        # deg L1 + deg L2 >= 4g + 2 + 2k
    cloud_size: int
    seed: int

    @property
    def verdict(self):
        if not self.contained:
            return "CONTAINMENT_FAILED"
        return "EQUAL" if self.minors_dim == self.ideal_dim else "MINORS_SMALLER"


def det_presented(C, L1, L2, k, seed=0, oversample=4):
    """Compare the span of (k+1)-minors of M with the degree-(k+1) part of
    the ideal of Sec^(k-1) (a stabilized Monte-Carlo cloud)."""
    F = C.field
    p = F.p
    g = C.genus
    T = mult_map(C, L1, L2)
    ms = minor_span(T, k + 1)
    N = T.dims[2]
    L12 = LineBundle(L1.representative + L2.representative)
    need = oversample * comb(N + k, k + 1)
    cloud = secant_cloud(C, L12, k - 1, need, seed)
    contained = forms_vanish_on(ms.basis, cloud, k + 1, p)
    idim, _ = vanishing_ideal_dim(cloud, k + 1, p, oversample)
    return DetReport(k, ms.dim, idim, contained,
                     min(L1.degree, L2.degree) >= 2 * g + 1 + k,
                     L1.degree + L2.degree >= 4 * g + 2 + 2 * k,
                     len(cloud), seed)


# ---------------------------------------------------------------------------
# secant points versus the rank locus

@dataclass
class SecantRankReport:
    j: int
    trials: int
    max_rank: int
    violations: int
    shiffer_agreements: int

    @property
    def ok(self):
        return self.violations == 0 and self.shiffer_agreements == self.trials


def rank_locus_vs_secant(C, L, j, trials=100, seed=0):
    """Containment Sec^(j-1) in R^j: every point on the span of j curve
    points gives a matrix of rank <= j; also checks that the same point
    arises as the Shiffer datum on those j points."""
    if j == 0:
        return SecantRankReport(0, 0, 0, 0, 0)
    T = mult_map(C, L, L)
    L2 = L * 2
    jt2 = JetTable(C, L2)
    jt = JetTable(C, L)
    rng = random.Random(seed)
    worst, bad, agree = 0, 0, 0
    for _ in range(trials):
        pt = sample_secant_point(C, L2, j - 1, rng.randrange(1 << 62), jt2)
        Mx = point_matrix(T, pt.vector)
        rk = rank(Mx)
        worst = max(worst, rk)
        if rk > j:
            bad += 1
        D = Divisor.of(*pt.places)
        datum = ShifferDatum(D, {P: [c] for P, c in zip(pt.places, pt.coefficients)})
        if all(L.representative[P] == 0 for P in pt.places):
            if shiffer_matrix(C, L, L, datum, tables=(jt, jt)).matrix == Mx:
                agree += 1
    return SecantRankReport(j, trials, worst, bad, agree)


@dataclass
class HassettReport:
    d: int
    rank: int
    plane_dim: int
    curve_points_checked: int
    curve_points_on_plane: int
    exhaustive: bool
    secant_check: str
    datum: object = None

    @property
    def ok(self):
        return self.rank == self.d - 2 and self.curve_points_on_plane == 0


def hassett_witness(C, L, D, seed=0, tuples=2000):
    """A rank d-2 variation tau on D for L = K(D) whose image plane misses
    every rational point of the embedded curve.

    Missing the rational points is evidence over F_p only; the algebraic
    argument is that a curve point in im(tau) would force H^0(L^-1) != 0.
    """
    F = C.field
    _require_prime(F)
    p = F.p
    d = D.degree
    if d < 3:
        raise ValueError("the witness regime needs deg D >= 3")
    K = C.canonical_divisor()
    if L.degree != 2 * C.genus - 2 + d or riemann_roch_space(C, L.representative - K - D).dim != 1:
        raise ValueError("L is not K(D)")
    datum = min_rank_witness(C, L, D, seed=seed, method="omega")
    tau = shiffer_matrix(C, L, L, datum, allow_overlap=True).matrix
    rk = rank(tau)
    A = np.array(tau.rows, dtype=np.int64) % p
    # left null space: ev in colspace(tau) iff N ev = 0
    Nl = kernel_modp(A.T, p)
    jt = JetTable(C, L)
    places = C.rational_places()
    V, _ = jt.values_and_derivatives(places)
    hits = matmul_modp(V, Nl.T, p)
    on_plane = int(np.sum(~hits.any(axis=1)))
    if d == 3:
        secant_check = "exhaustive: Sec^0 = C and a rank-one tau on a curve point would put that point in im(tau)"
    else:
        secant_check = _sampled_secant_check(C, L, datum, d - 2, places, seed, tuples)
    return HassettReport(d, rk, rk - 1, len(places), on_plane, True, secant_check, datum)


def _sampled_secant_check(C, L, datum, npts, places, seed, tuples):
    """Evidence that the functional of tau is not on the span of npts
    rational curve points, from random tuples."""
    F = C.field
    p = F.p
    L2 = L * 2
    xi = np.array(datum_functional(C, L2, datum), dtype=np.int64)
    jt2 = JetTable(C, L2)
    rng = random.Random(seed)
    finite = [P for P in places if P.kind == "finite"]
    hits = 0
    for _ in range(tuples):
        pts = rng.sample(finite, npts)
        V, _ = jt2.values_and_derivatives(pts)
        if rank_modp(np.vstack([V, xi[None, :]]), p) == rank_modp(V, p):
            hits += 1
    return f"sampled: {tuples} tuples of {npts} rational points, {hits} spans contain tau"


# ---------------------------------------------------------------------------
# tangent spaces of the rank locus

@dataclass
class TangentReport:
    p: int
    kernel_dim: int
    jets_dim: int
    rr_dim: int
    contains_jets: bool
    skipped: str = ""

    @property
    def ok(self):
        return not self.skipped and self.contains_jets and self.kernel_dim == self.jets_dim == self.rr_dim


def tangent_space_check(C, L, D, datum):
    """Kernel of the Jacobian of the (p+1)-minors at the point of a datum,
    compared with the span of the jets of 2D."""
    F = C.field
    _require_prime(F)
    pr = F.p
    pdeg = D.degree
    L2 = L * 2
    T = mult_map(C, L, L)
    xi = datum_functional(C, L2, datum)
    M = np.array(point_matrix(T, xi).rows, dtype=np.int64) % pr
    if not datum.in_star or rank_modp(M, pr) != pdeg:
        return TangentReport(pdeg, 0, 0, 0, False, "datum is not of rank p in T*(D)")
    mu = T.mu_array() % pr
    h = T.dims[0]
    N = T.dims[2]
    rows = []
    k = pdeg + 1
    for R in combinations(range(h), k):
        for S in combinations(range(h), k):
            A = M[np.ix_(R, S)]
            adj = _adjugate_modp(A, pr)
            # d det(A)/d z_c = sum_ab adj[b, a] * mu[R_a, S_b, c]
            sub = mu[np.ix_(R, S)]                      # k x k x N
            grad = np.einsum("ba,abc->c", adj, sub) % pr
            rows.append(grad)
    J = np.array(rows, dtype=np.int64) % pr
    kernel_dim = N - rank_modp(J, pr)
    jt2 = JetTable(C, L2)
    jets = []
    for P, m in D.items():
        jets.extend(jt2.jets(P, 2 * m))
    Jets = np.array(jets, dtype=np.int64) % pr
    contains = not matmul_modp(J, Jets.T, pr).any()
    rr = riemann_roch_space(C, L2.representative).dim - riemann_roch_space(C, L2.representative - D * 2).dim
    return TangentReport(pdeg, kernel_dim, rank_modp(Jets, pr), rr, contains)


def _adjugate_modp(A, p):
    k = A.shape[0]
    from .exactla import det_modp
    if k == 1:
        return np.ones((1, 1), dtype=np.int64)
    adj = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            minor = np.delete(np.delete(A, i, axis=0), j, axis=1)
            adj[j, i] = ((-1) ** (i + j)) * det_modp(minor.tolist(), p) % p
    return adj


# ---------------------------------------------------------------------------
# secant dimension

@dataclass
class SecantDimReport:
    j: int
    trials: int
    independent: int
    ambient: int

    @property
    def all_independent(self):
        return self.independent == self.trials


def secant_dim_probe(C, L, j, trials=50, seed=0):
    """For random disjoint D, E of degree j + 1, test whether the 2(j+1)
    evaluation vectors of H^0(L) are independent (spans meet trivially)."""
    F = C.field
    _require_prime(F)
    jt = JetTable(C, L)
    rng = random.Random(seed)
    ok = 0
    for _ in range(trials):
        pts = C.sample_places(2 * (j + 1), rng.randrange(1 << 62), avoid=L.representative.support())
        V, _ = jt.values_and_derivatives(pts)
        if rank_modp(V, F.p) == 2 * (j + 1):
            ok += 1
    return SecantDimReport(j, trials, ok, jt.h)
