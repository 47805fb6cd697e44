import random
from itertools import combinations
from math import comb

import numpy as np
import pytest

from cliffrank.curve import CurveError, Divisor, new_curve
from cliffrank.exactla import ExactMatrix, det, rank_modp
from cliffrank.linser import JetTable, LineBundle, MultiplicationTensor, canonical_bundle, mult_map
from cliffrank.secant import (SamplePointCloud, UnstableDimension, evaluate_monomials,
                              det_presented, forms_vanish_on, hassett_witness, minor_forms, minor_span, monomials,
                              rank_locus_vs_secant, sample_secant_point, secant_cloud,
                              secant_dim_probe, tangent_space_check, vanishing_ideal_dim)
from cliffrank.shiffer import ShifferDatum

from conftest import F_G2, twisted_canonical

P = 32003


def general_bundle(C, d, seed):
    return LineBundle(Divisor.of(*C.sample_places(d, seed)))


def curve_points(C, L, count, seed):
    jt = JetTable(C, L)
    places = C.sample_places(count, seed, avoid=L.representative.support())
    V, _ = jt.values_and_derivatives(places)
    return V % P


def quadrics_through_curve(C, L, count=200, seed=3):
    """Independent count: quadrics vanishing at many curve points."""
    V = curve_points(C, L, count, seed)
    E = evaluate_monomials(V, 2, P)
    return comb(V.shape[1] + 1, 2) - rank_modp(E, P)


def cubics_singular_along_curve(C, L, count=400, seed=5):
    """Independent count of cubics containing every secant line: a cubic
    vanishes on all lines through two curve points exactly when it and its
    gradient vanish along the curve."""
    V = curve_points(C, L, count, seed)
    n = V.shape[1]
    mons = monomials(n, 3)
    rows = [evaluate_monomials(V, 3, P)]
    for v in range(n):
        # d/dz_v of each cubic monomial, evaluated at the points
        cols = []
        for m in mons:
            e = m.count(v)
            if e == 0:
                cols.append(np.zeros(V.shape[0], dtype=np.int64))
                continue
            rest = list(m)
            rest.remove(v)
            col = np.full(V.shape[0], e, dtype=np.int64)
            for u in rest:
                col = col * V[:, u] % P
            cols.append(col)
        rows.append(np.stack(cols, axis=1))
    return len(mons) - rank_modp(np.vstack(rows), P)


# ---------------------------------------------------------------------------
# forms and minors

def test_evaluate_monomials():
    pts = [[2, 3, 5], [1, 0, 7]]
    E = evaluate_monomials(pts, 2, P)
    mons = monomials(3, 2)
    assert len(mons) == 6
    for i, pt in enumerate(pts):
        for j, m in enumerate(mons):
            assert E[i, j] == pt[m[0]] * pt[m[1]] % P


def random_tensor(F, d1, d2, N, seed):
    rng = random.Random(seed)
    mu = [[[F.random(rng) for _ in range(N)] for _ in range(d2)] for _ in range(d1)]

    class _B:
        def __init__(self, dim):
            self.dim = dim
    return MultiplicationTensor(_B(d1), _B(d2), _B(N), mu, F)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_minor_forms_evaluate_to_determinants(k):
    C = new_curve(2, F_G2, P)
    F = C.field
    T = random_tensor(F, 3, 4, 3, k)
    forms = list(minor_forms(T, k))
    assert len(forms) == comb(3, k) * comb(4, k)
    rng = random.Random(k)
    subsets = [(R, S) for R in combinations(range(3), k) for S in combinations(range(4), k)]
    for _ in range(3):
        z = [F.random(rng) for _ in range(3)]
        M = [[F.norm(sum(m * x for m, x in zip(T.mu[a][b], z))) for b in range(4)] for a in range(3)]
        vals = evaluate_monomials([z], k, P)[0]
        for form, (R, S) in zip(forms, subsets):
            sub = ExactMatrix(F, [[M[a][b] for b in S] for a in R], k)
            assert int(vals @ form % P) == det(sub)


def test_minor_range_checked():
    C = new_curve(2, F_G2, P)
    T = random_tensor(C.field, 2, 2, 3, 0)
    with pytest.raises(ValueError):
        list(minor_forms(T, 3))
    with pytest.raises(CurveError):
        list(minor_forms(random_tensor(new_curve(2, F_G2).field, 2, 2, 2, 0), 1))


def test_minor_span_invariant_under_basis_change(hyp2):
    L = general_bundle(hyp2, 5, 1)
    T = mult_map(hyp2, L, L)
    d1, d2, N = T.dims
    rng = random.Random(4)
    A = [[rng.randrange(P) for _ in range(d1)] for _ in range(d1)]
    while rank_modp(np.array(A), P) < d1:
        A = [[rng.randrange(P) for _ in range(d1)] for _ in range(d1)]
    mu = T.mu_array()
    mu2 = np.einsum("ia,abc->ibc", np.array(A, dtype=np.int64), mu) % P
    T2 = MultiplicationTensor(T.basis1, T.basis2, T.basis12, mu2.tolist(), T.field)
    s1, s2 = minor_span(T, 2), minor_span(T2, 2)
    assert s1.dim == s2.dim
    assert np.array_equal(s1.basis, s2.basis)       # both reduced echelon


def test_two_minors_cut_out_quadrics_through_curve(hyp2):
    """Generic line bundles of degree 5 each: 2 x 2 minors versus the
    quadrics through the curve in the embedding by L1 L2 (degree 10)."""
    L1, L2 = general_bundle(hyp2, 5, 11), general_bundle(hyp2, 5, 12)
    T = mult_map(hyp2, L1, L2)
    span = minor_span(T, 2)
    cloud = secant_cloud(hyp2, L1 + L2, 0, 4 * comb(T.dims[2] + 1, 2), seed=2)
    assert forms_vanish_on(span.basis, cloud, 2, P)
    idim, _ = vanishing_ideal_dim(cloud, 2, P)
    assert idim == quadrics_through_curve(hyp2, L1 + L2)
    assert span.dim <= idim


def test_cubics_on_secant_lines_oracle(hyp2):
    """For L of degree 6 on a genus-2 curve (embedding by L^2, degree 12),
    the sampled ideal of Sec^1 in degree 3 agrees with the independent
    count of cubics singular along the curve."""
    L = general_bundle(hyp2, 6, 21)
    L2 = L * 2
    N = 11
    cloud = secant_cloud(hyp2, L2, 1, 4 * comb(N + 2, 3), seed=7)
    idim, _ = vanishing_ideal_dim(cloud, 3, P)
    assert idim == cubics_singular_along_curve(hyp2, L2) == 70


def test_symmetric_matrix_below_the_degree_bound(hyp2):
    """With L1 = L2 of degree 6 < 2g + 1 + k (k = 2) the multiplication
    matrix is symmetric and its 3 x 3 minors span only part of the cubics
    through Sec^1; two distinct bundles of degree 6 span all of them."""
    A, B = general_bundle(hyp2, 6, 10), general_bundle(hyp2, 6, 20)
    same = det_presented(hyp2, A, A, 2, seed=0)
    assert same.contained and not same.hypothesis_factors
    assert (same.minors_dim, same.ideal_dim) == (50, 70)
    assert same.verdict == "MINORS_SMALLER"
    mixed = det_presented(hyp2, A, B, 2, seed=0)
    assert (mixed.minors_dim, mixed.ideal_dim) == (70, 70)


def test_vanishing_ideal_on_a_line():
    """Points of the line z = 2x + 3y in P^2: the quadrics vanishing on it
    are the multiples of the linear form, a 3-dimensional space."""
    rng = random.Random(0)
    pts = []
    for _ in range(40):
        x, y = rng.randrange(P), rng.randrange(P)
        pts.append(np.array([x, y, (2 * x + 3 * y) % P], dtype=np.int64))
    cloud = SamplePointCloud(3, pts, 0, 0)
    dim, K = vanishing_ideal_dim(cloud, 2, P)
    assert dim == 3
    assert not (evaluate_monomials(pts, 2, P) @ K.T % P).any()
    with pytest.raises(UnstableDimension):
        vanishing_ideal_dim(SamplePointCloud(3, pts[:10], 0, 0), 2, P)


def test_vanishing_ideal_detects_unstable_prefix():
    """A cloud whose late points leave the line: prefixes disagree."""
    rng = random.Random(1)
    pts = []
    for i in range(40):
        x, y = rng.randrange(P), rng.randrange(P)
        z = (2 * x + 3 * y) % P if i < 30 else rng.randrange(P)
        pts.append(np.array([x, y, z], dtype=np.int64))
    with pytest.raises(UnstableDimension):
        vanishing_ideal_dim(SamplePointCloud(3, pts, 0, 0), 2, P)


def test_sampling_is_reproducible(hyp2):
    L = general_bundle(hyp2, 7, 3)
    a = sample_secant_point(hyp2, L, 1, 99)
    b = sample_secant_point(hyp2, L, 1, 99)
    assert a.vector == b.vector and a.places == b.places
    c1, c2 = secant_cloud(hyp2, L, 1, 20, 4), secant_cloud(hyp2, L, 1, 20, 4)
    assert all(np.array_equal(u, v) for u, v in zip(c1.points, c2.points))
    assert len(c1) == 20 and c1.level == 1


def test_secant_needs_prime_field():
    C = new_curve(2, F_G2)
    with pytest.raises(CurveError):
        secant_cloud(C, canonical_bundle(C), 0, 3)


# ---------------------------------------------------------------------------
# rank loci

@pytest.mark.parametrize("j", [1, 2])
def test_secant_points_have_low_rank(trig4, j):
    rep = rank_locus_vs_secant(trig4, canonical_bundle(trig4), j, trials=30, seed=j)
    assert rep.ok
    assert rep.max_rank == j


def test_disjoint_spans(hyp2):
    L = general_bundle(hyp2, 7, 8)
    rep = secant_dim_probe(hyp2, L, 1, trials=30)
    assert rep.all_independent and rep.ambient == 6


def test_hassett_witness_degree3(hyp2):
    L, D = twisted_canonical(hyp2, 3, 31)
    rep = hassett_witness(hyp2, L, D, seed=0)
    assert rep.rank == 1 and rep.plane_dim == 0
    assert rep.curve_points_on_plane == 0
    assert rep.curve_points_checked == len(hyp2.rational_places())
    assert rep.ok


def test_hassett_witness_degree4(hyp2):
    L, D = twisted_canonical(hyp2, 4, 32)
    rep = hassett_witness(hyp2, L, D, seed=0, tuples=300)
    assert rep.ok and rep.rank == 2
    assert rep.secant_check.endswith(", 0 spans contain tau")


def test_hassett_rejects_wrong_bundle(hyp2):
    L, D = twisted_canonical(hyp2, 3, 31)
    with pytest.raises(ValueError):
        hassett_witness(hyp2, L, Divisor.of(*hyp2.sample_places(3, 999)))
    L2, D2 = twisted_canonical(hyp2, 2, 31)
    with pytest.raises(ValueError):
        hassett_witness(hyp2, L2, D2)


@pytest.mark.parametrize("p", [1, 2])
def test_tangent_space_of_rank_locus(hyp2, p):
    L = general_bundle(hyp2, 7, 40)
    D = Divisor.of(*hyp2.sample_places(p, 50 + p))
    datum = ShifferDatum.random(D, hyp2.field, random.Random(p))
    rep = tangent_space_check(hyp2, L, D, datum)
    assert rep.ok
    assert rep.kernel_dim == 2 * p


def test_tangent_space_skips_degenerate_datum(hyp2):
    L = general_bundle(hyp2, 7, 40)
    Q = hyp2.sample_places(1, 3)[0]
    datum = ShifferDatum(Divisor({Q: 2}), {Q: [1, 0]})
    rep = tangent_space_check(hyp2, L, Divisor({Q: 2}), datum)
    assert rep.skipped and not rep.ok
