"""Koszul cohomology of the section ring of a line bundle.

With W = H^0(L) and M^q = H^0(L^q) (M^0 the constants, M^q = 0 for q < 0)
the boundary

    delta_{p,q}: wedge^p W (x) M^q -> wedge^(p-1) W (x) M^(q+1)
    e_I (x) m  ->  sum_k (-1)^k e_(I minus i_k) (x) (w_(i_k) m)

uses 0-based slot positions k in the increasingly sorted index set I, so
delta o delta = 0.  Wedge monomials are ordered lexicographically and a
basis vector e_I (x) m_b sits at index pos(I) * dim M^q + b.

Dual complexes are the transposed matrices.
"""

from dataclasses import dataclass
from itertools import combinations

from .curve import riemann_roch_space
from .exactla import ExactMatrix, rank, solve
from .linser import LineBundle, mult_map


class BudgetExceeded(MemoryError):
    pass


def wedge_basis(n, p):
    if p < 0 or p > n:
        return []
    return list(combinations(range(n), p))


@dataclass
class KoszulSlice:
    p: int
    q: int
    incoming: ExactMatrix
    outgoing: ExactMatrix
    dim: int


@dataclass
class BettiTable:
    """grid[q][p] = dim K_{p,q}."""
    grid: list
    pmax: int
    qmax: int

    def __getitem__(self, pq):
        p, q = pq
        return self.grid[q][p]

    def format(self):
        head = "q\\p " + " ".join(f"{p:>4}" for p in range(self.pmax + 1))
        lines = [head]
        for q in range(self.qmax + 1):
            lines.append(f"{q:>3} " + " ".join(f"{self.grid[q][p]:>4}" for p in range(self.pmax + 1)))
        return "\n".join(lines)


class KoszulComplex:
    """Boundary maps of the Koszul complex of (C, L), built lazily."""

    def __init__(self, C, L, budget=5 * 10 ** 7):
        self.curve = C
        self.bundle = L
        self.field = C.field
        self.budget = budget
        self._mult = {}
        self._dims = {}
        self.W = self.mdim(1)

    def mdim(self, q):
        if q < 0:
            return 0
        if q not in self._dims:
            self._dims[q] = riemann_roch_space(self.curve, self.bundle.representative * q).dim
        return self._dims[q]

    def multiplication(self, q):
        """mu[i][b] = coordinates of w_i * m_b in the basis of M^(q+1)."""
        if q not in self._mult:
            T = mult_map(self.curve, self.bundle, LineBundle(self.bundle.representative * q))
            self._mult[q] = T.mu
        return self._mult[q]

    def _guard(self, p, q):
        F = self.field
        if F.char and F.char <= max(p, q) + 1:
            raise ValueError(f"characteristic {F.char} too small for bidegree ({p}, {q})")

    def boundary(self, p, q):
        """Matrix of delta_{p,q} (columns: source basis, rows: target basis)."""
        self._guard(p, q)
        F = self.field
        n = self.W
        src_w, tgt_w = wedge_basis(n, p), wedge_basis(n, p - 1)
        dq, dq1 = self.mdim(q), self.mdim(q + 1)
        ncols, nrows = len(src_w) * dq, len(tgt_w) * dq1
        if nrows * ncols > self.budget:
            raise BudgetExceeded(f"delta_{p},{q} would have {nrows} x {ncols} = {nrows * ncols} entries, "
                                 f"budget {self.budget}")
        rows = [[F.zero] * ncols for _ in range(nrows)]
        if ncols and nrows:
            mu = self.multiplication(q)
            tpos = {J: i for i, J in enumerate(tgt_w)}
            for s, I in enumerate(src_w):
                for k, i in enumerate(I):
                    J = I[:k] + I[k + 1:]
                    base_r = tpos[J] * dq1
                    sign = -1 if k % 2 else 1
                    for b in range(dq):
                        col = s * dq + b
                        for c, v in enumerate(mu[i][b]):
                            if v:
                                rows[base_r + c][col] = F.norm(rows[base_r + c][col] + sign * v)
        return ExactMatrix(F, rows, ncols)

    def slice(self, p, q):
        inc = self.boundary(p + 1, q - 1)
        out = self.boundary(p, q)
        nsrc = len(wedge_basis(self.W, p)) * self.mdim(q)
        dim = nsrc - _rank(out) - _rank(inc)
        return KoszulSlice(p, q, inc, out, dim)

    def dim(self, p, q):
        return self.slice(p, q).dim

    def dual_dim(self, p, q):
        """Cohomology of the transposed complex at the mirrored slot."""
        inc = self.boundary(p + 1, q - 1).transpose()
        out = self.boundary(p, q).transpose()
        ntgt = len(wedge_basis(self.W, p)) * self.mdim(q)
        return ntgt - _rank(inc) - _rank(out)

    def betti_table(self, pmax, qmax):
        grid = [[self.dim(p, q) for p in range(pmax + 1)] for q in range(qmax + 1)]
        return BettiTable(grid, pmax, qmax)


def _rank(M):
    if M.shape[0] == 0 or M.shape[1] == 0:
        return 0
    return rank(M)


def koszul_boundary(C, L, p, q):
    return KoszulComplex(C, L).boundary(p, q)


def koszul_dim(C, L, p, q):
    return KoszulComplex(C, L).dim(p, q)


def betti_table(C, L, pmax, qmax):
    return KoszulComplex(C, L).betti_table(pmax, qmax)


def composite_is_zero(A, B):
    """B o A == 0 for consecutive boundaries A then B."""
    if A.shape[1] == 0 or B.shape[0] == 0 or A.shape[0] == 0:
        return True
    return (B @ A).is_zero()


# ---------------------------------------------------------------------------
# explicit classes

def wedge_coordinates(vectors, F):
    """Coordinates of v_1 ^ ... ^ v_c on the lexicographic wedge basis."""
    from .exactla import det
    c = len(vectors)
    n = len(vectors[0])
    out = []
    for I in wedge_basis(n, c):
        out.append(det(ExactMatrix(F, [[v[i] for i in I] for v in vectors], c)) if c else F.one)
    return out


def tensor_vector(wedge, phi, F):
    """Coordinates of phi (x) lambda in (wedge^c W (x) M^q)^dual, index
    pos(I) * dim M^q + b."""
    return [F.norm(l * f) for l in wedge for f in phi]


@dataclass
class ClassReport:
    c: int
    cocycle: bool
    coboundary: bool
    explicit_primitive: bool = None

    @property
    def nontrivial(self):
        return self.cocycle and not self.coboundary


def _column_basis(A, F):
    """Basis of the column space of a matrix (as row vectors)."""
    from .exactla import rref
    R, piv = rref(A.transpose())
    return [list(R.rows[i]) for i in range(len(piv))]


def class_of_datum(K, phi, tau):
    """Test phi (x) lambda, lambda the wedge of a basis of im(tau), in the
    dual complex at slot (c, 2), c = rank(tau)."""
    F = K.field
    sigma = _column_basis(tau, F)
    c = len(sigma)
    lam = wedge_coordinates(sigma, F)
    v = tensor_vector(lam, phi, F)
    return _cocycle_coboundary(K, c, v), (c, v)


def _cocycle_coboundary(K, c, v):
    F = K.field
    out = K.boundary(c + 1, 1)      # dual arrow is out^T
    cocycle = all(F.is_zero(x) for x in out.transpose().apply(v)) if out.shape[1] else True
    inc = K.boundary(c, 2)          # dual incoming arrow is inc^T
    if inc.shape[0] == 0:
        coboundary = all(F.is_zero(x) for x in v)
    else:
        coboundary = solve(inc.transpose(), v) is not None
    return ClassReport(c, cocycle, coboundary)


def verify_nontrivial_class(C, L, D, seed=0):
    """Class of the minimal-rank variation on D in K_{c,2}(C, L)^dual."""
    from .shiffer import datum_functional, min_rank_witness, shiffer_matrix
    datum = min_rank_witness(C, L, D, seed=seed)
    tau = shiffer_matrix(C, L, L, datum, allow_overlap=True).matrix
    phi = datum_functional(C, L * 2, datum)
    K = KoszulComplex(C, L)
    report, _ = class_of_datum(K, phi, tau)
    return report


def decomposable_coboundary(C, L, places, coeffs):
    """For curve points q_i and weights a_i, phi = sum a_i ev_(q_i) on M^2 and
    lambda = ev_(q_1) ^ ... ^ ev_(q_p) on W.  Returns the class report,
    including whether mu = sum a_i (-1)^(i-1) ev^3_(q_i) (x) (lambda omit i)
    maps exactly onto phi (x) lambda."""
    from .linser import JetTable
    F = C.field
    K = KoszulComplex(C, L)
    ev1 = [JetTable(C, L).jets(P, 1)[0] for P in places]
    ev2 = [JetTable(C, L * 2).jets(P, 1)[0] for P in places]
    ev3 = [JetTable(C, L * 3).jets(P, 1)[0] for P in places]
    phi = [F.zero] * len(ev2[0])
    for a, e in zip(coeffs, ev2):
        phi = [F.norm(x + a * y) for x, y in zip(phi, e)]
    p = len(places)
    lam = wedge_coordinates(ev1, F)
    v = tensor_vector(lam, phi, F)
    report = _cocycle_coboundary(K, p, v)
    mu = [F.zero] * (len(wedge_basis(K.W, p - 1)) * K.mdim(3))
    for i in range(p):
        rest = ev1[:i] + ev1[i + 1:]
        piece = tensor_vector(wedge_coordinates(rest, F) if rest else [F.one], ev3[i], F)
        s = coeffs[i] if i % 2 == 0 else F.neg(coeffs[i])
        mu = [F.norm(x + s * y) for x, y in zip(mu, piece)]
    image = K.boundary(p, 2).transpose().apply(mu)
    report.explicit_primitive = all(F.is_zero(F.norm(x - y)) for x, y in zip(image, v))
    return report
