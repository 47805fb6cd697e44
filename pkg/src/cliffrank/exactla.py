"""Exact linear algebra over the rationals and prime fields.

Scalars are stored raw: residues modulo p are plain ``int`` values in
``[0, p)`` and rationals are :class:`fractions.Fraction`.  A field object
carries the characteristic and does the reductions, so containers
(matrices, polynomials, series) always know which field they live in.

Over F_p elimination runs on numpy ``int64`` arrays.  Every product of two
reduced residues is below p**2 < 2**63, so nothing overflows as long as
p < 2**31.  Over Q, rank and determinant use Bareiss fraction-free
elimination on integer rows and kernels use Gauss-Jordan on fractions.
"""

from fractions import Fraction
from itertools import combinations
from math import lcm

import numpy as np
from sympy import isprime
from sympy.ntheory import nthroot_mod


class CharacteristicMismatch(ValueError):
    pass


class PrimeField:
    """The field F_p with elements represented by ints in [0, p)."""

    _ROOT_TABLE_LIMIT = 1 << 17

    def __init__(self, p):
        p = int(p)
        if p < 2 or p >= 1 << 31 or not isprime(p):
            raise ValueError(f"{p} is not a supported prime")
        self.p = p
        self.char = p
        self.zero = 0
        self.one = 1
        self._root_tables = {}

    def __repr__(self):
        return f"GF({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __call__(self, v):
        if isinstance(v, Fraction):
            return v.numerator * self.inv(v.denominator % self.p) % self.p
        if isinstance(v, str):
            return self(Fraction(v))
        return int(v) % self.p

    def norm(self, a):
        return a % self.p

    def is_zero(self, a):
        return a % self.p == 0

    def neg(self, a):
        return -a % self.p

    def inv(self, a):
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of zero in " + repr(self))
        return pow(a, -1, self.p)

    def div(self, a, b):
        return a * self.inv(b) % self.p

    def power(self, a, e):
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a % self.p, e, self.p)

    def elements(self):
        return range(self.p)

    def random(self, rng):
        return rng.randrange(self.p)

    def random_nonzero(self, rng):
        return rng.randrange(1, self.p)

    def to_int(self, a):
        return int(a) % self.p

    def signed(self, a):
        """Representative in (-p/2, p/2], handy for printing."""
        a %= self.p
        return a - self.p if a > self.p // 2 else a

    def nth_roots(self, a, n):
        """All y in F_p with y**n == a, sorted."""
        a %= self.p
        if a == 0:
            return [0]
        if self.p <= self._ROOT_TABLE_LIMIT:
            table = self._root_tables.get(n)
            if table is None:
                table = {}
                for y in range(1, self.p):
                    table.setdefault(pow(y, n, self.p), []).append(y)
                self._root_tables[n] = table
            return list(table.get(a, ()))
        roots = nthroot_mod(a, n, self.p, all_roots=True)
        return sorted(int(r) for r in roots or ())


class RationalField:
    """The field Q with elements represented as Fractions."""

    p = 0
    char = 0
    zero = Fraction(0)
    one = Fraction(1)

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __call__(self, v):
        return Fraction(v)

    def norm(self, a):
        return a

    def is_zero(self, a):
        return a == 0

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in QQ")
        return 1 / Fraction(a)

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero in QQ")
        return Fraction(a) / b

    def power(self, a, e):
        return Fraction(a) ** e

    def elements(self):
        raise ValueError("QQ is infinite")

    def random(self, rng):
        return Fraction(rng.randint(-50, 50))

    def random_nonzero(self, rng):
        v = 0
        while v == 0:
            v = rng.randint(-50, 50)
        return Fraction(v)

    def to_int(self, a):
        if a.denominator != 1:
            raise ValueError(f"{a} is not an integer")
        return a.numerator

    def signed(self, a):
        return a

    def nth_roots(self, a, n):
        a = Fraction(a)
        if a == 0:
            return [Fraction(0)]
        out = []
        num, den = a.numerator, a.denominator
        rn, rd = _int_root(abs(num), n), _int_root(den, n)
        if rn is None or rd is None:
            return []
        if num > 0:
            out.append(Fraction(rn, rd))
            if n % 2 == 0:
                out.append(Fraction(-rn, rd))
        elif n % 2 == 1:
            out.append(Fraction(-rn, rd))
        return sorted(out)


def _int_root(a, n):
    if a < 0:
        return None
    r = round(a ** (1.0 / n)) if a < 1 << 50 else int(a ** (1.0 / n))
    for c in range(max(r - 2, 0), r + 3):
        if c ** n == a:
            return c
    lo, hi = 0, 1
    while hi ** n < a:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** n < a:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo ** n == a else None


QQ = RationalField()
_FIELDS = {}


def GF(p):
    """Shared PrimeField instance for p (keeps root tables cached)."""
    if p not in _FIELDS:
        _FIELDS[p] = PrimeField(p)
    return _FIELDS[p]


def field_for(char):
    return QQ if char == 0 else GF(char)


def check_same_field(*fields):
    first = fields[0]
    for other in fields[1:]:
        if other != first:
            raise CharacteristicMismatch(f"{first!r} vs {other!r}")
    return first


class ExactMatrix:
    """A dense matrix over a PrimeField or QQ.

    ``rows`` is a list of lists of raw field values.  Instances are treated
    as immutable; all operations return new matrices.
    """

    def __init__(self, field, rows, ncols=None):
        self.field = field
        self.rows = [[field.norm(v) for v in row] for row in rows]
        self.nrows = len(self.rows)
        if ncols is None:
            ncols = len(self.rows[0]) if self.rows else 0
        self.ncols = ncols
        for row in self.rows:
            if len(row) != ncols:
                raise ValueError("ragged matrix")

    @classmethod
    def zeros(cls, field, nrows, ncols):
        return cls(field, [[field.zero] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def identity(cls, field, n):
        rows = [[field.one if i == j else field.zero for j in range(n)] for i in range(n)]
        return cls(field, rows, n)

    @classmethod
    def from_numpy(cls, field, arr):
        arr = np.asarray(arr)
        return cls(field, [[int(v) for v in row] for row in arr], arr.shape[1])

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def characteristic(self):
        return self.field.char

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and self.rows == other.rows

    def __repr__(self):
        return f"ExactMatrix({self.field!r}, {self.nrows}x{self.ncols})"

    def transpose(self):
        return ExactMatrix(self.field, [list(col) for col in zip(*self.rows)] if self.nrows else [], self.nrows)

    T = property(transpose)

    def to_numpy(self):
        if self.field.char == 0:
            raise ValueError("numpy view only for prime fields")
        return np.array(self.rows, dtype=np.int64).reshape(self.nrows, self.ncols)

    def __add__(self, other):
        F = check_same_field(self.field, other.field)
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return ExactMatrix(F, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def scale(self, c):
        return ExactMatrix(self.field, [[c * a for a in r] for r in self.rows], self.ncols)

    def __matmul__(self, other):
        F = check_same_field(self.field, other.field)
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        if F.char:
            prod = matmul_modp(self.to_numpy(), other.to_numpy(), F.p)
            return ExactMatrix.from_numpy(F, prod) if prod.size else ExactMatrix.zeros(F, self.nrows, other.ncols)
        cols = list(zip(*other.rows))
        return ExactMatrix(F, [[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self.rows], other.ncols)

    def apply(self, vec):
        F = self.field
        return [F.norm(sum(a * b for a, b in zip(r, vec))) for r in self.rows]

    def submatrix(self, rows, cols):
        return ExactMatrix(self.field, [[self.rows[i][j] for j in cols] for i in rows], len(cols))

    def is_zero(self):
        return all(v == 0 for r in self.rows for v in r)


def matmul_modp(A, B, p):
    """Product of int64 residue matrices without overflow."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    # Chunk the inner dimension so partial sums stay below 2**63.
    step = max(1, (1 << 62) // max((p - 1) ** 2, 1))
    for k0 in range(0, A.shape[1], step):
        out = (out + A[:, k0:k0 + step] @ B[k0:k0 + step, :]) % p
    return out


# ---------------------------------------------------------------------------
# F_p elimination on numpy arrays

def rref_modp(A, p):
    """Reduced row echelon form of an int64 array over F_p.

    Returns ``(R, pivots)`` where R has the nonzero rows first.
    """
    R = np.array(A, dtype=np.int64) % p
    nrows, ncols = R.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            R[[r, k]] = R[[k, r]]
        R[r] = R[r] * pow(int(R[r, c]), -1, p) % p
        col = R[:, c].copy()
        col[r] = 0
        rows = np.nonzero(col)[0]
        if rows.size:
            R[rows] = (R[rows] - np.outer(col[rows], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rank_modp(A, p):
    """Rank over F_p by forward elimination only."""
    R = np.array(A, dtype=np.int64) % p
    if R.size == 0:
        return 0
    nrows, ncols = R.shape
    if nrows > ncols:
        R = R.T.copy()
        nrows, ncols = ncols, nrows
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            R[[r, k]] = R[[k, r]]
        inv = pow(int(R[r, c]), -1, p)
        below = R[r + 1:, c]
        rows = np.nonzero(below)[0] + r + 1
        if rows.size:
            factors = R[rows, c] * inv % p
            R[rows, c:] = (R[rows, c:] - np.outer(factors, R[r, c:])) % p
        r += 1
    return r


def kernel_modp(A, p):
    """Basis of the right kernel of A over F_p as an int64 array (rows)."""
    A = np.asarray(A, dtype=np.int64)
    ncols = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(ncols, dtype=np.int64)
    R, pivots = rref_modp(A, p)
    free = [c for c in range(ncols) if c not in set(pivots)]
    K = np.zeros((len(free), ncols), dtype=np.int64)
    for i, fc in enumerate(free):
        K[i, fc] = 1
        for r, pc in enumerate(pivots):
            K[i, pc] = -R[r, fc] % p
    return K


# ---------------------------------------------------------------------------
# Rational elimination

def _integer_rows(rows):
    out = []
    for row in rows:
        den = 1
        for v in row:
            den = lcm(den, Fraction(v).denominator)
        out.append([int(Fraction(v) * den) for v in row])
    return out


def bareiss_rank(rows):
    """Rank of an integer/rational matrix by Bareiss fraction-free elimination."""
    M = _integer_rows(rows)
    if not M:
        return 0
    nrows, ncols = len(M), len(M[0])
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pr = M[r]
        for i in range(r + 1, nrows):
            row = M[i]
            a = row[c]
            for j in range(c + 1, ncols):
                row[j] = (pr[c] * row[j] - a * pr[j]) // prev
            row[c] = 0
        prev = pr[c]
        r += 1
    return r


def bareiss_det(rows):
    """Determinant of a square rational matrix by Bareiss elimination."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    scale = Fraction(1)
    M = []
    for row in rows:
        den = 1
        for v in row:
            den = lcm(den, Fraction(v).denominator)
        scale /= den
        M.append([int(Fraction(v) * den) for v in row])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if piv is None:
                return Fraction(0)
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[k][k] * M[i][j] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * scale * M[n - 1][n - 1]


def rref_fraction(rows, ncols):
    R = [[Fraction(v) for v in row] for row in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(R):
            break
        piv = next((i for i in range(r, len(R)) if R[i][c] != 0), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = 1 / R[r][c]
        R[r] = [v * inv for v in R[r]]
        for i in range(len(R)):
            if i != r and R[i][c] != 0:
                a = R[i][c]
                R[i] = [x - a * y for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
    return R[:r], pivots


# ---------------------------------------------------------------------------
# Public operations

def rank(M):
    """Exact rank of an ExactMatrix."""
    if M.nrows == 0 or M.ncols == 0:
        return 0
    if M.field.char:
        return rank_modp(M.to_numpy(), M.field.p)
    return bareiss_rank(M.rows)


def rref(M):
    """(reduced row echelon rows as ExactMatrix, pivot columns)."""
    if M.field.char:
        if M.nrows == 0:
            return ExactMatrix(M.field, [], M.ncols), []
        R, piv = rref_modp(M.to_numpy(), M.field.p)
        return ExactMatrix.from_numpy(M.field, R[:len(piv)]) if piv else ExactMatrix(M.field, [], M.ncols), piv
    R, piv = rref_fraction(M.rows, M.ncols)
    return ExactMatrix(M.field, R, M.ncols), piv


def kernel_basis(M):
    """Basis of {v : M v = 0} as a list of vectors (lists of raw values)."""
    F = M.field
    if F.char:
        if M.ncols == 0:
            return []
        K = kernel_modp(M.to_numpy().reshape(M.nrows, M.ncols), F.p)
        return [[int(v) for v in row] for row in K]
    R, pivots = rref_fraction(M.rows, M.ncols)
    pivset = set(pivots)
    out = []
    for fc in range(M.ncols):
        if fc in pivset:
            continue
        v = [Fraction(0)] * M.ncols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -R[r][fc]
        out.append(v)
    return out


def det(M):
    if M.nrows != M.ncols:
        raise ValueError("determinant of a non-square matrix")
    F = M.field
    if F.char:
        return det_modp(M.rows, F.p)
    return bareiss_det(M.rows)


def det_modp(rows, p):
    """Determinant over F_p by plain elimination in pure Python."""
    A = [[v % p for v in r] for r in rows]
    n = len(A)
    d = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k]), None)
        if piv is None:
            return 0
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            d = -d
        pk = A[k]
        d = d * pk[k] % p
        inv = pow(pk[k], -1, p)
        for i in range(k + 1, n):
            a = A[i][k]
            if a:
                f = a * inv % p
                Ai = A[i]
                for j in range(k + 1, n):
                    Ai[j] = (Ai[j] - f * pk[j]) % p
    return d % p


def minors(M, k):
    """Stream (row_set, col_set, det) over all k x k minors.

    Order is lexicographic on the row set, then on the column set.
    """
    if k < 1 or k > min(M.nrows, M.ncols):
        raise ValueError(f"minor size {k} out of range for {M.nrows}x{M.ncols}")
    F = M.field
    col_sets = list(combinations(range(M.ncols), k))
    for rs in combinations(range(M.nrows), k):
        sub_rows = [M.rows[i] for i in rs]
        for cs in col_sets:
            sub = [[r[j] for j in cs] for r in sub_rows]
            yield rs, cs, (det_modp(sub, F.p) if F.char else bareiss_det(sub))


def solve(M, b):
    """One solution x of M x = b, or None when the system is inconsistent."""
    F = M.field
    aug = ExactMatrix(F, [row + [v] for row, v in zip(M.rows, b)], M.ncols + 1)
    R, piv = rref(aug)
    if M.ncols in piv:
        return None
    x = [F.zero] * M.ncols
    for r, c in enumerate(piv):
        x[c] = R.rows[r][M.ncols]
    return x


def rank_oracle(M):
    """Rank by an independent strategy: column-wise elimination in pure
    Python that always pivots on the last available nonzero entry.

    Used to cross-check :func:`rank`.
    """
    F = M.field
    cols = [list(c) for c in zip(*M.rows)] if M.nrows else []
    used = [False] * M.nrows
    r = 0
    for col_idx in range(len(cols) - 1, -1, -1):
        col = cols[col_idx]
        piv = None
        for i in range(M.nrows - 1, -1, -1):
            if not used[i] and not F.is_zero(col[i]):
                piv = i
                break
        if piv is None:
            continue
        used[piv] = True
        r += 1
        inv = F.inv(col[piv])
        for other in range(col_idx):
            oc = cols[other]
            if F.is_zero(oc[piv]):
                continue
            f = F.norm(oc[piv] * inv)
            for i in range(M.nrows):
                oc[i] = F.norm(oc[i] - f * col[i])
    return r


def span_dim(vectors, field):
    """Dimension of the span of a list of equal-length vectors."""
    vectors = list(vectors)
    if not vectors:
        return 0
    n = len(vectors[0])
    if any(len(v) != n for v in vectors):
        raise ValueError("vectors of different lengths")
    return rank(ExactMatrix(field, vectors, n))


class SpanAccumulator:
    """Incrementally maintained reduced row echelon basis of a span.

    The stored basis is the RREF of the span, which is unique; merging
    accumulators in any order therefore yields identical bases.
    """

    def __init__(self, field, length, chunk=256):
        self.field = field
        self.length = length
        self.chunk = chunk
        self._basis = []
        self._pending = []

    def add(self, vec):
        if len(vec) != self.length:
            raise ValueError("vector length mismatch")
        self._pending.append([self.field.norm(v) for v in vec])
        if len(self._pending) >= self.chunk:
            self._flush()

    def add_many(self, vectors):
        for v in vectors:
            self.add(v)

    def _flush(self):
        if not self._pending:
            return
        rows = self._basis + self._pending
        self._pending = []
        R, piv = rref(ExactMatrix(self.field, rows, self.length))
        self._basis = [list(r) for r in R.rows[:len(piv)]]

    def merge(self, other):
        check_same_field(self.field, other.field)
        out = SpanAccumulator(self.field, self.length, self.chunk)
        out._pending = self.basis + other.basis
        out._flush()
        return out

    @property
    def basis(self):
        self._flush()
        return [list(r) for r in self._basis]

    @property
    def dim(self):
        self._flush()
        return len(self._basis)

    def contains(self, vec):
        self._flush()
        base = len(self._basis)
        if base == 0:
            return all(self.field.is_zero(v) for v in vec)
        return span_dim(self._basis + [list(vec)], self.field) == base
