"""Exact linear algebra over the prime field F_p.

Vectors are plain tuples of canonical residues in [0, p); subspaces are
held in reduced row-echelon form by :class:`SubspaceFp`.  Everything is
exact integer arithmetic, eagerly reduced mod p, so values are hashable
and safe to share across threads.

The elimination core has a bit-packed fast path for p = 2 (a row is a
single int, elimination is xor); odd primes run on lists of ints.  Both
produce the same canonical RREF: pivots are the leftmost nonzero columns,
each pivot is 1 and is the only nonzero entry in its column.
"""

from __future__ import annotations

from functools import lru_cache

from .errors import DimensionMismatchError, ValidationError

Vec = tuple[int, ...]


@lru_cache(maxsize=32)
def _inv_table(p: int) -> tuple[int, ...]:
    """Multiplicative inverses mod p (index 0 unused)."""
    return (0,) + tuple(pow(a, p - 2, p) for a in range(1, p))

_SMALL_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43,
    47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
)


def is_prime(n: int) -> bool:
    """Deterministic primality check for the supported range."""
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n == q:
            return True
        if n % q == 0:
            return False
    # supported moduli are <= 97, so trial division above is complete
    f = 101
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or not 2 <= p <= 97 or not is_prime(p):
        raise ValidationError(f"modulus must be a prime in [2, 97], got {p!r}")
    return p


def vec_mod(v, p: int) -> Vec:
    return tuple(int(x) % p for x in v)


def vec_add(u: Vec, v: Vec, p: int) -> Vec:
    if len(u) != len(v):
        raise DimensionMismatchError(f"vector lengths {len(u)} != {len(v)}")
    return tuple((a + b) % p for a, b in zip(u, v))


def vec_sub(u: Vec, v: Vec, p: int) -> Vec:
    if len(u) != len(v):
        raise DimensionMismatchError(f"vector lengths {len(u)} != {len(v)}")
    return tuple((a - b) % p for a, b in zip(u, v))


def vec_scale(c: int, v: Vec, p: int) -> Vec:
    c %= p
    return tuple((c * a) % p for a in v)


# ---------------------------------------------------------------------------
# elimination core


def _echelon2(rows: list[int], ambient: int):
    """RREF over F_2 on bit-packed rows (bit c = column c). Returns (pivots, rows)."""
    pivots: list[int] = []
    out: list[int] = []
    for row in rows:
        for pc, pr in zip(pivots, out):
            if (row >> pc) & 1:
                row ^= pr
        if row:
            pc = (row & -row).bit_length() - 1
            # clear the new pivot column in earlier rows
            for i, pr in enumerate(out):
                if (pr >> pc) & 1:
                    out[i] = pr ^ row
            k = 0
            while k < len(pivots) and pivots[k] < pc:
                k += 1
            pivots.insert(k, pc)
            out.insert(k, row)
    return pivots, out


def _echelon_p(rows: list[list[int]], ambient: int, p: int):
    """RREF over F_p on list rows. Returns (pivots, rows)."""
    pivots: list[int] = []
    out: list[list[int]] = []
    invs = _inv_table(p)
    for row in rows:
        for pc, pr in zip(pivots, out):
            c = row[pc]
            if c:
                row = [(a - c * b) % p for a, b in zip(row, pr)]
        pc = next((j for j, a in enumerate(row) if a), -1)
        if pc >= 0:
            inv = invs[row[pc]]
            if inv != 1:
                row = [(inv * a) % p for a in row]
            for i, pr in enumerate(out):
                c = pr[pc]
                if c:
                    out[i] = [(a - c * b) % p for a, b in zip(pr, row)]
            k = 0
            while k < len(pivots) and pivots[k] < pc:
                k += 1
            pivots.insert(k, pc)
            out.insert(k, row)
    return pivots, out


def _pack2(v) -> int:
    m = 0
    for j, a in enumerate(v):
        if a & 1:
            m |= 1 << j
    return m


def _unpack2(m: int, ambient: int) -> Vec:
    return tuple((m >> j) & 1 for j in range(ambient))


class SubspaceFp:
    """A subspace of F_p^n, basis stored in reduced row-echelon form.

    The canonical basis makes equality, hashing and membership cheap; it is
    the working currency for X1, X2, X, ker rho and epicenters.
    """

    __slots__ = ("p", "ambient", "rows", "pivots")

    def __init__(self, p: int, ambient: int, rows: tuple[Vec, ...], pivots: tuple[int, ...]):
        # trusted constructor: rows must already be canonical RREF
        self.p = p
        self.ambient = ambient
        self.rows = rows
        self.pivots = pivots

    @property
    def dim(self) -> int:
        return len(self.rows)

    def is_zero(self) -> bool:
        return not self.rows

    def reduce(self, v) -> Vec:
        """Residual of v after elimination against the basis (zero iff member)."""
        if len(v) != self.ambient:
            raise DimensionMismatchError(
                f"vector length {len(v)} != ambient {self.ambient}")
        p = self.p
        w = [int(a) % p for a in v]
        for pc, row in zip(self.pivots, self.rows):
            c = w[pc]
            if c:
                for j, b in enumerate(row):
                    if b:
                        w[j] = (w[j] - c * b) % p
        return tuple(w)

    def contains(self, v) -> bool:
        return not any(self.reduce(v))

    def complement_coords(self) -> tuple[int, ...]:
        """Non-pivot columns: coordinates of a canonical complement."""
        piv = set(self.pivots)
        return tuple(j for j in range(self.ambient) if j not in piv)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SubspaceFp) and self.p == other.p
                and self.ambient == other.ambient and self.rows == other.rows)

    def __hash__(self):
        return hash((self.p, self.ambient, self.rows))

    def __repr__(self):
        return f"SubspaceFp(p={self.p}, ambient={self.ambient}, dim={self.dim})"


def rref(rows, ambient: int, p: int) -> tuple[SubspaceFp, int]:
    """Row space of the given rows as a canonical subspace, plus its rank."""
    check_prime(p)
    rows = list(rows)
    for r in rows:
        if len(r) != ambient:
            raise DimensionMismatchError(
                f"row length {len(r)} != ambient {ambient}")
    if p == 2:
        piv, packed = _echelon2([_pack2(r) for r in rows], ambient)
        basis = tuple(_unpack2(m, ambient) for m in packed)
    else:
        piv, lst = _echelon_p([[int(a) % p for a in r] for r in rows], ambient, p)
        basis = tuple(tuple(r) for r in lst)
    S = SubspaceFp(p, ambient, basis, tuple(piv))
    return S, S.dim


def subspace(rows, ambient: int, p: int) -> SubspaceFp:
    return rref(rows, ambient, p)[0]


def zero_subspace(ambient: int, p: int) -> SubspaceFp:
    return SubspaceFp(p, ambient, (), ())


def full_subspace(ambient: int, p: int) -> SubspaceFp:
    eye = tuple(tuple(1 if i == j else 0 for j in range(ambient)) for i in range(ambient))
    return SubspaceFp(p, ambient, eye, tuple(range(ambient)))


def member(v, S: SubspaceFp) -> bool:
    return S.contains(v)


def _check_compatible(S1: SubspaceFp, S2: SubspaceFp):
    if S1.p != S2.p or S1.ambient != S2.ambient:
        raise DimensionMismatchError(
            f"subspaces live in F_{S1.p}^{S1.ambient} vs F_{S2.p}^{S2.ambient}")


def subspace_sum(S1: SubspaceFp, S2: SubspaceFp) -> SubspaceFp:
    _check_compatible(S1, S2)
    return subspace(S1.rows + S2.rows, S1.ambient, S1.p)


def rank_of_rows(rows, ambient: int, p: int) -> int:
    """Rank only; avoids building tuples when just a dimension is needed."""
    if p == 2:
        return len(_echelon2([_pack2(r) for r in rows], ambient)[0])
    return len(_echelon_p([[int(a) % p for a in r] for r in rows], ambient, p)[0])


def kernel(matrix_rows, ncols: int, p: int) -> SubspaceFp:
    """Right kernel {x in F_p^ncols : M x = 0} of the matrix with the given rows."""
    check_prime(p)
    for r in matrix_rows:
        if len(r) != ncols:
            raise DimensionMismatchError(
                f"matrix row length {len(r)} != ncols {ncols}")
    if p == 2:
        piv, packed = _echelon2([_pack2(r) for r in matrix_rows], ncols)
        rows = [_unpack2(m, ncols) for m in packed]
    else:
        piv, rows = _echelon_p(
            [[int(a) % p for a in r] for r in matrix_rows], ncols, p)
    pivset = set(piv)
    basis = []
    for fc in range(ncols):
        if fc in pivset:
            continue
        x = [0] * ncols
        x[fc] = 1
        for pc, row in zip(piv, rows):
            x[pc] = (-row[fc]) % p
        basis.append(tuple(x))
    return subspace(basis, ncols, p)


def intersect(S1: SubspaceFp, S2: SubspaceFp) -> SubspaceFp:
    """S1 cap S2, via the kernel of the stacked coefficient matrix."""
    _check_compatible(S1, S2)
    a, b = S1.dim, S2.dim
    if a == 0 or b == 0:
        return zero_subspace(S1.ambient, S1.p)
    p, n = S1.p, S1.ambient
    # columns: coefficients (x, y) with  sum x_i A_i - sum y_j B_j = 0
    mat = []
    for c in range(n):
        mat.append(tuple(S1.rows[i][c] for i in range(a))
                   + tuple((-S2.rows[j][c]) % p for j in range(b)))
    ker = kernel(mat, a + b, p)
    vecs = []
    for coeff in ker.rows:
        v = [0] * n
        for i in range(a):
            if coeff[i]:
                for c, val in enumerate(S1.rows[i]):
                    if val:
                        v[c] = (v[c] + coeff[i] * val) % p
        vecs.append(tuple(v))
    return subspace(vecs, n, p)
