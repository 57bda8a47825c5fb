"""Independent homology oracle: dim H_2(G; F_p) from the normalized bar complex.

For a presentation group G of order n this builds (implicitly) the
boundary maps of the normalized bar resolution with trivial F_p
coefficients,

    d2[g|h]   = [h] - [gh] + [g],
    d3[g|h|m] = [h|m] - [gh|m] + [g|hm] - [g|h],

over bases indexed by tuples of non-identity elements (tuples containing
the identity are zero), and reports

    h2_dim = dim B2 - rank d2 - rank d3.

Ranks are exact.  d3 rows (at most 4 nonzeros each) stream through a
sparse echelon structure with leading-column pivoting; for large groups
the stream stops early once the rank stops moving and a certification
pass then proves the rank exact: the candidate null space of the pivot
rows is evaluated against *every* row of d3 (vectorized), and any
violated rows are fed back into the elimination.  Since the pivot rows
always lie in the row space, a fully clean certification pass forces the
two orthogonal complements to coincide, so the reported rank is exact
whether or not the early stop fired.

The same machinery doubles as the mod-p homology side of the
engine-vs-oracle cross-check: h2 = (s + t) + rank_p(G/G').
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import multiplier, presentation as pres
from .errors import CapExceededError, ValidationError
from .presentation import ClassTwoPresentation

DEFAULT_CAP = 128
HARD_CAP = 256


@dataclass(frozen=True)
class BarHomologyReport:
    group_order: int
    dim_B2: int
    dim_B3: int
    rank_d2: int
    rank_d3: int

    @property
    def h2_dim(self) -> int:
        return self.dim_B2 - self.rank_d2 - self.rank_d3

    def as_dict(self) -> dict:
        return {
            "group_order": self.group_order,
            "dim_B2": self.dim_B2, "dim_B3": self.dim_B3,
            "rank_d2": self.rank_d2, "rank_d3": self.rank_d3,
            "h2_dim": self.h2_dim,
        }


# ---------------------------------------------------------------------------
# elements and the multiplication table


def element_count(P: ClassTwoPresentation) -> int:
    return P.p ** (P.d + P.k)


def _decode(P: ClassTwoPresentation, idx: int):
    digits = []
    p = P.p
    for _ in range(P.d + P.k):
        digits.append(idx % p)
        idx //= p
    digits.reverse()
    return tuple(digits[:P.d]), tuple(digits[P.d:])


def _encode(P: ClassTwoPresentation, a, z) -> int:
    idx = 0
    for x in a + z:
        idx = idx * P.p + x
    return idx


def mult_table(P: ClassTwoPresentation) -> np.ndarray:
    """n x n table of product indices under mixed-radix element encoding."""
    n = element_count(P)
    elems = [_decode(P, i) for i in range(n)]
    table = np.empty((n, n), dtype=np.int32)
    for i, x in enumerate(elems):
        for j, y in enumerate(elems):
            table[i, j] = _encode(P, *pres.elem_mul(P, x, y))
    return table


# ---------------------------------------------------------------------------
# sparse echelon insertion (rows with few nonzeros, exact rank mod p)


class _Echelon2:
    """Echelon structure over F_2: a row is an int, bit c = column c."""

    def __init__(self):
        self.pivots: dict[int, int] = {}

    def insert(self, row: int) -> bool:
        piv = self.pivots
        while row:
            lead = row.bit_length() - 1
            other = piv.get(lead)
            if other is None:
                piv[lead] = row
                return True
            row ^= other
        return False

    @property
    def rank(self) -> int:
        return len(self.pivots)


class _EchelonP:
    """Echelon structure over F_p, rows as descending ((col, coef), ...) tuples."""

    def __init__(self, p: int):
        self.p = p
        self.pivots: dict[int, tuple] = {}

    def insert(self, row) -> bool:
        p = self.p
        piv = self.pivots
        row = tuple(row)
        while row:
            lead, coef = row[0]
            other = piv.get(lead)
            if other is None:
                if coef != 1:
                    inv = pow(coef, p - 2, p)
                    row = tuple((c, (inv * v) % p) for c, v in row)
                piv[lead] = row
                return True
            row = _row_sub(row, other, coef, p)
        return False

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _row_sub(row, other, factor: int, p: int):
    """row - factor * other, both descending-sorted sparse rows."""
    out = []
    i = j = 0
    ni, nj = len(row), len(other)
    while i < ni and j < nj:
        ci, cj = row[i][0], other[j][0]
        if ci > cj:
            out.append(row[i]); i += 1
        elif cj > ci:
            v = (-factor * other[j][1]) % p
            if v:
                out.append((cj, v))
            j += 1
        else:
            v = (row[i][1] - factor * other[j][1]) % p
            if v:
                out.append((ci, v))
            i += 1; j += 1
    out.extend(row[i:])
    for c, v in other[j:]:
        v = (-factor * v) % p
        if v:
            out.append((c, v))
    return tuple(out)


def _nullspace_of_pivots(pivots: dict, ncols: int, p: int) -> np.ndarray:
    """Basis (ncols x nf) of the solution space of the pivot rows.

    Rows are echelon (all non-lead columns strictly below the lead), so
    sweeping pivot columns in increasing order resolves each lead from
    already-final coordinates.
    """
    pivcols = sorted(pivots)
    free = sorted(set(range(ncols)) - set(pivcols))
    nf = len(free)
    Y = np.zeros((ncols, nf), dtype=np.int64)
    for idx, fc in enumerate(free):
        Y[fc, idx] = 1
    for pc in pivcols:
        row = pivots[pc]
        if p == 2:
            acc = np.zeros(nf, dtype=np.int64)
            r = row & ~(1 << pc)
            while r:
                c = r.bit_length() - 1
                acc ^= Y[c]
                r &= ~(1 << c)
            Y[pc] = acc
        else:
            acc = np.zeros(nf, dtype=np.int64)
            for c, v in row:
                if c != pc:
                    acc = (acc + v * Y[c]) % p
            Y[pc] = (-acc) % p
    return Y % p


# ---------------------------------------------------------------------------
# the bar complex


def _rank_d2(table: np.ndarray, p: int) -> int:
    n = table.shape[0]
    if p == 2:
        ech = _Echelon2()
        for g in range(1, n):
            tg = table[g].tolist()
            for h in range(1, n):
                row = (1 << (h - 1)) ^ (1 << (g - 1))
                gh = tg[h]
                if gh:
                    row ^= 1 << (gh - 1)
                if row:
                    ech.insert(row)
        return ech.rank
    ech = _EchelonP(p)
    for g in range(1, n):
        tg = table[g]
        for h in range(1, n):
            terms: dict[int, int] = {h - 1: 1}
            terms[g - 1] = (terms.get(g - 1, 0) + 1) % p
            gh = int(tg[h])
            if gh:
                terms[gh - 1] = (terms.get(gh - 1, 0) - 1) % p
            row = sorted(((c, v) for c, v in terms.items() if v), reverse=True)
            if row:
                ech.insert(row)
    return ech.rank


def _d3_terms(table: np.ndarray, n: int, g: int, h: int, m: int, p: int):
    """Sparse terms of d3[g|h|m] over pair columns (a-1)*(n-1) + (b-1)."""
    w = n - 1
    terms: dict[int, int] = {}

    def add(a, b, v):
        if a and b:
            c = (a - 1) * w + (b - 1)
            nv = (terms.get(c, 0) + v) % p
            if nv:
                terms[c] = nv
            elif c in terms:
                del terms[c]

    add(h, m, 1)
    add(int(table[g, h]), m, p - 1)
    add(g, int(table[h, m]), 1)
    add(g, h, p - 1)
    return terms


def _rank_d3_transpose2(table: np.ndarray) -> int:
    """Exact rank of d3 over F_2 by eliminating the (w^2 x w^3) transpose.

    Each pair column of d3 becomes one long bit row; with only w^2 rows the
    echelon walk is short even though rows are wide.  Worth it for n <= 64.
    """
    n = table.shape[0]
    w = n - 1
    nbits = w ** 3
    nbytes = (nbits + 7) // 8
    rows = [bytearray(nbytes) for _ in range(w * w)]

    def flip(c: int, t: int):
        rows[c][t >> 3] ^= 1 << (t & 7)

    t = 0
    for g in range(1, n):
        tg = table[g].tolist()
        gbase = (g - 1) * w
        for h in range(1, n):
            gh = tg[h]
            ghbase = (gh - 1) * w if gh else -1
            th = table[h].tolist()
            hmbase = (h - 1) * w
            colgh = gbase + h - 1
            for m in range(1, n):
                flip(hmbase + m - 1, t)
                if gh:
                    flip(ghbase + m - 1, t)
                hm = th[m]
                if hm:
                    flip(gbase + hm - 1, t)
                flip(colgh, t)
                t += 1
    ech = _Echelon2()
    for ba in rows:
        v = int.from_bytes(bytes(ba), "little")
        if v:
            ech.insert(v)
    return ech.rank


def _rank_d3(table: np.ndarray, p: int, early_stop: int | None,
             max_rounds: int = 20, violation_batch: int = 20000):
    """Exact rank of d3 by streamed sparse elimination plus certification."""
    n = table.shape[0]
    w = n - 1
    ncols = w * w
    nrows = w ** 3
    ech = _Echelon2() if p == 2 else _EchelonP(p)

    def insert_terms(terms):
        if not terms:
            return False
        if p == 2:
            row = 0
            for c in terms:
                row |= 1 << c
            return ech.insert(row)
        return ech.insert(sorted(terms.items(), reverse=True))

    def triple_of(idx):
        g, rest = divmod(idx, w * w)
        h, m = divmod(rest, w)
        return g + 1, h + 1, m + 1

    # deterministic pseudo-shuffled stream so the rank saturates early
    stride = (int(nrows * 0.6180339887498949) | 1)
    from math import gcd
    while gcd(stride, nrows) != 1:
        stride += 2
    idle = 0
    pos = 0
    for t in range(nrows):
        g, h, m = triple_of(pos)
        pos = (pos + stride) % nrows
        if insert_terms(_d3_terms(table, n, g, h, m, p)):
            idle = 0
        else:
            idle += 1
            if early_stop is not None and idle >= early_stop:
                break

    # certification: candidate null space must kill every row of d3
    tbl = table.astype(np.int64)
    for _ in range(max_rounds):
        Y = _nullspace_of_pivots(ech.pivots, ncols, p)
        nf = Y.shape[1]
        if nf == 0:
            return ncols
        # Yext[a, b] = Y[(a-1) w + (b-1)], zero when a or b is the identity
        Yext = np.zeros((n, n, nf), dtype=np.int64)
        Yext[1:, 1:, :] = Y.reshape(w, w, nf)
        bad: list[tuple[int, int, int]] = []
        hm = tbl[1:, 1:]  # (w, w) product table of non-identity pairs
        for g in range(1, n):
            gh = tbl[g, 1:]  # (w,)
            # residual[h-1, m-1, :] of d3[g|h|m] applied to each y
            res = Yext[1:, 1:, :] - Yext[gh][:, 1:, :] \
                + Yext[g][hm] - Yext[g, 1:, None, :]
            res %= p
            if res.any():
                hs, ms = np.nonzero(res.any(axis=2))
                for hh, mm in zip(hs.tolist(), ms.tolist()):
                    bad.append((g, hh + 1, mm + 1))
                    if len(bad) >= violation_batch:
                        break
            if len(bad) >= violation_batch:
                break
        if not bad:
            return ech.rank
        for (g, h, m) in bad:
            insert_terms(_d3_terms(table, n, g, h, m, p))
    raise AssertionError("d3 rank certification did not converge")


def h2_dim_mod_p(P: ClassTwoPresentation, cap: int = DEFAULT_CAP) -> BarHomologyReport:
    """Bar-resolution homology report for the presentation group."""
    if cap > HARD_CAP:
        raise ValidationError(f"cap {cap} exceeds the hard maximum {HARD_CAP}")
    n = element_count(P)
    if n > cap:
        raise CapExceededError(
            f"group order {n} exceeds cap {cap} (hard maximum {HARD_CAP})")
    table = mult_table(P)
    p = P.p
    w = n - 1
    rank2 = _rank_d2(table, p)
    if p == 2 and n <= 64:
        rank3 = _rank_d3_transpose2(table)
    else:
        early = 100_000 if w ** 3 > 4_000_000 else None
        rank3 = _rank_d3(table, p, early)
    return BarHomologyReport(
        group_order=n, dim_B2=w * w, dim_B3=w ** 3,
        rank_d2=rank2, rank_d3=rank3)


def abelianization_rank(P: ClassTwoPresentation) -> int:
    """Number of cyclic factors of G/G' (each contributes one Tor term)."""
    crank = 0
    if P.comms:
        from . import fplin
        crank = fplin.rank_of_rows(P.comms, P.k, P.p)
    return P.d + (P.k - crank)


def cross_check(P: ClassTwoPresentation, cap: int = DEFAULT_CAP) -> bool:
    """Universal-coefficients bridge between the engine and the oracle:

        dim H_2(G; F_p) = rank_p M(G) + rank_p (G/G')
                        = (s + t)     + d          (special case G' = W).
    """
    rep = h2_dim_mod_p(P, cap=cap)
    inv = multiplier.multiplier_invariants(P)
    return rep.h2_dim == inv.s + inv.t + abelianization_rank(P)


# ---------------------------------------------------------------------------
# dense reference path (for cross-validation on small groups)


def dense_boundaries(P: ClassTwoPresentation, cap: int = 64):
    """Dense d2 (B2 x B1) and d3 (B3 x B2) matrices mod p; small groups only."""
    n = element_count(P)
    if n > cap:
        raise CapExceededError(f"group order {n} exceeds dense cap {cap}")
    table = mult_table(P)
    p = P.p
    w = n - 1
    d2 = np.zeros((w * w, w), dtype=np.int16)
    for g in range(1, n):
        for h in range(1, n):
            r = (g - 1) * w + (h - 1)
            d2[r, h - 1] += 1
            d2[r, g - 1] += 1
            gh = table[g, h]
            if gh:
                d2[r, gh - 1] -= 1
    d3 = np.zeros((w ** 3, w * w), dtype=np.int16)
    for g in range(1, n):
        for h in range(1, n):
            for m in range(1, n):
                r = ((g - 1) * w + (h - 1)) * w + (m - 1)
                for c, v in _d3_terms(table, n, g, h, m, p).items():
                    d3[r, c] = v
    return d2 % p, d3 % p


def rank_dense(M: np.ndarray, p: int) -> int:
    """Gaussian elimination rank of a dense integer matrix mod p."""
    A = (np.array(M, dtype=np.int64) % p).copy()
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if A[i, c]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]), p - 2, p)
        if inv != 1:
            A[r] = (A[r] * inv) % p
        mask = A[:, c] != 0
        mask[r] = False
        if mask.any():
            A[mask] = (A[mask] - np.outer(A[mask, c], A[r])) % p
        r += 1
        if r == rows:
            break
    return r
