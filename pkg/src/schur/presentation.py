"""Class-2 p-groups with central elementary abelian quotient, by structure constants.

A presentation is a group on generators g_1..g_d and central generators
z_1..z_k of order p, with

    [g_i, g_j] = z^{c_ij}   (1 <= i < j <= d),
    g_i^p      = z^{f_i},

written multiplicatively with the convention [x, y] = x^-1 y^-1 x y.
Every element has the normal form g_1^{a_1} ... g_d^{a_d} z^w, so the
group has order exactly p^(d+k); the collection rule below realizes the
product of two normal forms.

The commutator data induces an alternating bilinear map C on V = F_p^d
with values in W = F_p^k, and the p-th power map induces f : V -> W,
linear for odd p and quadratic with polar form C when p = 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

from . import fplin
from .errors import DimensionMismatchError, ValidationError
from .fplin import SubspaceFp, Vec

MAX_LOG_ORDER = 24  # desk-scale guardrail: reject d + k beyond this


@lru_cache(maxsize=None)
def pair_list(d: int) -> tuple[tuple[int, int], ...]:
    """Ordered pairs (i, j), i < j, in lexicographic order (0-based)."""
    return tuple((i, j) for i in range(d) for j in range(i + 1, d))


@lru_cache(maxsize=None)
def pair_index_map(d: int) -> dict:
    return {pr: n for n, pr in enumerate(pair_list(d))}


@dataclass(frozen=True)
class ClassTwoPresentation:
    """Structure constants of a class-2 group of order p^(d+k).

    comms[n] is c_ij for the n-th pair of pair_list(d); powers[i] is f_i.
    Immutable and hashable, so presentations can be deduplicated directly.
    """

    p: int
    d: int
    k: int
    comms: tuple[Vec, ...]
    powers: tuple[Vec, ...]

    def __post_init__(self):
        p, d, k = self.p, self.d, self.k
        fplin.check_prime(p)
        if d < 0 or k < 0:
            raise ValidationError("d and k must be nonnegative")
        if d + k > MAX_LOG_ORDER:
            raise ValidationError(
                f"group order p^{d + k} exceeds the desk-scale "
                f"guardrail p^{MAX_LOG_ORDER}")
        npairs = d * (d - 1) // 2
        if len(self.comms) != npairs:
            raise ValidationError(
                f"expected {npairs} commutator vectors, got {len(self.comms)}")
        if len(self.powers) != d:
            raise ValidationError(
                f"expected {d} power vectors, got {len(self.powers)}")
        for v in self.comms + self.powers:
            if len(v) != k:
                raise ValidationError("structure constant of wrong length")
            for x in v:
                if type(x) is not int or x < 0 or x >= p:
                    raise ValidationError(
                        "structure constants must be ints in [0, p)")

    @property
    def order(self) -> int:
        return self.p ** (self.d + self.k)

    def comm_vec(self, i: int, j: int) -> Vec:
        """C(e_i, e_j) for any i != j (0-based), with sign."""
        if i < j:
            return self.comms[pair_index_map(self.d)[(i, j)]]
        v = self.comms[pair_index_map(self.d)[(j, i)]]
        p = self.p
        return tuple((-x) % p for x in v)


def make_presentation(p, d, k, commutators=None, powers=None) -> ClassTwoPresentation:
    """Build from a {(i, j): vector} dict (0-based, i < j; omitted pairs zero)."""
    commutators = commutators or {}
    zero = (0,) * k
    comms = []
    for (i, j) in pair_list(d):
        v = commutators.get((i, j), zero)
        comms.append(fplin.vec_mod(v, p))
    for (i, j) in commutators:
        if not 0 <= i < j < d:
            raise ValidationError(f"bad commutator pair ({i}, {j})")
    if powers is None:
        powers = [zero] * d
    return ClassTwoPresentation(
        p=p, d=d, k=k,
        comms=tuple(comms),
        powers=tuple(fplin.vec_mod(f, p) for f in powers),
    )


# ---------------------------------------------------------------------------
# the bilinear map C and the power map f


def commutator(P: ClassTwoPresentation, u, v) -> Vec:
    """C(u, v) = sum_{i<j} (u_i v_j - u_j v_i) c_ij."""
    if len(u) != P.d or len(v) != P.d:
        raise DimensionMismatchError("argument length != d")
    p, k = P.p, P.k
    out = [0] * k
    for n, (i, j) in enumerate(pair_list(P.d)):
        c = (u[i] * v[j] - u[j] * v[i]) % p
        if c:
            cij = P.comms[n]
            for l in range(k):
                if cij[l]:
                    out[l] = (out[l] + c * cij[l]) % p
    return tuple(out)


def eval_f(P: ClassTwoPresentation, v) -> Vec:
    """Image of v under the p-th power map.

    Odd p: linear, f(v) = sum v_i f_i.  p = 2: quadratic with polar form C,
    f(v) = sum v_i f_i + sum_{i<j} v_i v_j c_ij.
    """
    if len(v) != P.d:
        raise DimensionMismatchError("argument length != d")
    p, k = P.p, P.k
    if p == 2:
        out = [0] * k
        nz = [i for i in range(P.d) if v[i] & 1]
        powers = P.powers
        for i in nz:
            fi = powers[i]
            for l in range(k):
                out[l] ^= fi[l]
        idx = pair_index_map(P.d)
        comms = P.comms
        for a in range(len(nz)):
            for b in range(a + 1, len(nz)):
                cij = comms[idx[(nz[a], nz[b])]]
                for l in range(k):
                    out[l] ^= cij[l]
        return tuple(out)
    out = [0] * k
    for i in range(P.d):
        if v[i]:
            fi = P.powers[i]
            for l in range(k):
                if fi[l]:
                    out[l] = (out[l] + v[i] * fi[l]) % p
    return tuple(out)


def power_image(P: ClassTwoPresentation) -> SubspaceFp:
    """The subspace f(V) generates, i.e. the image of the p-th power map.

    For odd p this is the row space of the f_i.  For p = 2 polarization gives
    span{f(v)} = span({f_i} union {c_ij}) without enumerating 2^d vectors
    (the identity f(u+v) = f(u) + f(v) + C(u,v) runs both ways).
    """
    rows = list(P.powers)
    if P.p == 2:
        rows += list(P.comms)
    return fplin.subspace(rows, P.k, P.p)


# ---------------------------------------------------------------------------
# element arithmetic in normal form

GroupElement = tuple[Vec, Vec]  # (generator exponents a, central part w)


def identity_element(P: ClassTwoPresentation) -> GroupElement:
    return ((0,) * P.d, (0,) * P.k)


def elem_mul(P: ClassTwoPresentation, x: GroupElement, y: GroupElement) -> GroupElement:
    """Collection: move y's generator letters left past x's tail.

    Central correction: sum_{i>j} a_i b_j C(e_i, e_j) plus carry_i f_i for
    each exponent that wraps past p.
    """
    (a, z), (b, w) = x, y
    p, d, k = P.p, P.d, P.k
    if len(a) != d or len(b) != d or len(z) != k or len(w) != k:
        raise DimensionMismatchError("element shape does not match presentation")
    cz = [(u + v) % p for u, v in zip(z, w)]
    for n, (i, j) in enumerate(pair_list(d)):
        # generator j > i passing left over i picks up C(e_j, e_i) = -c_ij
        c = (a[j] * b[i]) % p
        if c:
            cij = P.comms[n]
            for l in range(k):
                if cij[l]:
                    cz[l] = (cz[l] - c * cij[l]) % p
    ab = []
    for i in range(d):
        s = a[i] + b[i]
        if s >= p:
            s -= p
            fi = P.powers[i]
            for l in range(k):
                if fi[l]:
                    cz[l] = (cz[l] + fi[l]) % p
        ab.append(s)
    return (tuple(ab), tuple(cz))


def elem_pow(P: ClassTwoPresentation, x: GroupElement, n: int) -> GroupElement:
    if n < 0:
        raise ValidationError("negative powers not supported; use elem_inv")
    acc = identity_element(P)
    for _ in range(n):
        acc = elem_mul(P, acc, x)
    return acc


def elem_inv(P: ClassTwoPresentation, x: GroupElement) -> GroupElement:
    # exponent divides p^2 in this class, so x^(p^2 - 1) inverts x
    return elem_pow(P, x, P.p * P.p - 1)


# ---------------------------------------------------------------------------
# validation / diagnostics


@dataclass(frozen=True)
class PresentationDiagnostics:
    commutator_rank: int
    common_radical_dim: int
    r: int  # dim of the image of the p-th power map
    is_special_rank2: bool

    @property
    def is_special(self) -> bool:
        """G' = Z(G) = W of any rank (commutators span W, radical trivial)."""
        return self.common_radical_dim == 0 and self.commutator_rank >= 0


@lru_cache(maxsize=8192)
def _radical_for(p: int, d: int, k: int, comms: tuple) -> SubspaceFp:
    rows = []
    for l in range(k):
        B = [[0] * d for _ in range(d)]
        for n, (i, j) in enumerate(pair_list(d)):
            x = comms[n][l]
            if x:
                B[i][j] = x
                B[j][i] = (-x) % p
        rows.extend(tuple(row) for row in B)
    return fplin.kernel(rows, d, p)


def common_radical(P: ClassTwoPresentation) -> SubspaceFp:
    """{v in V : C(v, u) = 0 for all u}, the kernel of all k forms at once."""
    return _radical_for(P.p, P.d, P.k, P.comms)


@lru_cache(maxsize=1024)
def validate(P: ClassTwoPresentation) -> PresentationDiagnostics:
    crank = fplin.rank_of_rows(P.comms, P.k, P.p) if P.comms else 0
    crad = common_radical(P).dim
    r = power_image(P).dim
    if P.p == 2:
        # polarization forces every c_ij into the span of the power image
        img = power_image(P)
        for c in P.comms:
            assert img.contains(c), "p=2 polarization violated"
    return PresentationDiagnostics(
        commutator_rank=crank,
        common_radical_dim=crad,
        r=r,
        is_special_rank2=(P.k == 2 and crank == 2 and crad == 0),
    )


# ---------------------------------------------------------------------------
# quotients, products, change of basis


@lru_cache(maxsize=8192)
def _projected_comms(p: int, comms: tuple, zrows: tuple, zpivots: tuple,
                     keep: tuple) -> tuple:
    out = []
    for w in comms:
        red = list(w)
        for pc, row in zip(zpivots, zrows):
            c = red[pc]
            if c:
                for j, b in enumerate(row):
                    if b:
                        red[j] = (red[j] - c * b) % p
        out.append(tuple(red[c] for c in keep))
    return tuple(out)


def central_quotient(P: ClassTwoPresentation, Z: SubspaceFp) -> ClassTwoPresentation:
    """Quotient by the central subgroup spanned by Z <= W.

    W/Z is coordinatized by the non-pivot columns of Z's RREF: each vector
    is reduced against Z and then restricted to those columns.
    """
    if Z.ambient != P.k or Z.p != P.p:
        raise ValidationError(
            f"Z must be a subspace of W = F_{P.p}^{P.k}, got ambient {Z.ambient}")
    keep = Z.complement_coords()

    def proj(w: Vec) -> Vec:
        red = Z.reduce(w)
        return tuple(red[c] for c in keep)

    return ClassTwoPresentation(
        p=P.p, d=P.d, k=len(keep),
        comms=_projected_comms(P.p, P.comms, Z.rows, Z.pivots, keep),
        powers=tuple(proj(f) for f in P.powers),
    )


def direct_product(P1: ClassTwoPresentation, P2: ClassTwoPresentation) -> ClassTwoPresentation:
    if P1.p != P2.p:
        raise DimensionMismatchError("direct product needs a common modulus")
    p = P1.p
    d, k = P1.d + P2.d, P1.k + P2.k
    zero = (0,) * k
    comm = {}
    for n, (i, j) in enumerate(pair_list(P1.d)):
        v = P1.comms[n]
        if any(v):
            comm[(i, j)] = v + (0,) * P2.k
    for n, (i, j) in enumerate(pair_list(P2.d)):
        v = P2.comms[n]
        if any(v):
            comm[(i + P1.d, j + P1.d)] = (0,) * P1.k + v
    powers = [f + (0,) * P2.k for f in P1.powers] + \
             [(0,) * P1.k + f for f in P2.powers]
    return make_presentation(p, d, k, comm, powers)


def transform(P: ClassTwoPresentation, S=None, T=None) -> ClassTwoPresentation:
    """Presentation w.r.t. new generators Se_i and new central basis T.

    c'_ij = T C(Se_i, Se_j) and f'_i = T f(Se_i); for p = 2 the f
    transformation is the honest quadratic evaluation, not a linear push.
    S is d x d, T is k x k, both given as row tuples and must be invertible.
    """
    p, d, k = P.p, P.d, P.k
    if S is not None:
        if fplin.rank_of_rows(S, d, p) != d:
            raise ValidationError("S is singular")
        cols = [tuple(S[r][i] for r in range(d)) for i in range(d)]
    else:
        cols = [tuple(1 if r == i else 0 for r in range(d)) for i in range(d)]
    if T is not None and fplin.rank_of_rows(T, k, p) != k:
        raise ValidationError("T is singular")

    def push(w: Vec) -> Vec:
        if T is None:
            return w
        return tuple(sum(T[r][l] * w[l] for l in range(k)) % p for r in range(k))

    comm = {}
    for (i, j) in pair_list(d):
        v = push(commutator(P, cols[i], cols[j]))
        if any(v):
            comm[(i, j)] = v
    powers = [push(eval_f(P, cols[i])) for i in range(d)]
    return make_presentation(p, d, k, comm, powers)


# ---------------------------------------------------------------------------
# JSON presentation files (the CLI's on-disk format)

_TOP_KEYS = {"p", "d", "k", "commutators", "powers"}
_COMM_KEYS = {"i", "j", "value"}


def from_json_dict(obj) -> ClassTwoPresentation:
    """Parse the documented JSON schema; 1-based indices, unknown fields rejected."""
    if not isinstance(obj, dict):
        raise ValidationError("presentation JSON must be an object")
    unknown = set(obj) - _TOP_KEYS
    if unknown:
        raise ValidationError(f"unknown fields: {sorted(unknown)}")
    try:
        p, d, k = int(obj["p"]), int(obj["d"]), int(obj["k"])
    except KeyError as e:
        raise ValidationError(f"missing field {e.args[0]!r}") from None
    comm = {}
    for ent in obj.get("commutators", []):
        if not isinstance(ent, dict) or set(ent) - _COMM_KEYS:
            raise ValidationError(f"bad commutator entry {ent!r}")
        try:
            i, j, val = int(ent["i"]), int(ent["j"]), ent["value"]
        except KeyError as e:
            raise ValidationError(f"commutator entry missing {e.args[0]!r}") from None
        if not 1 <= i < j <= d:
            raise ValidationError(f"commutator indices must satisfy 1 <= i < j <= d, got ({i}, {j})")
        if (i - 1, j - 1) in comm:
            raise ValidationError(f"duplicate commutator pair ({i}, {j})")
        comm[(i - 1, j - 1)] = tuple(int(x) for x in val)
    powers = obj.get("powers", [(0,) * k] * d)
    if len(powers) != d:
        raise ValidationError(f"powers must list {d} vectors")
    return make_presentation(p, d, k, comm, [tuple(int(x) for x in f) for f in powers])


def to_json_dict(P: ClassTwoPresentation) -> dict:
    return {
        "p": P.p, "d": P.d, "k": P.k,
        "commutators": [
            {"i": i + 1, "j": j + 1, "value": list(P.comms[n])}
            for n, (i, j) in enumerate(pair_list(P.d)) if any(P.comms[n])
        ],
        "powers": [list(f) for f in P.powers],
    }


def load_presentation(path) -> ClassTwoPresentation:
    with open(path, "r", encoding="utf-8") as fh:
        return from_json_dict(json.load(fh))
