"""The multiplier engine for class-2 groups with elementary abelian quotient.

Everything happens in three spaces built from a presentation:

  V (x) W   tensor coordinates (i, l) -> i*k + l,
  X = X1 + X2 <= V (x) W,   X1 from Jacobi elements, X2 from p-th powers,
  Lambda^2 V   wedge coordinates following pair_list(d).

The multiplier is an abelian group of order p^(dim ker rho + dim N) with
N = (V (x) W)/X; its p-th power subgroup is the image of ker rho under the
lifted map sigma, which pins the invariant factors (Z_{p^2})^s x (Z_p)^t.
Epicenters and the Ganea order bookkeeping ride on the same subspaces.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from . import fplin, presentation as pres
from .errors import NotSpecialError, ValidationError
from .fplin import SubspaceFp, Vec
from .presentation import ClassTwoPresentation, pair_list


def tensor_vec(P: ClassTwoPresentation, v, w) -> Vec:
    """v (x) w in the fixed (i, l) -> i*k + l coordinates."""
    p, d, k = P.p, P.d, P.k
    out = [0] * (d * k)
    for i in range(d):
        if v[i]:
            base = i * k
            for l in range(k):
                if w[l]:
                    out[base + l] = (v[i] * w[l]) % p
    return tuple(out)


def _basis_tensor(P, i: int, w) -> Vec:
    out = [0] * (P.d * P.k)
    base = i * P.k
    for l in range(P.k):
        out[base + l] = w[l] % P.p
    return tuple(out)


@lru_cache(maxsize=8192)
def _x1_rows_for(p: int, d: int, k: int, comms: tuple) -> tuple[Vec, ...]:
    # keyed by the commutator family: shared across all power-vector choices
    idx = pres.pair_index_map(d)

    def cvec(a, b):
        if a < b:
            return comms[idx[(a, b)]]
        return tuple((-x) % p for x in comms[idx[(b, a)]])

    rows = []
    for i, j, m in itertools.combinations(range(d), 3):
        out = [0] * (d * k)
        for a, b, c in ((i, j, m), (j, m, i), (m, i, j)):
            w = cvec(b, c)
            base = a * k
            for l in range(k):
                if w[l]:
                    out[base + l] = (out[base + l] + w[l]) % p
        if any(out):
            rows.append(tuple(out))
    return tuple(rows)


def x1_rows(P: ClassTwoPresentation) -> tuple[Vec, ...]:
    """Jacobi generators e_i (x) C(e_j,e_m) + e_j (x) C(e_m,e_i) + e_m (x) C(e_i,e_j)."""
    return _x1_rows_for(P.p, P.d, P.k, P.comms)


@lru_cache(maxsize=32)
def x2_rows(P: ClassTwoPresentation) -> tuple[Vec, ...]:
    """Spanning set of X2 = <v (x) f(v)>.

    Odd p (f linear): diagonal vectors e_i (x) f(e_i) plus the polarized
    cross terms e_i (x) f(e_j) + e_j (x) f(e_i).  p = 2 (f quadratic):
    the full enumeration over all 2^d vectors; no smaller spanning set is
    available, and basis-only spanning is wrong even for odd p.
    """
    p, d, k = P.p, P.d, P.k
    rows = []
    if p == 2:
        for v in itertools.product((0, 1), repeat=d):
            fv = pres.eval_f(P, v)
            if any(fv) and any(v):
                rows.append(tensor_vec(P, v, fv))
        return tuple(rows)
    fvals = P.powers  # f is linear for odd p, so f(e_i) = f_i
    for i in range(d):
        if any(fvals[i]):
            rows.append(_basis_tensor(P, i, fvals[i]))
    for i, j in pair_list(d):
        if any(fvals[j]) or any(fvals[i]):
            a = list(_basis_tensor(P, i, fvals[j]))
            bj = _basis_tensor(P, j, fvals[i])
            row = tuple((x + y) % p for x, y in zip(a, bj))
            if any(row):
                rows.append(row)
    return tuple(rows)


def x1_subspace(P: ClassTwoPresentation) -> SubspaceFp:
    return fplin.subspace(x1_rows(P), P.d * P.k, P.p)


def x2_subspace(P: ClassTwoPresentation) -> SubspaceFp:
    return fplin.subspace(x2_rows(P), P.d * P.k, P.p)


@lru_cache(maxsize=32)
def x_subspace(P: ClassTwoPresentation) -> SubspaceFp:
    return fplin.subspace(x1_rows(P) + x2_rows(P), P.d * P.k, P.p)


@lru_cache(maxsize=8192)
def _rho_kernel_for(p: int, k: int, comms: tuple) -> SubspaceFp:
    npairs = len(comms)
    cols = [tuple(comms[n][l] for n in range(npairs)) for l in range(k)]
    return fplin.kernel(cols, npairs, p)


def rho_kernel(P: ClassTwoPresentation) -> SubspaceFp:
    """Kernel of rho : Lambda^2 V -> W, e_i ^ e_j -> c_ij (pair_list coords)."""
    return _rho_kernel_for(P.p, P.k, P.comms)


def sigma_lift(P: ClassTwoPresentation, u, v) -> Vec:
    """sigma-tilde(u, v) = u (x) f(v) + binom(p, 2) * v (x) C(u, v).

    The binomial term vanishes mod p for odd p and survives exactly for
    p = 2; well-definedness modulo X is asserted by the property suite.
    """
    p = P.p
    row = list(tensor_vec(P, u, pres.eval_f(P, v)))
    binom = (p * (p - 1) // 2) % p
    if binom:
        cv = pres.commutator(P, u, v)
        extra = tensor_vec(P, v, cv)
        row = [(a + binom * b) % p for a, b in zip(row, extra)]
    return tuple(row)


@dataclass(frozen=True)
class MultiplierInvariants:
    """Abelian invariants M(G) = (Z_{p^2})^s x (Z_p)^t plus the intermediate dims."""

    dim_X1: int
    dim_X2: int
    dim_X: int
    dim_kerRho: int
    dim_N: int
    s: int
    t: int

    @property
    def order_exponent(self) -> int:
        return 2 * self.s + self.t

    @property
    def elementary_abelian(self) -> bool:
        return self.s == 0

    def as_dict(self) -> dict:
        return {
            "dim_X1": self.dim_X1, "dim_X2": self.dim_X2, "dim_X": self.dim_X,
            "dim_kerRho": self.dim_kerRho, "dim_N": self.dim_N,
            "s": self.s, "t": self.t,
            "order_exponent": self.order_exponent,
            "elementary_abelian": self.elementary_abelian,
        }


def order_exponent_only(P: ClassTwoPresentation) -> int:
    """log_p |M(G)| = dim ker rho + dim N, skipping the invariant-factor split.

    Cheaper than multiplier_invariants when s is not needed (Ganea order
    bookkeeping, capability sweeps keyed on orders alone).
    """
    X = x_subspace(P)
    return rho_kernel(P).dim + P.d * P.k - X.dim


@lru_cache(maxsize=32)
def multiplier_invariants(P: ClassTwoPresentation) -> MultiplierInvariants:
    p, d, k = P.p, P.d, P.k
    dk = d * k
    r1 = x1_rows(P)
    r2 = x2_rows(P)
    dim_x1 = fplin.rank_of_rows(r1, dk, p) if r1 else 0
    dim_x2 = fplin.rank_of_rows(r2, dk, p) if r2 else 0
    X = x_subspace(P)
    dim_x = X.dim
    ker = rho_kernel(P)
    dim_n = dk - dim_x

    # s = dim of sigma(ker rho) inside (V (x) W)/X; evaluate the lift on a
    # basis of ker rho and count the rank gained over X
    has_f = any(any(f) for f in P.powers) or p == 2
    s = 0
    if has_f and ker.dim:
        E = [tuple(1 if t == i else 0 for t in range(d)) for i in range(d)]
        simg = []
        for coeffs in ker.rows:
            acc = [0] * dk
            for n, (i, j) in enumerate(pair_list(d)):
                c = coeffs[n]
                if c:
                    sv = sigma_lift(P, E[i], E[j])
                    for t, x in enumerate(sv):
                        if x:
                            acc[t] = (acc[t] + c * x) % p
            if any(acc):
                simg.append(tuple(acc))
        if simg:
            s = fplin.rank_of_rows(X.rows + tuple(simg), dk, p) - dim_x
    t = ker.dim + dim_n - 2 * s
    return MultiplierInvariants(
        dim_X1=dim_x1, dim_X2=dim_x2, dim_X=dim_x,
        dim_kerRho=ker.dim, dim_N=dim_n, s=s, t=t)


def _require_special(P: ClassTwoPresentation, rank2: bool = False):
    diag = pres.validate(P)
    if rank2:
        if not diag.is_special_rank2:
            raise NotSpecialError(
                "operation needs a special group of rank 2 "
                f"(got commutator_rank={diag.commutator_rank}, "
                f"common_radical_dim={diag.common_radical_dim}, k={P.k})")
    elif diag.common_radical_dim != 0 or diag.commutator_rank != P.k:
        raise NotSpecialError(
            "operation needs a special group (G' = Z(G) = W); "
            f"commutator_rank={diag.commutator_rank}, "
            f"common_radical_dim={diag.common_radical_dim}, k={P.k}")
    return diag


def eq1_order(P: ClassTwoPresentation) -> int:
    """Order exponent of M(G) by the Ganea identity at Z = Z(G):
    (1/2)d(d-1) - 2 + 2d - dim X.  Requires a special group of rank 2."""
    _require_special(P, rank2=True)
    d = P.d
    return d * (d - 1) // 2 - 2 + 2 * d - x_subspace(P).dim


@dataclass(frozen=True)
class EpicenterReport:
    epicenter: SubspaceFp
    capable: bool

    def as_dict(self) -> dict:
        return {
            "dim": self.epicenter.dim,
            "basis": [list(r) for r in self.epicenter.rows],
            "capable": self.capable,
        }


def epicenter(P: ClassTwoPresentation) -> EpicenterReport:
    """Epicenter of a special group: {w in W : e_i (x) w in X for all i}.

    Capable means the epicenter is trivial.  The set of admissible w is a
    subspace of W: for small k it is assembled from the lines it contains,
    otherwise from the kernel of the residual system (reduction against X
    is linear in w).
    """
    _require_special(P)
    p, d, k = P.p, P.d, P.k
    X = x_subspace(P)
    if k <= 2:
        good = [w for w in _line_reps(p, k)
                if all(X.contains(_basis_tensor(P, i, w)) for i in range(d))]
        epi = fplin.subspace(good, k, p)
    else:
        rows = []
        for i in range(d):
            residuals = [X.reduce(_basis_tensor(P, i, tuple(1 if t == l else 0 for t in range(k))))
                         for l in range(k)]
            for c in range(d * k):
                row = tuple(residuals[l][c] for l in range(k))
                if any(row):
                    rows.append(row)
        epi = fplin.kernel(rows, k, p)
    return EpicenterReport(epicenter=epi, capable=epi.dim == 0)


@lru_cache(maxsize=64)
def _line_reps(p: int, k: int) -> tuple[Vec, ...]:
    """One representative per 1-dimensional subspace of F_p^k."""
    if k == 0:
        return ()
    reps = []
    for v in itertools.product(range(p), repeat=k):
        first = next((x for x in v if x), 0)
        if first == 1:
            reps.append(v)
    return tuple(reps)


@dataclass(frozen=True)
class GaneaRecord:
    """Both sides of the order identity |M(G)| / |Im lambda_Z| = |M(G/Z)| / |G' cap Z|
    as p-exponents, for a central Z <= W of a special group."""

    dim_Z: int
    im_lambda_dim: int
    lhs_exponent: int
    rhs_exponent: int

    @property
    def holds(self) -> bool:
        return self.lhs_exponent == self.rhs_exponent

    def as_dict(self) -> dict:
        return {
            "dim_Z": self.dim_Z, "im_lambda_dim": self.im_lambda_dim,
            "lhs_exponent": self.lhs_exponent, "rhs_exponent": self.rhs_exponent,
            "holds": self.holds,
        }


def ganea_check(P: ClassTwoPresentation, Z: SubspaceFp,
                inv: MultiplierInvariants | None = None) -> GaneaRecord:
    """Evaluate both sides of the Ganea order identity for Z <= W.

    ker lambda_Z = X cap (V (x) Z), so the image has dimension
    d*dim Z - dim(X cap V (x) Z); the right side quotients by Z (Z <= G'
    for special groups, so |G' cap Z| = |Z|).
    """
    if Z.ambient != P.k or Z.p != P.p:
        raise ValidationError(f"Z must be a subspace of W = F_{P.p}^{P.k}")
    _require_special(P)
    d, k = P.d, P.k
    X = x_subspace(P)
    dim_x = X.dim
    e_g = inv.order_exponent if inv is not None else order_exponent_only(P)
    vz_rows = tuple(_basis_tensor(P, i, w) for i in range(d) for w in Z.rows)
    if vz_rows:
        dim_sum = fplin.rank_of_rows(X.rows + vz_rows, d * k, P.p)
        dim_cap = dim_x + d * Z.dim - dim_sum
    else:
        dim_cap = 0
    im_dim = d * Z.dim - dim_cap
    lhs = e_g - im_dim
    q = pres.central_quotient(P, Z)
    rhs = order_exponent_only(q) - Z.dim
    return GaneaRecord(dim_Z=Z.dim, im_lambda_dim=im_dim,
                       lhs_exponent=lhs, rhs_exponent=rhs)


def central_lines(P: ClassTwoPresentation) -> tuple[SubspaceFp, ...]:
    """The p + 1 one-dimensional subspaces of W when k = 2 (order-p central
    subgroups of a special rank-2 group), in a fixed deterministic order."""
    if P.k != 2:
        raise ValidationError("central_lines expects k = 2")
    return _central_lines_for(P.p)


@lru_cache(maxsize=32)
def _central_lines_for(p: int) -> tuple[SubspaceFp, ...]:
    lines = [fplin.subspace([(0, 1)], 2, p)]
    for t in range(p):
        lines.append(fplin.subspace([(1, t)], 2, p))
    return tuple(lines)
