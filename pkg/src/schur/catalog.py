"""Named groups and a recognizer for small quotient isomorphism types.

The recognizer only handles presentations with k <= 1 (what central
quotients of rank-2 groups produce) and answers within the explicit
target lists of the imported classification theorems; anything outside
those lists comes back as Other rather than a guess.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from . import fplin, presentation as pres
from .errors import UnsupportedShapeError, ValidationError
from .presentation import ClassTwoPresentation, make_presentation


@dataclass(frozen=True)
class IsoType:
    """Recognized isomorphism class of a k <= 1 presentation.

    kinds and params:
      elem_abelian (n,)          Z_p^(n)
      zp2_elem     (a,)          Z_{p^2} x Z_p^(a)
      es_odd       (e, m, a)     ES_{p^e}(p^(2m+1)) x Z_p^(a), e in {1, 2}, odd p
      es2          (arf, m, a)   extraspecial 2-group of order 2^(2m+1) with the
                                 given Arf invariant, times Z_2^(a)
      other        ()            outside the recognized lists
    """

    kind: str
    params: tuple[int, ...] = ()
    note: str = ""

    def describe(self, p: int | None = None) -> str:
        q = "p" if p is None else str(p)
        if self.kind == "elem_abelian":
            return f"Z_{q}^({self.params[0]})"
        if self.kind == "zp2_elem":
            return f"Z_{q}^2 x Z_{q}^({self.params[0]})"
        if self.kind == "es_odd":
            e, m, a = self.params
            return f"ES_{q}^{e}({q}^{2 * m + 1}) x Z_{q}^({a})"
        if self.kind == "es2":
            arf, m, a = self.params
            base = {(0, 1): "D8", (1, 1): "Q8"}.get((arf, m), f"ES(2^{2 * m + 1}, arf={arf})")
            return f"{base} x Z_2^({a})"
        return f"Other({self.note})"


def elementary_abelian_type(n: int) -> IsoType:
    return IsoType("elem_abelian", (n,))


def zp2_times_elem(a: int) -> IsoType:
    return IsoType("zp2_elem", (a,))


def es_odd_type(exponent: int, m: int, a: int) -> IsoType:
    if exponent not in (1, 2) or m < 1 or a < 0:
        raise ValidationError(f"bad es_odd parameters ({exponent}, {m}, {a})")
    return IsoType("es_odd", (exponent, m, a))


def es2_type(arf: int, m: int, a: int) -> IsoType:
    if arf not in (0, 1) or m < 1 or a < 0:
        raise ValidationError(f"bad es2 parameters ({arf}, {m}, {a})")
    return IsoType("es2", (arf, m, a))


def other_type(note: str) -> IsoType:
    return IsoType("other", (), note)


# ---------------------------------------------------------------------------
# constructors


def nonresidue(p: int) -> int:
    """Smallest g >= 2 that is not a square mod p (p odd)."""
    fplin.check_prime(p)
    if p == 2:
        raise ValidationError("no quadratic nonresidue mod 2")
    squares = {(x * x) % p for x in range(p)}
    for g in range(2, p):
        if g not in squares:
            return g
    raise AssertionError("unreachable: every odd p has a nonresidue")


def _odd(p, name):
    fplin.check_prime(p)
    if p == 2:
        raise ValidationError(f"{name} requires an odd prime")
    return p


def q8() -> ClassTwoPresentation:
    return make_presentation(2, 2, 1, {(0, 1): (1,)}, [(1,), (1,)])


def d8() -> ClassTwoPresentation:
    # <r, s | r^2 = z, s^2 = 1, [r, s] = z>
    return make_presentation(2, 2, 1, {(0, 1): (1,)}, [(1,), (0,)])


def es_odd(p: int, m: int, exponent: int) -> ClassTwoPresentation:
    """ES_{p^exponent}(p^(2m+1)) for odd p: m hyperbolic commutator pairs,
    one generator of order p^2 in the exponent-p^2 case."""
    _odd(p, "es_odd")
    if m < 1 or exponent not in (1, 2):
        raise ValidationError("need m >= 1 and exponent in {1, 2}")
    comm = {(2 * i, 2 * i + 1): (1,) for i in range(m)}
    powers = [(0,)] * (2 * m)
    if exponent == 2:
        powers[0] = (1,)
    return make_presentation(p, 2 * m, 1, comm, powers)


def es2(m: int, arf: int) -> ClassTwoPresentation:
    """Extraspecial 2-group of order 2^(2m+1): D8-central-products for arf 0,
    one Q8 factor for arf 1."""
    if m < 1 or arf not in (0, 1):
        raise ValidationError("need m >= 1 and arf in {0, 1}")
    comm = {(2 * i, 2 * i + 1): (1,) for i in range(m)}
    powers = [(0,)] * (2 * m)
    if arf:
        powers[0] = powers[1] = (1,)
    return make_presentation(2, 2 * m, 1, comm, powers)


def elem_abelian(p: int, n: int) -> ClassTwoPresentation:
    return make_presentation(p, n, 0, {}, [()] * n)


def phi4_1_5(p: int) -> ClassTwoPresentation:
    """Order p^5: generators a, a1, a2 with [a1, a] = b1, [a2, a] = b2, exponent p."""
    _odd(p, "phi4_1_5")
    return make_presentation(p, 3, 2, {(0, 1): (p - 1, 0), (0, 2): (0, p - 1)})


def phi12_1_6(p: int) -> ClassTwoPresentation:
    """ES_p(p^3) x ES_p(p^3)."""
    _odd(p, "phi12_1_6")
    return pres.direct_product(es_odd(p, 1, 1), es_odd(p, 1, 1))


def phi13_1_6(p: int) -> ClassTwoPresentation:
    """Order p^6: the exponent-p special group whose form pencil has a double
    degenerate member ([a1,a2] = b1, [a2,a3] = b2, [a1,a4] = b2)."""
    _odd(p, "phi13_1_6")
    return make_presentation(
        p, 4, 2, {(0, 1): (1, 0), (1, 2): (0, 1), (0, 3): (0, 1)})


def phi15_1_6(p: int) -> ClassTwoPresentation:
    """Order p^6: the exponent-p special group whose form pencil has no
    degenerate member over F_p ([a1,a2] = [a3,a4] = b1, [a1,a3] = b2,
    [a2,a4] = b2^g with g a nonresidue; the pencil Pfaffian is x^2 - g y^2)."""
    _odd(p, "phi15_1_6")
    g = nonresidue(p)
    return make_presentation(
        p, 4, 2,
        {(0, 1): (1, 0), (2, 3): (1, 0), (0, 2): (0, 1), (1, 3): (0, g)})


def t_group(p: int) -> ClassTwoPresentation:
    """Order p^7, d = 5: [x2,x1] = [x5,x3] = c1, [x3,x1] = [x5,x4] = c2."""
    _odd(p, "t_group")
    return make_presentation(
        p, 5, 2,
        {(0, 1): (p - 1, 0), (2, 4): (p - 1, 0),
         (0, 2): (0, p - 1), (3, 4): (0, p - 1)})


_NAMED = {
    "q8": (q8, 0),
    "d8": (d8, 0),
    "es_odd": (es_odd, 3),
    "es2": (es2, 2),
    "elem_abelian": (elem_abelian, 2),
    "phi4_1_5": (phi4_1_5, 1),
    "phi12_1_6": (phi12_1_6, 1),
    "phi13_1_6": (phi13_1_6, 1),
    "phi15_1_6": (phi15_1_6, 1),
    "t_group": (t_group, 1),
}


def catalog_names() -> tuple[str, ...]:
    return tuple(sorted(_NAMED))


def make_named(name: str, *args: int) -> ClassTwoPresentation:
    if name not in _NAMED:
        raise ValidationError(f"unknown catalog name {name!r}; "
                              f"known: {', '.join(catalog_names())}")
    fn, nargs = _NAMED[name]
    if len(args) != nargs:
        raise ValidationError(f"catalog:{name} takes {nargs} parameter(s), got {len(args)}")
    return fn(*args)


# ---------------------------------------------------------------------------
# recognition


def arf_by_counting(q, m: int) -> int:
    """Arf invariant of a nondegenerate quadratic form q on F_2^(2m) by
    majority vote: arf = 0 iff q has more than 2^(2m-1) zeros."""
    zeros = sum(1 for v in itertools.product((0, 1), repeat=2 * m) if not any(q(v)))
    return 0 if zeros > 1 << (2 * m - 1) else 1


@lru_cache(maxsize=8192)
def _rows_rank(p: int, width: int, rows: tuple) -> int:
    return fplin.rank_of_rows(rows, width, p) if rows else 0


def recognize(P: ClassTwoPresentation) -> IsoType:
    """Map a k <= 1 presentation onto the classification target lists."""
    if P.k >= 2:
        raise UnsupportedShapeError(f"recognition supports k <= 1, got k = {P.k}")
    p, d = P.p, P.d
    if P.k == 0:
        return elementary_abelian_type(d)

    crank = _rows_rank(p, 1, P.comms)
    if crank == 0:
        # abelian: C = 0 makes f linear for every p
        frank = _rows_rank(p, 1, P.powers)
        if frank == 0:
            return elementary_abelian_type(d + 1)
        return zp2_times_elem(d - 1)

    rad = pres.common_radical(P)
    twom = d - rad.dim
    m = twom // 2
    comp = rad.complement_coords()

    def f_on(coords: tuple[int, ...]):
        def q(x):
            v = [0] * d
            for c, xi in zip(coords, x):
                v[c] = xi
            return pres.eval_f(P, v)
        return q

    # f is linear on the radical (its polar form C dies there), so checking
    # the radical basis suffices for every p
    if any(any(pres.eval_f(P, v)) for v in rad.rows):
        return other_type("power map nonzero on the radical")

    if p == 2:
        arf = arf_by_counting(f_on(comp), m)
        return es2_type(arf, m, d - twom)

    if all(not any(f) for f in P.powers):
        return es_odd_type(1, m, d - twom)
    return es_odd_type(2, m, d - twom)


def span_vectors(S: fplin.SubspaceFp):
    """All vectors of a (small) subspace, for brute-force checks."""
    p = S.p
    for coeffs in itertools.product(range(p), repeat=S.dim):
        v = [0] * S.ambient
        for c, row in zip(coeffs, S.rows):
            if c:
                for j, x in enumerate(row):
                    if x:
                        v[j] = (v[j] + c * x) % p
        yield tuple(v)
