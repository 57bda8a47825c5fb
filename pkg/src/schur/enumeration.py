"""Enumeration of special rank-2 presentations and mechanical theorem checks.

A candidate at (p, d) is a pair of structure-constant families: commutator
vectors c_ij in F_p^2 whose span is all of W with trivial common radical
(exactly the special rank-2 condition), plus power vectors f_i filtered by
the dimension r of the power-map image:

    gp_mode "full"    r = 2   (G^p = G'),
    gp_mode "cyclic"  r = 1   (G^p cyclic of order p),
    gp_mode "trivial" r = 0   (G^p = 1),
    gp_mode "all"     no filter.

Exhaustive streams iterate candidates lexicographically; sampled streams
draw them from a counter-based generator keyed by (p, d, seed, index), so
reports are reproducible without storing anything.  Deduplication walks
orbits of the GL(V) x GL(W) change-of-basis action by BFS and keeps the
lexicographically least encoding per orbit.
"""

from __future__ import annotations

import hashlib
import itertools
import os
from dataclasses import dataclass, field

from . import catalog, fplin, multiplier, presentation as pres
from .catalog import IsoType
from .errors import BudgetExceededError, ValidationError
from .multiplier import MultiplierInvariants
from .presentation import ClassTwoPresentation, pair_list

EXHAUSTIVE_LIMIT = 1 << 28
DEDUPE_SCOPE = {(2, 3), (2, 4), (3, 3)}
BUDGET_ENV = "SCHUR_BUDGET_OVERRIDE"

GP_MODES = ("full", "cyclic", "trivial", "all")
_R_OF_MODE = {"full": 2, "cyclic": 1, "trivial": 0}


@dataclass(frozen=True)
class EnumerationTask:
    p: int
    d: int
    gp_mode: str = "all"
    mode: str = "exhaustive"  # or "sampled"
    count: int = 100_000
    seed: int = 0xC0FFEE
    dedupe: bool = False


def budget_override() -> bool:
    return bool(os.environ.get(BUDGET_ENV))


def raw_candidate_count(p: int, d: int) -> int:
    """Size of the raw encoding space (before validity filters)."""
    npairs = d * (d - 1) // 2
    return p ** (2 * npairs + 2 * d)


def _check_exhaustive_budget(p: int, d: int):
    if raw_candidate_count(p, d) > EXHAUSTIVE_LIMIT and not budget_override():
        raise BudgetExceededError(
            f"exhaustive enumeration at (p={p}, d={d}) has {raw_candidate_count(p, d)} "
            f"raw candidates > {EXHAUSTIVE_LIMIT}; sample instead "
            f"(or set {BUDGET_ENV}=1)")


def _comm_config_valid(p: int, d: int, comms) -> bool:
    """Spanning W = F_p^2 plus trivial common radical of the form pair."""
    if fplin.rank_of_rows([c for c in comms if any(c)], 2, p) != 2:
        return False
    rows = []
    pl = pair_list(d)
    for l in range(2):
        B = [[0] * d for _ in range(d)]
        for n, (i, j) in enumerate(pl):
            x = comms[n][l]
            if x:
                B[i][j] = x
                B[j][i] = (-x) % p
        rows.extend(B)
    return fplin.kernel(rows, d, p).dim == 0


from functools import lru_cache


@lru_cache(maxsize=1 << 16)
def _f_rank_odd(p: int, powers: tuple) -> int:
    return fplin.rank_of_rows(powers, 2, p)


def _power_rank(p: int, comms, powers) -> int:
    """dim of the power-map image; for p = 2 polarization adjoins the c_ij.

    comms is assumed to pass the special rank-2 validity check, so at p = 2
    the c_ij already span W and the rank is 2 for every choice of powers.
    """
    if p == 2:
        return 2
    return _f_rank_odd(p, tuple(powers))


def _assemble(p, d, comms, powers) -> ClassTwoPresentation:
    return ClassTwoPresentation(p=p, d=d, k=2, comms=tuple(comms), powers=tuple(powers))


def valid_comm_configs(p: int, d: int):
    """All commutator families of a special rank-2 group, lexicographically."""
    npairs = d * (d - 1) // 2
    vecs = list(itertools.product(range(p), repeat=2))
    for comms in itertools.product(vecs, repeat=npairs):
        if _comm_config_valid(p, d, comms):
            yield comms


def stream_candidates(p: int, d: int, gp_mode: str = "all",
                      mode: str = "exhaustive", count: int = 100_000,
                      seed: int = 0xC0FFEE):
    """Yield the valid special rank-2 presentations for the requested family."""
    fplin.check_prime(p)
    if gp_mode not in GP_MODES:
        raise ValidationError(f"gp_mode must be one of {GP_MODES}")
    if d < 2:
        raise ValidationError("need d >= 2")
    want_r = _R_OF_MODE.get(gp_mode)
    if mode == "exhaustive":
        _check_exhaustive_budget(p, d)
        vecs = list(itertools.product(range(p), repeat=2))
        for comms in valid_comm_configs(p, d):
            for powers in itertools.product(vecs, repeat=d):
                if want_r is not None and _power_rank(p, comms, powers) != want_r:
                    continue
                yield _assemble(p, d, comms, powers)
    elif mode == "sampled":
        yielded = 0
        attempts = 0
        max_attempts = 60 * count
        npairs = d * (d - 1) // 2
        while yielded < count:
            if attempts >= max_attempts:
                raise BudgetExceededError(
                    f"sampled stream at (p={p}, d={d}, {gp_mode}) produced only "
                    f"{yielded}/{count} candidates in {max_attempts} draws")
            digits = _keyed_digits(p, d, seed, attempts, 2 * npairs + 2 * d)
            attempts += 1
            comms = tuple(tuple(digits[2 * n: 2 * n + 2]) for n in range(npairs))
            powers = tuple(tuple(digits[2 * npairs + 2 * i: 2 * npairs + 2 * i + 2])
                           for i in range(d))
            if not _comm_config_valid(p, d, comms):
                continue
            if want_r is not None and _power_rank(p, comms, powers) != want_r:
                continue
            yielded += 1
            yield _assemble(p, d, comms, powers)
    else:
        raise ValidationError(f"mode must be 'exhaustive' or 'sampled', got {mode!r}")


def _keyed_digits(p: int, d: int, seed: int, index: int, ndigits: int) -> list[int]:
    """Counter-based deterministic residues: SHA-256 of (p, d, seed, index),
    rejection-sampled per byte to avoid modulo bias."""
    out: list[int] = []
    bound = 256 - 256 % p
    block = 0
    while len(out) < ndigits:
        msg = f"{p},{d},{seed},{index},{block}".encode()
        for b in hashlib.sha256(msg).digest():
            if b < bound:
                out.append(b % p)
                if len(out) == ndigits:
                    break
        block += 1
    return out


# ---------------------------------------------------------------------------
# GL(V) x GL(W) orbits


def gl_generators(n: int, p: int):
    """Transvections plus one diagonal primitive scaling generate GL(n, p)."""
    gens = []
    eye = [[1 if a == b else 0 for b in range(n)] for a in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                g = [row[:] for row in eye]
                g[i][j] = 1
                gens.append(tuple(tuple(r) for r in g))
    if p > 2:
        prim = _primitive_root(p)
        g = [row[:] for row in eye]
        g[0][0] = prim
        gens.append(tuple(tuple(r) for r in g))
    return gens


def _primitive_root(p: int) -> int:
    for g in range(2, p):
        seen = set()
        x = 1
        for _ in range(p - 1):
            x = (x * g) % p
            seen.add(x)
        if len(seen) == p - 1:
            return g
    raise AssertionError("no primitive root found")


def encode(P: ClassTwoPresentation) -> tuple:
    return (P.comms, P.powers)


def orbit(P: ClassTwoPresentation, max_size: int | None = None) -> set:
    """Full BFS orbit of the presentation under GL(d) x GL(k) basis changes."""
    gens_S = gl_generators(P.d, P.p)
    gens_T = gl_generators(P.k, P.p)
    start = encode(P)
    seen = {start}
    frontier = [P]
    while frontier:
        new = []
        for Q in frontier:
            for S in gens_S:
                R = pres.transform(Q, S=S)
                e = encode(R)
                if e not in seen:
                    seen.add(e)
                    new.append(R)
            for T in gens_T:
                R = pres.transform(Q, T=T)
                e = encode(R)
                if e not in seen:
                    seen.add(e)
                    new.append(R)
            if max_size is not None and len(seen) > max_size:
                raise BudgetExceededError(
                    f"orbit exceeded the budget of {max_size} states")
        frontier = new
    return seen


def are_equivalent(P1: ClassTwoPresentation, P2: ClassTwoPresentation,
                   max_size: int | None = 2_000_000) -> bool:
    """GL(V) x GL(W) equivalence (= isomorphism of the presented groups)."""
    if (P1.p, P1.d, P1.k) != (P2.p, P2.d, P2.k):
        return False
    return encode(P2) in orbit(P1, max_size=max_size)


def dedupe_classes(p: int, d: int, gp_mode: str) -> list[ClassTwoPresentation]:
    """One representative per isomorphism class (lex-least encoding).

    Exhaustive BFS over the full candidate set; allowed at the documented
    desk scales only.
    """
    if (p, d) not in DEDUPE_SCOPE and not budget_override():
        raise BudgetExceededError(
            f"dedupe at (p={p}, d={d}) is outside the supported scope "
            f"{sorted(DEDUPE_SCOPE)} (set {BUDGET_ENV}=1 to force)")
    pending = {}
    for P in stream_candidates(p, d, gp_mode, "exhaustive"):
        pending[encode(P)] = P
    reps = []
    while pending:
        e0 = min(pending)
        members = orbit(pending[e0])
        reps.append(pending[e0])
        for e in members:
            pending.pop(e, None)
    return reps


def fingerprint(P: ClassTwoPresentation,
                inv: MultiplierInvariants | None = None) -> tuple:
    """Orbit-invariant summary: engine dims, epicenter dim, and the multiset
    of recognized order-p central quotient types."""
    if inv is None:
        inv = multiplier.multiplier_invariants(P)
    epi = multiplier.epicenter(P)
    quots = sorted(
        (q.kind, q.params)
        for q in (catalog.recognize(pres.central_quotient(P, Z))
                  for Z in multiplier.central_lines(P)))
    return (inv.dim_X1, inv.dim_X2, inv.dim_X, inv.dim_kerRho,
            inv.s, inv.t, epi.epicenter.dim, tuple(quots))


# ---------------------------------------------------------------------------
# theorem verification


@dataclass
class VerificationReport:
    theorem: str
    p: int
    d: int
    mode: str
    count: int | None
    seed: int | None
    dedupe: bool
    groups_checked: int = 0
    violations: list = field(default_factory=list)
    total_violations: int = 0
    stats: dict = field(default_factory=dict)

    MAX_STORED = 50

    def record(self, P: ClassTwoPresentation, clause: str, detail: str):
        self.total_violations += 1
        if len(self.violations) < self.MAX_STORED:
            self.violations.append({
                "clause": clause,
                "detail": detail,
                "presentation": pres.to_json_dict(P),
            })

    def bump(self, key: str, sub):
        table = self.stats.setdefault(key, {})
        sub = str(sub)
        table[sub] = table.get(sub, 0) + 1

    @property
    def ok(self) -> bool:
        return self.total_violations == 0

    def finalize(self):
        """Canonical order for the stored violation sample, so reports do not
        depend on worker count or stream interleaving."""
        self.violations.sort(key=lambda v: (v["clause"], str(sorted(v["presentation"].items()))))
        return self

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem, "p": self.p, "d": self.d,
            "mode": self.mode, "count": self.count, "seed": self.seed,
            "dedupe": self.dedupe,
            "groups_checked": self.groups_checked,
            "total_violations": self.total_violations,
            "violations": self.violations,
            "stats": self.stats,
        }


def _epi_kind(P, epi) -> str:
    """Classify the epicenter of a special rank-2 group: 0, W, the power-image
    line, some other line."""
    dim = epi.epicenter.dim
    if dim == 0:
        return "zero"
    if dim == 2:
        return "W"
    img = pres.power_image(P)
    if img.dim == 1 and epi.epicenter == img:
        return "Gp_line"
    return "other_line"


def _s1_quotient_ok(p: int, q: IsoType) -> bool:
    """Target list for order-p quotients when G^p = G': ES_{p^2}-type for odd p
    (any m >= 1), Q8-padded or any extraspecial with m >= 2 for p = 2."""
    if q.kind == "es_odd":
        e, m, a = q.params
        return e == 2 and m >= 1
    if p == 2 and q.kind == "es2":
        arf, m, a = q.params
        return (m == 1 and arf == 1) or m >= 2
    return False


def _check_S1(P, inv, epi, report):
    E = P.d * (P.d - 1) // 2
    e = inv.order_exponent
    kind = _epi_kind(P, epi)
    report.bump("epicenter", kind)
    report.bump("order_exponent", e)
    report.bump("s", inv.s)
    if kind not in ("zero", "W"):
        report.record(P, "S1(a)", f"epicenter is {kind}, expected trivial or all of W")
    if (e == E - 2 and inv.s == 0) != (kind == "W"):
        report.record(P, "S1(b)", f"elem-abelian-order-p^{E - 2} <-> Z*=Z(G) failed "
                                  f"(e={e}, s={inv.s}, epicenter={kind})")
    if (e == E - 1) != (kind == "zero"):
        report.record(P, "S1(c)", f"order-p^{E - 1} <-> capable failed "
                                  f"(e={e}, epicenter={kind})")
    if e not in (E - 2, E - 1):
        report.record(P, "S1(bc)", f"order exponent {e} outside {{{E - 2}, {E - 1}}}")
    for Z in multiplier.central_lines(P):
        q = catalog.recognize(pres.central_quotient(P, Z))
        report.bump("quotient", q.kind + str(q.params))
        if not _s1_quotient_ok(P.p, q):
            report.record(P, "S1(d)", f"quotient by {list(Z.rows)} recognized as "
                                      f"{q.kind}{q.params} {q.note!r}, not in the target list")


def _check_S2(P, inv, epi, report):
    E = P.d * (P.d - 1) // 2
    e = inv.order_exponent
    kind = _epi_kind(P, epi)
    report.bump("epicenter", kind)
    report.bump("order_exponent", e)
    if inv.s != 0:
        report.record(P, "S2(b)", f"multiplier not elementary abelian (s={inv.s})")
    if kind == "zero":
        report.record(P, "S2(a)", "capable, but no rank-2 special group with "
                                  "cyclic G^p can be capable")
    elif kind not in ("Gp_line", "W"):
        report.record(P, "S2(a)", f"epicenter is {kind}, expected G^p or W")
    gp = pres.power_image(P)
    q = catalog.recognize(pres.central_quotient(P, gp))
    report.bump("quotient_mod_Gp", q.kind + str(q.params))
    c_i = e == E - 2
    c_ii = kind == "W"
    c_iii = q.kind == "es_odd" and q.params[0] == 1 and q.params[1] >= 2
    if not (c_i == c_ii == c_iii):
        report.record(P, "S2(c)", f"(i)={c_i} (ii)={c_ii} (iii)={c_iii} disagree "
                                  f"(e={e}, epicenter={kind}, G/G^p={q.kind}{q.params})")
    d_i = e == E
    d_ii = kind == "Gp_line"
    d_iii = q.kind == "es_odd" and q.params[0] == 1 and q.params[1] == 1
    if not (d_i == d_ii == d_iii):
        report.record(P, "S2(d)", f"(i)={d_i} (ii)={d_ii} (iii)={d_iii} disagree "
                                  f"(e={e}, epicenter={kind}, G/G^p={q.kind}{q.params})")


_S3_CAPABLE_EXP = {3: 3 + 3, 4: 6 + 2, 5: 10 - 1}  # d -> order exponent of M


def _check_S3(P, inv, epi, report):
    E = P.d * (P.d - 1) // 2
    e = inv.order_exponent
    kind = _epi_kind(P, epi)
    epid = epi.epicenter.dim
    report.bump("epicenter", kind)
    report.bump("order_exponent", e)
    if inv.s != 0:
        report.record(P, "S3(a)", f"multiplier not elementary abelian (s={inv.s})")
    if not (E - 2 <= e <= E + 3):
        report.record(P, "S3(b)", f"order exponent {e} outside [{E - 2}, {E + 3}]")
    if epi.capable:
        want = _S3_CAPABLE_EXP.get(P.d)
        if want is None:
            report.record(P, "S3(c)", f"capable group at d={P.d}, but the capable "
                                      "list stops at d = 5")
        elif e != want:
            report.record(P, "S3(c-f)", f"capable with order exponent {e}, expected {want}")
    else:
        if e not in (E - 2, E):
            report.record(P, "S3(eq4)", f"not capable but order exponent {e} "
                                        f"not in {{{E - 2}, {E}}}")
    if (e == E - 2) != (epid == 2):
        report.record(P, "S3(g)", f"order p^{E - 2} <-> Z*=Z(G) failed "
                                  f"(e={e}, epicenter dim {epid})")
    if e == E - 2:
        for Z in multiplier.central_lines(P):
            q = catalog.recognize(pres.central_quotient(P, Z))
            if not (q.kind == "es_odd" and q.params[0] == 1 and q.params[1] >= 2):
                report.record(P, "S3(g)", f"quotient {q.kind}{q.params} not "
                                          "ES_p(p^(2m+1)) x elem with m >= 2")
    if (e == E) != (epid == 1):
        report.record(P, "S3(h)", f"order p^{E} <-> Z* of order p failed "
                                  f"(e={e}, epicenter dim {epid})")
    if epid == 1:
        q = catalog.recognize(pres.central_quotient(P, epi.epicenter))
        if not (q.kind == "es_odd" and q.params == (1, 1, P.d - 2)):
            report.record(P, "S3(h)", f"G/Z* is {q.kind}{q.params}, "
                                      "not ES_p(p^3) x elem")


def verify_theorem(theorem: str, p: int, d: int, mode: str = "exhaustive",
                   count: int = 100_000, seed: int = 0xC0FFEE,
                   dedupe: bool = False, jobs: int = 1) -> VerificationReport:
    """Check every decidable clause of one main theorem over a streamed family."""
    theorem = theorem.upper() if theorem.lower() != "p2" else "p2"
    if theorem not in ("S1", "S2", "S3", "p2"):
        raise ValidationError(f"unknown theorem {theorem!r}")
    if theorem == "S3" and p == 2:
        raise ValidationError("S3 concerns odd p only")
    if theorem == "p2" and p != 2:
        raise ValidationError("p2 concerns p = 2 only")
    report = VerificationReport(
        theorem=theorem, p=p, d=d, mode=mode,
        count=count if mode == "sampled" else None,
        seed=seed if mode == "sampled" else None, dedupe=dedupe)

    if theorem == "p2":
        # no special 2-group of rank 2 has r < 2: the r-filtered streams must
        # be empty and the unfiltered stream must only carry r = 2
        for gp_mode in ("cyclic", "trivial"):
            for P in stream_candidates(p, d, gp_mode, mode, count, seed):
                report.record(P, f"p2({gp_mode})",
                              f"found a special rank-2 group with gp_mode {gp_mode}")
        for P in stream_candidates(p, d, "all", mode, count, seed):
            report.groups_checked += 1
            r = pres.power_image(P).dim
            report.bump("r", r)
            if r != 2:
                report.record(P, "p2", f"power image has dimension {r} != 2")
        return report.finalize()

    gp_mode = {"S1": "full", "S2": "cyclic", "S3": "trivial"}[theorem]
    check = {"S1": _check_S1, "S2": _check_S2, "S3": _check_S3}[theorem]
    if jobs > 1:
        _verify_parallel(theorem, p, d, mode, count, seed, gp_mode, report, jobs)
    else:
        for P in stream_candidates(p, d, gp_mode, mode, count, seed):
            report.groups_checked += 1
            inv = multiplier.multiplier_invariants(P)
            epi = multiplier.epicenter(P)
            check(P, inv, epi, report)

    if dedupe:
        _check_capable_classes(theorem, p, d, gp_mode, report)
    return report.finalize()


def _check_capable_classes(theorem: str, p: int, d: int, gp_mode: str,
                           report: VerificationReport):
    """Class-level capability lists (needs the orbit partition)."""
    reps = dedupe_classes(p, d, gp_mode)
    capable = [R for R in reps if multiplier.epicenter(R).capable]
    report.stats["classes"] = len(reps)
    report.stats["capable_classes"] = len(capable)
    if theorem == "S3" and d == 3:
        # the only capable class with G^p = 1 at d = 3 is Phi_4(1^5)
        phi4 = catalog.phi4_1_5(p)
        if len(capable) != 1 or not are_equivalent(capable[0], phi4):
            for R in capable:
                if not are_equivalent(R, phi4):
                    report.record(R, "S3(d)", "capable class not equivalent to Phi_4(1^5)")
            if not capable:
                report.record(phi4, "S3(d)", "no capable class found at d = 3")


def _verify_parallel(theorem, p, d, mode, count, seed, gp_mode, report, jobs):
    """Partition the candidate stream and merge worker reports in order."""
    import multiprocessing as mp

    if mode == "exhaustive":
        configs = list(valid_comm_configs(p, d))
        chunks = [configs[i::jobs] for i in range(jobs)]
        args = [(theorem, p, d, "configs", chunk, None, None) for chunk in chunks]
    else:
        per = count // jobs
        extras = count - per * jobs
        args = []
        offset = 0
        for w in range(jobs):
            c = per + (1 if w < extras else 0)
            args.append((theorem, p, d, "sampled_slice", None, (offset, c), seed))
            offset += c
        # sampled slices share the draw counter; workers skip to their offset
    with mp.Pool(jobs) as pool:
        partials = pool.map(_verify_worker, args)
    for part in partials:
        report.groups_checked += part.groups_checked
        report.total_violations += part.total_violations
        for v in part.violations:
            if len(report.violations) < report.MAX_STORED:
                report.violations.append(v)
        for key, table in part.stats.items():
            mine = report.stats.setdefault(key, {})
            for sk, n in table.items():
                mine[sk] = mine.get(sk, 0) + n


def _verify_worker(arg):
    theorem, p, d, kind, configs, slc, seed = arg
    report = VerificationReport(theorem=theorem, p=p, d=d, mode=kind,
                                count=None, seed=seed, dedupe=False)
    check = {"S1": _check_S1, "S2": _check_S2, "S3": _check_S3}[theorem]
    gp_mode = {"S1": "full", "S2": "cyclic", "S3": "trivial"}[theorem]
    want_r = _R_OF_MODE[gp_mode]
    if kind == "configs":
        vecs = list(itertools.product(range(p), repeat=2))
        for comms in configs:
            for powers in itertools.product(vecs, repeat=d):
                if _power_rank(p, comms, powers) != want_r:
                    continue
                P = _assemble(p, d, comms, powers)
                report.groups_checked += 1
                check(P, multiplier.multiplier_invariants(P),
                      multiplier.epicenter(P), report)
    else:
        offset, c = slc
        stream = stream_candidates(p, d, gp_mode, "sampled",
                                   count=offset + c, seed=seed)
        for i, P in enumerate(stream):
            if i < offset:
                continue
            report.groups_checked += 1
            check(P, multiplier.multiplier_invariants(P),
                  multiplier.epicenter(P), report)
    return report
