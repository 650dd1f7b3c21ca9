"""Decisions about polynomial maps: quasiopenness, approximation numbers, openness.

``app_direct`` tests quasiopenness of successive fibred powers;
``app_formula`` reads the value off a rank partition.  Both are computed
from scratch so that one can check the other.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import (
    MapSpec,
    chart_cells,
    chart_expand,
    dimension,
    ff_count,
    fibred_power,
    image_closure,
    jump_locus,
    split_components,
)
from .groebner import (
    Ideal,
    buchberger,
    eliminate,
    intersect,
    radical_member,
)
from .polycore import Poly, Ring

INFINITY = math.inf

TARGET_SINGULAR = "target-singular-formula-invalid"
RANDOMIZED = "randomized-stratification"
HEURISTIC = "heuristic-splitting"


class TheoremContradiction(RuntimeError):
    """Two computations that a theorem says must agree did not."""


class PreconditionError(ValueError):
    pass


class InconsistentStrata(ValueError):
    pass


class SamplingError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass
class Stratum:
    ideal: Ideal  # closure of the stratum
    excluded: Ideal | None  # sub-locus removed from the closure
    k: int
    r: int
    w: int
    h: int
    image: Ideal  # closure of the image, in the target ring
    component: int = 0
    chart: str = ""

    def check(self, d: int):
        if self.k != self.r + self.w:
            raise InconsistentStrata(f"k != r + w in {self.data}")
        if not (0 <= self.r <= d) or self.w < 0:
            raise InconsistentStrata(f"rank or fibre dimension out of range in {self.data}")
        if self.k > self.h:
            raise InconsistentStrata(f"k > h in {self.data}")

    @property
    def data(self) -> dict:
        return {"k": self.k, "r": self.r, "w": self.w, "h": self.h}


@dataclass
class PowerCheck:
    i: int
    quasiopen: bool
    pieces: list[dict]
    suspect: bool = False


@dataclass
class AppResult:
    value: float  # int or INFINITY
    route: str
    certificate: list = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)
    bound: int | None = None
    interval: tuple[int, float] | None = None

    @property
    def finite(self) -> bool:
        return self.value != INFINITY


@dataclass
class QuasiopenResult:
    quasiopen: bool
    pieces: list[dict]
    suspect: bool = False

    def __bool__(self):
        return self.quasiopen


@dataclass
class OpennessVerdict:
    verdict: str  # "open", "not-open", "undecided"
    reason: str
    rank_check: bool | None = None
    power_check: bool | None = None


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _seed_list(seed) -> list[int]:
    return [seed] if isinstance(seed, int) else list(seed)


def target_is_smooth(m: MapSpec) -> bool:
    """Jacobian criterion on the declared target (affine space counts as smooth)."""
    comps = m.target_components
    if not comps:
        return True
    T = m.target_ring
    dims = [dimension(J.to_ring(T)) for J in comps]
    if len(set(dims)) != 1:
        return False
    for a, b in itertools.combinations(comps, 2):
        if not (a.to_ring(T) + b.to_ring(T)).is_unit():
            return False
    for J, dim in zip(comps, dims):
        J = J.to_ring(T)
        c = T.nvars - dim
        if c == 0:
            continue
        gens = list(J.gens)
        jac = [[g.diff(v) for v in T.names] for g in gens]
        minors = []
        for rows in itertools.combinations(range(len(gens)), c):
            for cols in itertools.combinations(range(T.nvars), c):
                minors.append(_det([[jac[r][k] for k in cols] for r in rows], T))
        if not (J + minors).is_unit():
            return False
    return True


def _det(M: list[list[Poly]], ring: Ring) -> Poly:
    n = len(M)
    if n == 1:
        return M[0][0]
    total = ring.zero()
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in M[1:]]
        term = M[0][j] * _det(minor, ring)
        total = total + term if j % 2 == 0 else total - term
    return total


def _dominates(img: Ideal, m: MapSpec) -> bool:
    if not m.target_components:
        return img.is_zero()
    T = m.target_ring
    img = img.to_ring(T)
    for Y in m.target_components:
        Y = Y.to_ring(T)
        if all(radical_member(g, Y) for g in img.gens):
            return True
    return False


def _source_groups(m: MapSpec) -> list[list[Ideal]]:
    """Groups of ideals whose pieces may contain one another."""
    if m.disjoint:
        return [[P] for P in m.sources]
    return [list(m.sources)]


def _presplit(P: Ideal, m: MapSpec) -> list[Ideal]:
    if len(m.target_components) < 2:
        return [P]
    return [P + [g.to_ring(P.ring) for g in Y.gens] for Y in m.target_components]


_ORACLE_LIMIT = 4 * 10**5


def suspect_hidden_component(piece: Ideal, dim: int) -> bool | None:
    """Point-count test for a missed splitting; ``None`` when too large to count.

    An absolutely irreducible piece of dimension ``k`` has about ``q^k``
    points over F_q; two top-dimensional components show up as about
    ``2 q^k``.
    """
    n = piece.ring.nvars
    if dim <= 0:
        return False
    qs = [q for q in (11, 7, 5) if q**n <= _ORACLE_LIMIT]
    if not qs:
        return None
    q = qs[0]
    try:
        count = ff_count(piece, q)
    except ZeroDivisionError:
        return None
    return count / q**dim >= 1.75


# ---------------------------------------------------------------------------
# quasiopenness and the direct route
# ---------------------------------------------------------------------------


def quasiopen(m: MapSpec, oracle: bool = True, stop_early: bool = True) -> QuasiopenResult:
    """Every component of the source dominates a component of the target."""
    m = m.with_target_equations()
    evidence = []
    ok = True
    suspect = False
    for chart in chart_expand(m, up_to_symmetry=True):
        for group in _source_groups(chart):
            starts = [Q for P in group for Q in _presplit(P, chart)]
            comps = split_components(
                starts,
                hints=chart.hints,
                target=chart.target_vars,
                asserted=chart.sources_irreducible,
            )
            for piece in comps:
                img = image_closure(piece.ideal, chart.target_vars)
                dom = _dominates(img, chart)
                flag = suspect_hidden_component(piece.ideal, piece.dim) if oracle and dom else None
                suspect = suspect or bool(flag)
                evidence.append(
                    {
                        "chart": chart.chart,
                        "piece": str(piece.ideal),
                        "dim": piece.dim,
                        "image": str(img),
                        "dominant": dom,
                        "oracle_suspect": flag,
                    }
                )
                if not dom:
                    ok = False
                    if stop_early:
                        return QuasiopenResult(False, evidence, suspect)
    return QuasiopenResult(ok, evidence, suspect)


def termination_bound(m: MapSpec) -> int:
    """``d`` for affine or irreducible targets, ``D`` for declared reducible ones."""
    if len(m.target_components) > 1:
        return m.D
    return m.d


def app_direct(m: MapSpec, oracle: bool = True) -> AppResult:
    """Largest ``i`` whose fibred power is quasiopen, stopping at the bound."""
    bound = termination_bound(m)
    checks = []
    first_suspect = None
    value = INFINITY
    for i in range(1, bound + 1):
        power = fibred_power(m, i, up_to_symmetry=True)
        qo = quasiopen(power, oracle=oracle)
        checks.append(PowerCheck(i, qo.quasiopen, qo.pieces, qo.suspect))
        if qo.suspect and qo.quasiopen and first_suspect is None:
            first_suspect = i
        if not qo.quasiopen:
            value = i - 1
            break
    result = AppResult(value, "direct", certificate=checks, bound=bound)
    if first_suspect is not None:
        result.caveats.append(HEURISTIC)
        result.interval = (first_suspect - 1, value)
    return result


# ---------------------------------------------------------------------------
# rank partition and the formula route
# ---------------------------------------------------------------------------


@dataclass
class RankPartition:
    strata: list[Stratum]
    d: int
    randomized: bool = True
    stabilized: bool = True
    seed: int | tuple = 0
    slices: int = 0
    caveats: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.strata)

    def __len__(self):
        return len(self.strata)


def rank_partition(
    m: MapSpec, seed: int = 0, bound: int = 1000, reps: int = 3
) -> RankPartition:
    """A rank partition built by recursive jump-locus refinement of each component."""
    m = m.with_target_equations()
    part = RankPartition([], m.d, seed=seed)
    tag = 0
    for ci, chart in enumerate(chart_expand(m)):
        for gi, group in enumerate(_source_groups(chart)):
            starts = [Q for P in group for Q in _presplit(P, chart)]
            comps = split_components(
                starts,
                hints=chart.hints,
                target=chart.target_vars,
                asserted=chart.sources_irreducible,
            )
            for pi, piece in enumerate(comps):
                seeds = _seed_list(seed) + [ci, gi, pi]
                _refine(part, chart, piece.ideal, piece.dim, tag, seeds, bound, reps)
                tag += 1
    return part


def _refine(part, chart: MapSpec, W: Ideal, h: int, tag: int, seed, bound, reps, depth=0):
    k = dimension(W)
    if k < 0:
        return
    img = image_closure(W, chart.target_vars)
    r = dimension(img)
    w = k - r
    loc = jump_locus(chart.restrict([W]), w + 1, seed=seed + [depth], bound=bound, reps=reps)
    part.slices += loc.slices
    part.stabilized = part.stabilized and loc.stabilized
    pulled = W + [g.to_ring(W.ring) for g in loc.ideal.gens]
    excluded = None if pulled.is_unit() else Ideal(W.ring, buchberger(pulled))
    part.strata.append(Stratum(W, excluded, k, r, w, h, img, tag, chart.chart))
    if excluded is None:
        return
    pieces = split_components(excluded, hints=chart.hints, target=chart.target_vars)
    for j, piece in enumerate(pieces):
        if piece.dim >= k:
            part.caveats.append(HEURISTIC)
            continue
        _refine(part, chart, piece.ideal, h, tag, seed + [depth, j], bound, reps, depth + 1)


def app_formula(strata: Sequence[Stratum], d: int, target_smooth: bool = True) -> AppResult:
    """Infimum of ``[(d - r - 1) / ((k - r) - (h - d))]`` over strata with ``k - r > h - d``."""
    best = INFINITY
    witness = None
    for s in strata:
        s.check(d)
        denom = (s.k - s.r) - (s.h - d)
        if denom <= 0:
            continue
        val = max(0, (d - s.r - 1) // denom)
        if val < best:
            best, witness = val, s
    cert = [witness.data | {"chart": witness.chart}] if witness is not None else []
    result = AppResult(best, "formula", certificate=cert)
    if not target_smooth:
        result.caveats.append(TARGET_SINGULAR)
    return result


def refine_stratum(
    strata: Sequence[Stratum], index: int, chart: MapSpec, seed: int = 0
) -> list[Stratum]:
    """Cut stratum ``index`` by a random hyperplane and re-partition the slice.

    The complement of the slice keeps the old data; the slice gets its own
    rank partition (with the ``h`` of the original stratum).
    """
    s = strata[index]
    rng = np.random.default_rng(_seed_list(seed) + [index, 7])
    coeffs = rng.integers(-20, 21, size=len(s.ideal.ring.names) + 1).tolist()
    ring = s.ideal.ring
    hyper = ring.const(coeffs[-1])
    for c, n in zip(coeffs, ring.names):
        if c:
            hyper = hyper + ring.var(n).scale(c)
    sub = RankPartition([], len(chart.target_vars))
    for j, piece in enumerate(split_components(s.ideal + [hyper], target=chart.target_vars)):
        _refine(sub, chart, piece.ideal, s.h, s.component, _seed_list(seed) + [index, j], 1000, 3)
    return list(strata[:index]) + [s] + sub.strata + list(strata[index + 1 :])


# ---------------------------------------------------------------------------
# openness and critical values
# ---------------------------------------------------------------------------


def _rank_defect(m: MapSpec, seed, bound: int, reps: int) -> str | None:
    """Why the Remmert rank drops below ``d`` somewhere, or ``None`` if it never does."""
    d = m.d
    for ci, chart in enumerate(chart_expand(m)):
        for gi, group in enumerate(_source_groups(chart)):
            comps = split_components(
                group, hints=chart.hints, target=chart.target_vars,
                asserted=chart.sources_irreducible,
            )
            for pi, piece in enumerate(comps):
                if piece.dim < d:
                    return f"component {piece.ideal} has dimension {piece.dim} < d"
                loc = jump_locus(
                    chart.restrict([piece.ideal]),
                    piece.dim - d + 1,
                    seed=_seed_list(seed) + [ci, gi, pi, 99],
                    bound=bound,
                    reps=reps,
                )
                if not loc.ideal.is_unit():
                    return f"fibres of dimension > {piece.dim - d} over {loc.ideal}"
    return None


def openness(m: MapSpec, seed: int = 0, bound: int = 1000, reps: int = 3) -> OpennessVerdict:
    """Open iff the Remmert rank is ``d`` everywhere, cross-checked on the ``d``-th fibred power."""
    if len(m.target_components) > 1:
        return OpennessVerdict("undecided", "reducible target: needs normalization")
    if m.target_components and not m.target_locally_irreducible:
        return OpennessVerdict("undecided", "target not asserted locally irreducible")
    m = m.with_target_equations()
    d = m.d
    defect = _rank_defect(m, seed, bound, reps)
    rank_ok = defect is None
    reason = "Remmert rank equals d everywhere" if rank_ok else defect
    power_ok = bool(quasiopen(fibred_power(m, d, up_to_symmetry=True), oracle=False))
    if rank_ok != power_ok:
        raise TheoremContradiction(
            f"rank check says {rank_ok} but quasiopenness of the {d}-th fibred power says {power_ok}"
        )
    verdict = "open" if rank_ok else "not-open"
    return OpennessVerdict(verdict, reason, rank_ok, power_ok)


def critical_values(strata: Sequence[Stratum], d: int, target: Ring | None = None) -> Ideal:
    """Union of the image closures of the strata of rank below ``d``."""
    low = [s.image for s in strata if s.r < d]
    if not low:
        if target is None:
            if not strata:
                raise ValueError("need strata or a target ring")
            target = strata[0].image.ring
        return Ideal(target, [target.one()])
    out = low[0]
    for J in low[1:]:
        out = intersect(out, J.to_ring(out.ring))
    out = Ideal(out.ring, buchberger(out))
    if dimension(out) >= d:
        raise TheoremContradiction(f"critical values {out} have dimension >= {d}")
    return out


# ---------------------------------------------------------------------------
# fibre counts
# ---------------------------------------------------------------------------


def _univariate_squarefree(p: Poly, var: str) -> Poly:
    ring = p.ring
    g = Ideal(ring, [p, p.diff(var)]).groebner()
    if not g or g[0].is_constant():
        return p
    return _exact_div(p, g[0], var)


def _exact_div(a: Poly, b: Poly, var: str) -> Poly:
    ring = a.ring
    i = ring.index(var)
    db = b.degree(var)
    lead = b.coefficient_in(var, db).terms[0][1]
    q = ring.zero()
    rem = a
    while not rem.is_zero() and rem.degree(var) >= db:
        dr = rem.degree(var)
        c = rem.coefficient_in(var, dr).terms[0][1] / lead
        mono = [0] * ring.nvars
        mono[i] = dr - db
        t = Poly(ring, ((tuple(mono), c),))
        q = q + t
        rem = rem - t * b
    if not rem.is_zero():
        raise ArithmeticError("inexact univariate division")
    return q


def count_points(ideal: Ideal) -> int:
    """Number of distinct complex points of a zero-dimensional ideal."""
    ring = ideal.ring
    if ideal.is_unit():
        return 0
    if dimension(ideal) != 0:
        raise ValueError("ideal is not zero-dimensional")
    extra = []
    for v in ring.names:
        elim = eliminate(ideal, [n for n in ring.names if n != v])
        gens = elim.gens
        if not gens:
            raise ValueError("ideal is not zero-dimensional")
        p = gens[0]
        extra.append(_univariate_squarefree(p, v).to_ring(ring))
    rad = ideal + extra
    gb = buchberger(rad)
    lms = [g.terms[0][0] for g in gb]
    n = ring.nvars
    bounds = []
    for i in range(n):
        pure = [lm[i] for lm in lms if all(e == 0 for j, e in enumerate(lm) if j != i)]
        bounds.append(min(pure))
    count = 0
    for mono in itertools.product(*(range(b) for b in bounds)):
        if not any(all(a <= b for a, b in zip(lm, mono)) for lm in lms):
            count += 1
    return count


def _independent_set(J: Ideal) -> list[int]:
    gb = buchberger(J)
    n = J.ring.nvars
    if not gb:
        return list(range(n))
    masks = [sum(1 << i for i, e in enumerate(g.terms[0][0]) if e) for g in gb]
    target = dimension(J)
    for combo in itertools.combinations(range(n), target):
        s = sum(1 << i for i in combo)
        if all(mk & ~s for mk in masks):
            return list(combo)
    raise AssertionError("no independent set of full size")


def generic_fibre_count(m: MapSpec, seed: int = 0, attempts: int = 5) -> int:
    """Cardinality of a generic fibre, agreed on at two random target points."""
    m = m.with_target_equations()
    T = m.target_ring
    Y = m.target_ideal()
    free = _independent_set(Y)
    rng = np.random.default_rng(_seed_list(seed) + [31])
    cells = chart_cells(m)
    results = []
    tries = 0
    while len(results) < 2:
        tries += 1
        if tries > attempts + 1:
            raise SamplingError("could not find generic specializations")
        vals = {T.names[i]: int(v) for i, v in zip(free, rng.integers(-50, 51, size=len(free)))}
        try:
            ny = count_points(Y + [T.var(n) - c for n, c in vals.items()]) if Y.gens else 1
            total = 0
            for cell in cells:
                for P in cell.sources:
                    spec = P + [cell.ring.var(n) - c for n, c in vals.items()]
                    total += count_points(spec)
        except ValueError:
            continue
        if ny == 0 or total % ny:
            continue
        results.append(total // ny)
    if results[0] != results[1]:
        raise SamplingError(f"fibre counts {results[0]} and {results[1]} disagree")
    return results[0]


def fibre_count_bound(strata: Sequence[Stratum], d: int):
    """Lower bound ``inf [(d - r - 1) / (k - r)]`` over strata with ``k > r``; ``None`` if no such stratum."""
    tops = [s for s in strata if s.k == s.h]
    for s in tops:
        if s.h != d:
            raise PreconditionError(f"source component of dimension {s.h} != {d}")
        if s.w != 0:
            raise PreconditionError("generic fibre is not finite")
    best = None
    for s in strata:
        if s.k > s.r:
            val = (d - s.r - 1) // (s.k - s.r)
            best = val if best is None else min(best, val)
    return best
