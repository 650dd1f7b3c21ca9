"""Variety-level primitives for polynomial maps.

A map is always a coordinate projection ``X -> Y`` where ``X`` sits inside
``Y-space x fibre-space``; general maps ``x -> f(x)`` go through the graph
ideal ``<y_j - f_j>``.  Everything here is exact except
:func:`fibre_jump_locus`, which slices with seeded random affine forms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .groebner import (
    Ideal,
    buchberger,
    contains_ideal,
    eliminate,
    intersect,
    member,
    saturate,
    variety_contains,
)
from .polycore import Poly, Ring

__all__ = [
    "ComponentSet",
    "JumpLocus",
    "MapSpec",
    "Piece",
    "chart_cells",
    "chart_expand",
    "dimension",
    "ff_count",
    "ff_dim_estimate",
    "fibre_jump_locus",
    "fibred_power",
    "image_closure",
    "jump_locus",
    "split_components",
]


# ---------------------------------------------------------------------------
# dimension and images
# ---------------------------------------------------------------------------


def dimension(ideal: Ideal) -> int:
    """Krull dimension of V(ideal); -1 for the unit ideal.

    Largest set of variables independent modulo the leading-term ideal of
    the reduced grevlex basis.
    """
    n = ideal.ring.nvars
    gb = buchberger(ideal)
    if not gb:
        return n
    if len(gb) == 1 and gb[0].is_constant():
        return -1
    masks = []
    for g in gb:
        m = g.terms[0][0]
        masks.append(sum(1 << i for i, e in enumerate(m) if e))
    masks = sorted(set(masks))
    best = 0

    def independent(s: int) -> bool:
        return all(lm & ~s for lm in masks)

    def search(i: int, chosen: int, size: int):
        nonlocal best
        if size + (n - i) <= best:
            return
        if i == n:
            best = max(best, size)
            return
        s = chosen | (1 << i)
        if independent(s):
            search(i + 1, s, size + 1)
        search(i + 1, chosen, size)

    search(0, 0, 0)
    return best


def image_closure(ideal: Ideal, target: Iterable[str]) -> Ideal:
    """Ideal of the Zariski closure of the projection of V(ideal) onto ``target``."""
    target = list(target)
    drop = [n for n in ideal.ring.names if n not in target]
    return eliminate(ideal, drop)


# ---------------------------------------------------------------------------
# component splitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Piece:
    ideal: Ideal
    dim: int
    tag: str  # "asserted-irreducible" or "split-piece"


@dataclass
class ComponentSet:
    pieces: list[Piece]
    log: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.pieces)

    def __len__(self):
        return len(self.pieces)

    @property
    def dim(self) -> int:
        return max((p.dim for p in self.pieces), default=-1)


def _candidates(P: Ideal, hints: Sequence[Poly], target: Sequence[str]):
    ring = P.ring
    seen = set()

    def emit(g: Poly):
        if g.is_constant():
            return None
        g = g.monic()
        if g in seen:
            return None
        seen.add(g)
        return g

    gb = buchberger(P)
    # (a) monomial factors of generators
    for src in (P.gens, gb):
        for g in src:
            content = g.monomial_content()
            for name, e in zip(ring.names, content):
                if e:
                    c = emit(ring.var(name))
                    if c is not None:
                        yield c
    # (b) factors written explicitly in the input
    for h in hints:
        if set(h.ring.names) <= set(ring.names):
            c = emit(h.to_ring(ring))
            if c is not None:
                yield c
    # (c) leading coefficients with respect to single variables
    for g in gb:
        for name in g.variables():
            lc = g.coefficient_in(name, g.degree(name))
            if lc.is_constant():
                continue
            content = lc.monomial_content()
            if any(content):
                for v, e in zip(ring.names, content):
                    if e:
                        c = emit(ring.var(v))
                        if c is not None:
                            yield c
            c = emit(lc)
            if c is not None:
                yield c
    # (d) the target variables
    for name in target:
        if name in ring.names:
            c = emit(ring.var(name))
            if c is not None:
                yield c


def _try_split(P: Ideal, g: Poly):
    if member(g, P):
        return None
    S = saturate(P, g)
    if S.is_unit() or contains_ideal(P, S):
        return None
    return S, P + [g]


def _union(ideals: Sequence[Ideal]) -> Ideal:
    out = ideals[0]
    for J in ideals[1:]:
        out = intersect(out, J)
    return out


def split_components(
    ideal: Ideal | Sequence[Ideal],
    hints: Sequence[Poly] = (),
    target: Sequence[str] = (),
    asserted: bool = False,
) -> ComponentSet:
    """Split V(ideal) into pieces V(I : g^inf) and V(I + <g>) while candidates bite.

    ``ideal`` may also be a list of ideals in one ring, read as the union of
    their varieties.  Pieces whose variety lies inside another piece are
    discarded.  The result covers the input by pieces that no candidate
    splits; it is not a certified prime decomposition.
    """
    log: list[str] = []
    work = [ideal] if isinstance(ideal, Ideal) else list(ideal)
    final: list[Ideal] = []
    while work:
        P = work.pop()
        if P.is_unit():
            continue
        if asserted:
            final.append(P)
            continue
        for g in _candidates(P, hints, target):
            parts = _try_split(P, g)
            if parts is not None:
                S, Q = parts
                log.append(f"split {P} by {g}")
                work.append(Ideal(Q.ring, buchberger(Q)))
                work.append(Ideal(S.ring, buchberger(S)))
                break
        else:
            final.append(P)

    scored = sorted(((dimension(P), str(P), P) for P in final), key=lambda t: (-t[0], t[1]))
    kept: list[tuple[int, Ideal]] = []
    for d, _, P in scored:
        if any(variety_contains(Q, P) for _, Q in kept):
            log.append(f"drop {P} (contained in another piece)")
            continue
        bigger = [Q for e, Q in kept if e > d]
        if len(bigger) > 1 and variety_contains(_union(bigger), P):
            log.append(f"drop {P} (contained in the union of larger pieces)")
            continue
        kept.append((d, P))
    tag = "asserted-irreducible" if asserted else "split-piece"
    return ComponentSet([Piece(P, d, tag) for d, P in kept], log)


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MapSpec:
    """Coordinate projection of ``X = V(s_1) u ... u V(s_m)`` onto the target block.

    ``target_components`` are ideals in the target variables only (empty
    means the target is the whole affine space).  ``projective_blocks`` are
    pairs of fibre variables forming homogeneous coordinates on P^1.  With
    ``disjoint`` the sources are separate spaces (a disjoint union) rather
    than subsets of one ambient space.
    """

    ring: Ring
    target_vars: tuple[str, ...]
    sources: tuple[Ideal, ...]
    target_components: tuple[Ideal, ...] = ()
    projective_blocks: tuple[tuple[str, str], ...] = ()
    sources_irreducible: bool = False
    disjoint: bool = False
    target_locally_irreducible: bool | None = None
    hints: tuple[Poly, ...] = ()
    copies: int = 1
    symmetric: bool = False
    name: str = ""
    chart: str = ""

    def __post_init__(self):
        if not self.target_vars:
            raise ValueError("the target needs at least one variable")
        if self.ring.names[: len(self.target_vars)] != tuple(self.target_vars):
            raise ValueError("target variables must come first in the ring")
        for J in self.target_components:
            if not set(J.ring.names) <= set(self.target_vars):
                raise ValueError("target components may only involve target variables")

    @property
    def fibre_vars(self) -> tuple[str, ...]:
        return self.ring.names[len(self.target_vars) :]

    @property
    def target_ring(self) -> Ring:
        return self.ring.subring(self.target_vars)

    @property
    def d(self) -> int:
        """Dimension of the target."""
        if not self.target_components:
            return len(self.target_vars)
        return max(dimension(J) for J in self.target_components)

    @property
    def D(self) -> int:
        """Sum of the dimensions of the declared target components."""
        if not self.target_components:
            return len(self.target_vars)
        return sum(dimension(J) for J in self.target_components)

    def target_ideal(self) -> Ideal:
        """Ideal of the whole target (intersection of the components)."""
        R = self.target_ring
        if not self.target_components:
            return Ideal(R)
        out = self.target_components[0].to_ring(R)
        for J in self.target_components[1:]:
            out = intersect(out, J.to_ring(R))
        return out

    def restrict(self, sources: Iterable[Ideal], irreducible: bool = False) -> MapSpec:
        return replace(self, sources=tuple(sources), sources_irreducible=irreducible)

    def with_target_equations(self) -> MapSpec:
        """Add the equations of the target to every source ideal."""
        if not self.target_components:
            return self
        eqs = [g.to_ring(self.ring) for g in self.target_ideal().gens]
        return replace(self, sources=tuple(P + eqs for P in self.sources))


def _copy_names(m: MapSpec, i: int) -> list[dict[str, str]]:
    taken = set(m.ring.names)
    out = [{n: n for n in m.fibre_vars}]
    for c in range(2, i + 1):
        ren = {}
        for n in m.fibre_vars:
            cand = n + "'" * (c - 1)
            if cand in taken:
                cand = f"{n}_{c}"
                while cand in taken:
                    cand += "_"
            taken.add(cand)
            ren[n] = cand
        out.append(ren)
    return out


def _rename(p: Poly, ren: dict[str, str], ring: Ring) -> Poly:
    pos = [ring.index(ren.get(n, n)) for n in p.ring.names]
    d = {}
    for mono, c in p.terms:
        new = [0] * ring.nvars
        for k, e in enumerate(mono):
            if e:
                new[pos[k]] = e
        d[tuple(new)] = c
    return Poly.from_dict(ring, d)


def _diagonal_hints(m: MapSpec, copies: list[dict[str, str]], ring: Ring) -> list[Poly]:
    """Equations of the pairwise diagonals, which are often components of a fibred power."""
    in_block = {v for b in m.projective_blocks for v in b}
    out = []
    for ra, rb in itertools.combinations(copies, 2):
        for v in m.fibre_vars:
            if v not in in_block:
                out.append(ring.var(ra[v]) - ring.var(rb[v]))
        for lam, mu in m.projective_blocks:
            out.append(
                ring.var(ra[lam]) * ring.var(rb[mu]) - ring.var(ra[mu]) * ring.var(rb[lam])
            )
    return out


def fibred_power(m: MapSpec, i: int, up_to_symmetry: bool = False) -> MapSpec:
    """The ``i``-fold fibre product of ``X`` with itself over the target.

    Copy 1 keeps the fibre names, copy ``c`` gets ``c - 1`` primes.  With a
    list of source pieces the result has one piece per ordered choice of
    pieces (per multiset with ``up_to_symmetry``).  Products of disjoint
    pieces stay disjoint; products of overlapping ones overlap.
    """
    if i < 1:
        raise ValueError("fibred power needs i >= 1")
    copies = _copy_names(m, i)
    names = list(m.target_vars)
    for ren in copies:
        names.extend(ren[n] for n in m.fibre_vars)
    ring = Ring(tuple(names), m.ring.modulus)

    def lift(P: Ideal, ren):
        return [_rename(g, ren, ring) for g in P.gens]

    if up_to_symmetry:
        choices = itertools.combinations_with_replacement(range(len(m.sources)), i)
    else:
        choices = itertools.product(range(len(m.sources)), repeat=i)
    sources = []
    for choice in choices:
        gens = []
        for ren, k in zip(copies, choice):
            gens.extend(lift(m.sources[k], ren))
        sources.append(Ideal(ring, gens))
    blocks = tuple((ren[a], ren[b]) for ren in copies for a, b in m.projective_blocks)
    hints = [_rename(h, ren, ring) for ren in copies for h in m.hints]
    hints += _diagonal_hints(m, copies, ring)
    return replace(
        m,
        ring=ring,
        sources=tuple(sources),
        projective_blocks=blocks,
        sources_irreducible=(i == 1 and m.sources_irreducible),
        hints=tuple(dict.fromkeys(hints)),
        copies=i,
        symmetric=len(m.sources) == 1 or up_to_symmetry,
        chart="",
    )


def _dehomogenize(m: MapSpec, ones: dict[str, int], zeros: Sequence[str] = ()) -> MapSpec:
    drop = set(ones) | set(zeros)
    ring = Ring(tuple(n for n in m.ring.names if n not in drop), m.ring.modulus)
    values = {**ones, **{z: 0 for z in zeros}}

    def dehom(p: Poly) -> Poly:
        return p.subs(values).to_ring(ring)

    sources = tuple(Ideal(ring, [dehom(g) for g in P.gens]) for P in m.sources)
    hints = tuple(h for h in (dehom(h) for h in m.hints) if not h.is_constant())
    label = ",".join([f"{v}=1" for v in ones] + [f"{z}=0" for z in zeros])
    return replace(
        m, ring=ring, sources=sources, projective_blocks=(), hints=hints, chart=label
    )


def _check_homogeneous(m: MapSpec):
    for P in m.sources:
        for g in P.gens:
            for blk in m.projective_blocks:
                used = set(g.variables()) & set(blk)
                if used and not g.is_homogeneous_in(blk):
                    raise ValueError(f"generator {g} is not homogeneous in block {blk}")


def chart_expand(m: MapSpec, up_to_symmetry: bool = False) -> list[MapSpec]:
    """Affine charts: one per choice of a variable set to 1 in each P^1 block.

    The first chart of a block ``(lam, mu)`` sets ``mu = 1``.  With
    ``up_to_symmetry`` on a symmetric fibred power, chart choices that only
    permute the copies are listed once.
    """
    if not m.projective_blocks:
        return [m]
    _check_homogeneous(m)
    blocks = m.projective_blocks
    per_copy = len(blocks) // max(m.copies, 1)
    out = []
    for choice in itertools.product((1, 0), repeat=len(blocks)):
        if up_to_symmetry and m.symmetric and m.copies > 1 and per_copy:
            runs = [choice[c * per_copy : (c + 1) * per_copy] for c in range(m.copies)]
            if any(a < b for a, b in zip(runs, runs[1:])):
                continue
        ones = {blk[k]: 1 for blk, k in zip(blocks, choice)}
        out.append(_dehomogenize(m, ones))
    return out


def chart_cells(m: MapSpec) -> list[MapSpec]:
    """Disjoint affine cells covering ``X``: per block either ``mu = 1`` or ``lam = 1, mu = 0``."""
    if not m.projective_blocks:
        return [m]
    _check_homogeneous(m)
    out = []
    for choice in itertools.product((1, 0), repeat=len(m.projective_blocks)):
        ones, zeros = {}, []
        for (lam, mu), k in zip(m.projective_blocks, choice):
            if k:
                ones[mu] = 1
            else:
                ones[lam] = 1
                zeros.append(mu)
        out.append(_dehomogenize(m, ones, zeros))
    return out


# ---------------------------------------------------------------------------
# fibre-dimension jump loci
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpLocus:
    ideal: Ideal
    k: int
    seed: int | tuple[int, ...]
    slices: int
    stabilized: bool


def _slice_image(P: Ideal, target: Sequence[str], fibre: Sequence[str], rows) -> Ideal:
    """Image in the target of ``V(P)`` cut by the affine forms ``rows`` in the fibre variables."""
    from gmpy2 import mpq

    ring = P.ring
    n = len(fibre)
    T = ring.subring(target)
    A = [[mpq(int(v)) for v in row] for row in rows]  # row: a_1..a_n, b
    # reduced row echelon form of [A | b]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((k for k in range(r, len(A)) if A[k][col] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][col]
        A[r] = [v * inv for v in A[r]]
        for k in range(len(A)):
            if k != r and A[k][col] != 0:
                f = A[k][col]
                A[k] = [a - f * b for a, b in zip(A[k], A[r])]
        pivots.append(col)
        r += 1
    for k in range(r, len(A)):
        if A[k][n] != 0:
            return Ideal(T, [T.one()])
    values = {}
    for k, col in enumerate(pivots):
        expr = ring.const(-A[k][n])
        for j in range(n):
            if j != col and A[k][j] != 0:
                expr = expr - ring.var(fibre[j]).scale(A[k][j])
        values[fibre[col]] = expr
    cut = Ideal(ring, [g.subs(values) for g in P.gens])
    return image_closure(cut, target).to_ring(T)


def jump_locus(
    m: MapSpec,
    k: int,
    seed: int | Sequence[int] = 0,
    bound: int = 1000,
    reps: int = 3,
) -> JumpLocus:
    """Closure of ``{y : dim f^-1(y) >= k}`` by random affine slicing.

    Each slice is ``k`` affine forms in the fibre variables with integer
    coefficients in ``[-bound, bound]``; images of slices are intersected.
    After ``reps`` slices, further slices are drawn until one no longer
    shrinks the locus (capped at ``reps + #target + 2``).
    """
    if k < 1:
        raise ValueError("k must be positive")
    if m.projective_blocks:
        raise ValueError("jump loci need an affine chart")
    T = m.target_ring
    fibre = m.fibre_vars
    cap = reps + len(m.target_vars) + 2
    total = None
    slices_used = 0
    stable = True
    base = [seed] if isinstance(seed, int) else list(seed)
    for pidx, P in enumerate(m.sources):
        rng = np.random.default_rng(base + [k, pidx])
        J = None
        stable_p = False
        for rep in range(cap):
            rows = rng.integers(-bound, bound + 1, size=(k, len(fibre) + 1)).tolist()
            S = _slice_image(P, m.target_vars, fibre, rows)
            slices_used += 1
            if J is None:
                J = S
            elif rep >= reps and variety_contains(S, J):
                stable_p = True
                break
            else:
                J = J + S
            if J.is_unit():
                stable_p = True
                break
        stable = stable and stable_p
        J = Ideal(T, buchberger(J))
        total = J if total is None else intersect(total, J)
    if total is None:
        total = Ideal(T, [T.one()])
    seed_out = seed if isinstance(seed, int) else tuple(seed)
    return JumpLocus(Ideal(T, buchberger(total)), k, seed_out, slices_used, stable)


def fibre_jump_locus(m: MapSpec, k: int, seed: int = 0, bound: int = 1000, reps: int = 3) -> Ideal:
    return jump_locus(m, k, seed, bound, reps).ideal


# ---------------------------------------------------------------------------
# finite-field point counts
# ---------------------------------------------------------------------------

_CHUNK = 1 << 20


def ff_count(ideal: Ideal, q: int) -> int:
    """Number of points of V(ideal) over F_q, by exhaustive evaluation."""
    ring = ideal.ring
    n = ring.nvars
    if q**n > 10**8:
        raise ValueError(f"search space {q}^{n} exceeds 10^8")
    polys = []
    for g in ideal.gens:
        terms = []
        for mono, c in g.terms:
            den = int(c.denominator) % q
            if den == 0:
                raise ZeroDivisionError(f"denominator of {g} not invertible mod {q}")
            terms.append((mono, int(c.numerator) * pow(den, -1, q) % q))
        polys.append(terms)
    if not polys:
        return q**n
    inner = 0
    while inner < n and q ** (inner + 1) <= _CHUNK:
        inner += 1
    outer = n - inner
    grid = np.indices((q,) * inner).reshape(inner, -1).astype(np.int64) if inner else np.zeros((0, 1), np.int64)
    size = grid.shape[1]
    total = 0
    for head in itertools.product(range(q), repeat=outer):
        alive = np.ones(size, dtype=bool)
        for terms in polys:
            acc = np.zeros(size, dtype=np.int64)
            for mono, c in terms:
                cval = c
                for e, v in zip(mono[:outer], head):
                    if e:
                        cval = cval * pow(v, e, q) % q
                if cval == 0:
                    continue
                val = np.full(size, cval, dtype=np.int64)
                for j, e in enumerate(mono[outer:]):
                    if e:
                        val = val * (np.power(grid[j], e) % q if e < 20 else _powmod(grid[j], e, q)) % q
                acc = (acc + val) % q
            alive &= acc == 0
            if not alive.any():
                break
        total += int(alive.sum())
    return total


def _powmod(a: np.ndarray, e: int, q: int) -> np.ndarray:
    out = np.ones_like(a)
    base = a % q
    while e:
        if e & 1:
            out = out * base % q
        base = base * base % q
        e >>= 1
    return out


def ff_dim_estimate(ideal: Ideal, primes: Sequence[int] = (3, 5, 7)) -> tuple[int, list[int]]:
    """Dimension guess from point counts: rounded slope of log(count) against log(q)."""
    counts = [ff_count(ideal, q) for q in primes]
    pts = [(math.log(q), math.log(c)) for q, c in zip(primes, counts) if c > 0]
    if not pts:
        return -1, counts
    if len(pts) == 1:
        lq, lc = pts[0]
        return round(lc / lq), counts
    slope = np.polyfit([p[0] for p in pts], [p[1] for p in pts], 1)[0]
    return round(float(slope)), counts
