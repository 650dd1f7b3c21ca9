"""Buchberger's algorithm and the ideal toolkit built on it.

Inside the engine a polynomial is a ``dict`` from exponent tuples to
coefficients; basis elements are kept monic as descending term lists.
Every reduction step is charged to the active :func:`step_budget`.
"""

from __future__ import annotations

import contextlib
import contextvars
import heapq
import itertools
from collections import OrderedDict
from operator import add, le, sub
from typing import Iterable, Sequence

from .polycore import GREVLEX, MonomialOrder, Poly, Ring, RingMismatch, block_order

DEFAULT_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    """Raised when the reduction-step budget runs out."""


class _Budget:
    __slots__ = ("limit", "used")

    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def charge(self, n: int = 1):
        self.used += n
        if self.used > self.limit:
            raise BudgetExceeded(f"reduction step budget of {self.limit} exhausted")


_budget: contextvars.ContextVar[_Budget] = contextvars.ContextVar("_budget")


@contextlib.contextmanager
def step_budget(limit: int = DEFAULT_BUDGET):
    """Run the enclosed block under a fresh reduction-step budget."""
    token = _budget.set(_Budget(limit))
    try:
        yield _budget.get()
    finally:
        _budget.reset(token)


def _current_budget() -> _Budget:
    b = _budget.get(None)
    if b is None:
        b = _Budget(DEFAULT_BUDGET)
        _budget.set(b)
    return b


# ---------------------------------------------------------------------------
# low-level engine
# ---------------------------------------------------------------------------


def _divides(a, b) -> bool:
    return all(map(le, a, b))


def _lcm(a, b):
    return tuple(map(max, a, b))


def _coprime(a, b) -> bool:
    return not any(x and y for x, y in zip(a, b))


class _Engine:
    """Reduction machinery for one (ring, order) pair."""

    def __init__(self, order: MonomialOrder):
        self.order = order
        self._neg: dict = {}
        self._key: dict = {}
        self.budget = _current_budget()

    def negkey(self, m):
        k = self._neg.get(m)
        if k is None:
            k = self._neg[m] = self.order.negkey(m)
        return k

    def key(self, m):
        k = self._key.get(m)
        if k is None:
            k = self._key[m] = self.order.key(m)
        return k

    def sort_terms(self, d: dict) -> list:
        return sorted(d.items(), key=lambda t: self.key(t[0]), reverse=True)

    def reduce(self, f: dict, basis: Sequence[list], full: bool = True) -> list:
        """Normal form of ``f`` modulo monic, sorted ``basis`` elements.

        Returns a descending term list.  With ``full=False`` only the leading
        term is reduced (the remainder's tail is left untouched).
        """
        negkey = self.negkey
        heap = [(negkey(m), m) for m in f]
        heapq.heapify(heap)
        rem = []
        lms = [g[0][0] for g in basis]
        steps = 0
        while heap:
            _, m = heapq.heappop(heap)
            c = f.pop(m, None)
            if c is None or c == 0:
                continue
            for lm, g in zip(lms, basis):
                if _divides(lm, m):
                    q = tuple(map(sub, m, lm))
                    for mg, cg in g[1:]:
                        mm = tuple(map(add, mg, q))
                        old = f.get(mm)
                        if old is None:
                            f[mm] = -c * cg
                            heapq.heappush(heap, (negkey(mm), mm))
                        else:
                            new = old - c * cg
                            if new == 0:
                                del f[mm]
                            else:
                                f[mm] = new
                    steps += 1
                    break
            else:
                rem.append((m, c))
                if not full:
                    # leading term is irreducible: keep the rest as is
                    rest = [(mm, cc) for mm, cc in f.items() if cc != 0]
                    rem.extend(sorted(rest, key=lambda t: self.key(t[0]), reverse=True))
                    break
        self.budget.charge(steps + 1)
        return rem

    @staticmethod
    def monic(terms: list) -> list:
        lc = terms[0][1]
        if lc == 1:
            return terms
        inv = 1 / lc
        return [(m, c * inv) for m, c in terms]

    def spoly(self, f: list, g: list) -> dict:
        lm = _lcm(f[0][0], g[0][0])
        qf = tuple(map(sub, lm, f[0][0]))
        qg = tuple(map(sub, lm, g[0][0]))
        d: dict = {}
        for m, c in f[1:]:
            d[tuple(map(add, m, qf))] = c
        for m, c in g[1:]:
            mm = tuple(map(add, m, qg))
            v = d.get(mm, 0) - c
            if v == 0:
                d.pop(mm, None)
            else:
                d[mm] = v
        return d

    def buchberger(self, polys: Iterable[dict]) -> list[list]:
        basis: list[list] = []
        for p in polys:
            if p:
                basis.append(self.monic(self.sort_terms(p)))
        if not basis:
            return []
        # insert in increasing leading-monomial order, as is customary
        basis.sort(key=lambda g: self.key(g[0][0]))
        G: list[int] = []
        B: list[tuple[int, int]] = []
        elems: list[list] = []

        for g in basis:
            r = self.reduce(dict(g), [elems[i] for i in G])
            if not r:
                continue
            if not any(r[0][0]):
                return [[(r[0][0], r[0][1] / r[0][1])]]
            elems.append(self.monic(r))
            G, B = self._update(G, B, len(elems) - 1, elems)

        def pair_key(pair):
            lm = _lcm(elems[pair[0]][0][0], elems[pair[1]][0][0])
            return (sum(lm), self.key(lm))

        while B:
            best = min(range(len(B)), key=lambda k: pair_key(B[k]))
            i, j = B.pop(best)
            s = self.spoly(elems[i], elems[j])
            if not s:
                continue
            r = self.reduce(s, [elems[k] for k in G])
            if not r:
                continue
            if not any(r[0][0]):
                return [[(r[0][0], r[0][1] / r[0][1])]]
            elems.append(self.monic(r))
            G, B = self._update(G, B, len(elems) - 1, elems)

        return self._reduce_basis([elems[k] for k in G])

    @staticmethod
    def _update(G, B, h, elems):
        # Gebauer-Moeller installation of the coprime and chain criteria
        lm = lambda k: elems[k][0][0]  # noqa: E731
        lmh = lm(h)
        C = [(h, g) for g in G]
        D = []
        while C:
            pair = C.pop(0)
            lcm1 = _lcm(lmh, lm(pair[1]))
            if _coprime(lmh, lm(pair[1])) or not any(
                _divides(_lcm(lmh, lm(q[1])), lcm1) for q in itertools.chain(C, D)
            ):
                D.append(pair)
        E = [p for p in D if not _coprime(lmh, lm(p[1]))]
        B_new = []
        for g1, g2 in B:
            l12 = _lcm(lm(g1), lm(g2))
            if (
                not _divides(lmh, l12)
                or _lcm(lm(g1), lmh) == l12
                or _lcm(lm(g2), lmh) == l12
            ):
                B_new.append((g1, g2))
        B_new.extend(E)
        G_new = [g for g in G if not _divides(lmh, lm(g))]
        G_new.append(h)
        return G_new, B_new

    def _reduce_basis(self, G: list[list]) -> list[list]:
        G = sorted(G, key=lambda g: self.key(g[0][0]))
        minimal = []
        for k, g in enumerate(G):
            if not any(_divides(h[0][0], g[0][0]) for h in G[:k]) and not any(
                _divides(h[0][0], g[0][0]) and h[0][0] != g[0][0] for h in G[k + 1 :]
            ):
                minimal.append(g)
        # drop duplicates of equal leading monomials
        seen = set()
        uniq = []
        for g in minimal:
            if g[0][0] not in seen:
                seen.add(g[0][0])
                uniq.append(g)
        out = []
        for k, g in enumerate(uniq):
            others = uniq[:k] + uniq[k + 1 :]
            tail = self.reduce(dict(g[1:]), others)
            out.append([g[0]] + tail)
        out.sort(key=lambda g: self.key(g[0][0]), reverse=True)
        return out


# ---------------------------------------------------------------------------
# caching of reduced bases
# ---------------------------------------------------------------------------

_CACHE: OrderedDict = OrderedDict()
_CACHE_SIZE = 8192


def _cache_get(key):
    hit = _CACHE.get(key)
    if hit is not None:
        _CACHE.move_to_end(key)
    return hit


def _cache_put(key, value):
    _CACHE[key] = value
    if len(_CACHE) > _CACHE_SIZE:
        _CACHE.popitem(last=False)


def clear_cache():
    _CACHE.clear()


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


class Ideal:
    """Finitely generated ideal; zero generators are dropped, duplicates merged."""

    __slots__ = ("ring", "gens", "_hash")

    def __init__(self, ring: Ring, gens: Iterable[Poly] = ()):
        seen = []
        index = set()
        for g in gens:
            if not isinstance(g, Poly):
                g = ring.const(g)
            if g.ring != ring:
                raise RingMismatch(f"generator in {g.ring}, ideal in {ring}")
            if g.is_zero():
                continue
            g = g.monic()
            if g not in index:
                index.add(g)
                seen.append(g)
        self.ring = ring
        self.gens = tuple(seen)
        self._hash = None

    @classmethod
    def parse(cls, ring: Ring, texts: Iterable[str]) -> Ideal:
        return cls(ring, [ring.parse(t) for t in texts])

    def groebner(self, order: MonomialOrder | None = None) -> tuple[Poly, ...]:
        return buchberger(self, order)

    def __add__(self, other: Ideal | Iterable[Poly]) -> Ideal:
        gens = other.gens if isinstance(other, Ideal) else tuple(other)
        return Ideal(self.ring, self.gens + gens)

    def __contains__(self, p: Poly) -> bool:
        return member(p, self)

    def is_unit(self) -> bool:
        gb = self.groebner()
        return len(gb) == 1 and gb[0].is_constant()

    def is_zero(self) -> bool:
        return not self.gens

    def to_ring(self, ring: Ring) -> Ideal:
        return Ideal(ring, [g.to_ring(ring) for g in self.gens])

    def canonical(self) -> Ideal:
        """The ideal generated by its reduced grevlex basis."""
        return Ideal(self.ring, self.groebner())

    def __eq__(self, other):
        return isinstance(other, Ideal) and self.ring == other.ring and self.gens == other.gens

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, self.gens))
        return self._hash

    def __str__(self):
        if not self.gens:
            return "<0>"
        return "<" + ", ".join(str(g) for g in self.gens) + ">"

    def __repr__(self):
        return f"Ideal({str(self)}, {self.ring})"


def _to_dict(p: Poly) -> dict:
    return dict(p.terms)


def _from_terms(ring: Ring, terms: list) -> Poly:
    return Poly.from_dict(ring, dict(terms))


def normal_form(p: Poly, basis: Sequence[Poly], order: MonomialOrder | None = None) -> Poly:
    """Remainder of multivariate division of ``p`` by ``basis`` (taken in the given order)."""
    order = order or GREVLEX
    for g in basis:
        if g.ring != p.ring:
            raise RingMismatch(f"{g.ring} vs {p.ring}")
        if g.is_zero():
            raise ValueError("zero polynomial in division basis")
    eng = _Engine(order)
    monic = [eng.monic(eng.sort_terms(_to_dict(g))) for g in basis]
    return _from_terms(p.ring, eng.reduce(_to_dict(p), monic))


def buchberger(ideal: Ideal, order: MonomialOrder | None = None) -> tuple[Poly, ...]:
    """Reduced Groebner basis of ``ideal``; cached per (ideal, order)."""
    order = order or GREVLEX
    ring = ideal.ring
    key = (ring.names, ring.modulus, ideal.gens, order)
    hit = _cache_get(key)
    if hit is not None:
        return hit
    eng = _Engine(order)
    basis = eng.buchberger(_to_dict(g) for g in ideal.gens)
    result = tuple(_from_terms(ring, g) for g in basis)
    _cache_put(key, result)
    return result


def _basis_terms(ideal: Ideal, order: MonomialOrder, eng: _Engine) -> list[list]:
    return [eng.sort_terms(_to_dict(g)) for g in buchberger(ideal, order)]


def member(p: Poly, ideal: Ideal, order: MonomialOrder | None = None) -> bool:
    if p.ring != ideal.ring:
        raise RingMismatch(f"{p.ring} vs {ideal.ring}")
    if p.is_zero():
        return True
    order = order or GREVLEX
    eng = _Engine(order)
    return not eng.reduce(_to_dict(p), _basis_terms(ideal, order, eng))


def contains_ideal(big: Ideal, small: Ideal) -> bool:
    """``small`` is a subset of ``big``."""
    return all(member(g, big) for g in small.gens)


def ideal_equal(a: Ideal, b: Ideal) -> bool:
    return contains_ideal(a, b) and contains_ideal(b, a)


def fresh_name(ring: Ring, stem: str) -> str:
    if stem not in ring.names:
        return stem
    for k in itertools.count(1):
        cand = f"{stem}{k}"
        if cand not in ring.names:
            return cand
    raise AssertionError  # pragma: no cover


def eliminate(ideal: Ideal, drop: Iterable[str]) -> Ideal:
    """Elimination ideal ``ideal`` intersected with the subring free of ``drop``."""
    ring = ideal.ring
    drop = set(drop)
    for n in drop:
        ring.index(n)
    keep = [n for n in ring.names if n not in drop]
    sub_ring = ring.subring(keep)
    if not drop:
        return Ideal(sub_ring, buchberger(ideal))
    order = block_order(ring, drop)
    gb = buchberger(ideal, order)
    idx = [ring.index(n) for n in drop]
    out = []
    for g in gb:
        if all(not m[i] for m, _ in g.terms for i in idx):
            out.append(g.to_ring(sub_ring))
    return Ideal(sub_ring, out)


def saturate(ideal: Ideal, g: Poly) -> Ideal:
    """``(ideal : g^inf)`` via the Rabinowitsch variable."""
    if g.is_zero():
        raise ValueError("cannot saturate by zero")
    ring = ideal.ring
    if g.is_constant():
        return Ideal(ring, buchberger(ideal))
    t = fresh_name(ring, "t")
    big = ring.extend([t], front=True)
    tt = big.var(t)
    gens = [h.to_ring(big) for h in ideal.gens] + [tt * g.to_ring(big) - 1]
    return eliminate(Ideal(big, gens), [t]).to_ring(ring)


def intersect(a: Ideal, b: Ideal) -> Ideal:
    """``a`` intersected with ``b`` via ``t*a + (1 - t)*b``."""
    if a.ring != b.ring:
        raise RingMismatch(f"{a.ring} vs {b.ring}")
    ring = a.ring
    if a.is_zero() or b.is_zero():
        return Ideal(ring)
    t = fresh_name(ring, "t")
    big = ring.extend([t], front=True)
    tt = big.var(t)
    gens = [tt * h.to_ring(big) for h in a.gens] + [(1 - tt) * h.to_ring(big) for h in b.gens]
    return eliminate(Ideal(big, gens), [t]).to_ring(ring)


def radical_member(p: Poly, ideal: Ideal) -> bool:
    """Whether ``p`` vanishes on V(ideal) (Rabinowitsch trick)."""
    if p.ring != ideal.ring:
        raise RingMismatch(f"{p.ring} vs {ideal.ring}")
    if member(p, ideal):
        return True
    ring = ideal.ring
    t = fresh_name(ring, "t")
    big = ring.extend([t], front=True)
    gens = [h.to_ring(big) for h in ideal.gens] + [1 - big.var(t) * p.to_ring(big)]
    return Ideal(big, gens).is_unit()


def variety_contains(outer: Ideal, inner: Ideal) -> bool:
    """V(inner) is a subset of V(outer), certified by radical membership."""
    return all(radical_member(g, inner) for g in outer.gens)


def s_polynomial_check(basis: Sequence[Poly], order: MonomialOrder | None = None) -> bool:
    """Post-hoc Buchberger criterion: every S-polynomial reduces to zero."""
    order = order or GREVLEX
    eng = _Engine(order)
    terms = [eng.monic(eng.sort_terms(_to_dict(g))) for g in basis]
    for f, g in itertools.combinations(terms, 2):
        s = eng.spoly(f, g)
        if s and eng.reduce(s, terms):
            return False
    return True


def is_reduced(basis: Sequence[Poly], order: MonomialOrder | None = None) -> bool:
    order = order or GREVLEX
    eng = _Engine(order)
    terms = [eng.sort_terms(_to_dict(g)) for g in basis]
    for k, g in enumerate(terms):
        if g[0][1] != 1:
            return False
        for h in terms[:k] + terms[k + 1 :]:
            if any(_divides(h[0][0], m) for m, _ in g):
                return False
    return True
