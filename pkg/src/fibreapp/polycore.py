"""Exact sparse multivariate polynomials.

Coefficients live in Q (``gmpy2.mpq``) or in a prime field F_q.  A
:class:`Ring` fixes the ordered variable list, the coefficient domain and a
default monomial order; a :class:`Poly` is an immutable, canonical term list
in that ring.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from gmpy2 import mpq

Monomial = tuple[int, ...]

__all__ = [
    "GF",
    "GRevLex",
    "Lex",
    "BlockOrder",
    "MonomialOrder",
    "ParseError",
    "Poly",
    "QQ",
    "PrimeField",
    "Rationals",
    "Ring",
    "RingMismatch",
    "block_order",
    "monomial_compare",
    "parse_poly",
    "poly_arith",
]


class ParseError(ValueError):
    pass


class RingMismatch(ValueError):
    pass


# ---------------------------------------------------------------------------
# coefficient domains
# ---------------------------------------------------------------------------


class GF:
    """Element of the prime field F_q, always stored reduced to [0, q)."""

    __slots__ = ("v", "q")

    def __init__(self, v: int, q: int):
        self.v = v % q
        self.q = q

    def _coerce(self, other) -> int:
        if isinstance(other, GF):
            if other.q != self.q:
                raise RingMismatch(f"F_{self.q} vs F_{other.q}")
            return other.v
        if isinstance(other, int):
            return other
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else GF(self.v + o, self.q)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else GF(self.v - o, self.q)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else GF(o - self.v, self.q)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else GF(self.v * o, self.q)

    __rmul__ = __mul__

    def __neg__(self):
        return GF(-self.v, self.q)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o % self.q == 0:
            raise ZeroDivisionError("division by zero in F_%d" % self.q)
        return GF(self.v * pow(o, -1, self.q), self.q)

    def __rtruediv__(self, other):
        return GF(other, self.q) / self

    def __pow__(self, n: int):
        return GF(pow(self.v, n, self.q), self.q)

    def __eq__(self, other):
        if isinstance(other, GF):
            return self.q == other.q and self.v == other.v
        if isinstance(other, int):
            return (self.v - other) % self.q == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.v, self.q))

    def __bool__(self):
        return self.v != 0

    def __int__(self):
        return self.v

    def __repr__(self):
        return f"GF({self.v}, {self.q})"

    def __str__(self):
        return str(self.v)


class Rationals:
    name = "QQ"
    modulus = None

    def __call__(self, x) -> mpq:
        return mpq(x)

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


class PrimeField:
    def __init__(self, q: int):
        if q < 2 or q >= 2**31:
            raise ValueError("prime modulus must satisfy 2 <= q < 2^31")
        if any(q % p == 0 for p in range(2, int(q**0.5) + 1)):
            raise ValueError(f"{q} is not prime")
        self.modulus = q
        self.name = f"GF({q})"

    def __call__(self, x) -> GF:
        if isinstance(x, GF):
            if x.q != self.modulus:
                raise RingMismatch(f"F_{x.q} vs F_{self.modulus}")
            return x
        x = mpq(x)
        den = int(x.denominator) % self.modulus
        if den == 0:
            raise ZeroDivisionError(f"denominator not invertible mod {self.modulus}")
        return GF(int(x.numerator) * pow(den, -1, self.modulus), self.modulus)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.modulus == self.modulus

    def __hash__(self):
        return hash(("GF", self.modulus))

    def __repr__(self):
        return self.name


QQ = Rationals()


# ---------------------------------------------------------------------------
# monomial orders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lex:
    def key(self, m: Monomial):
        return m

    def negkey(self, m: Monomial):
        return tuple(-e for e in m)

    def __str__(self):
        return "lex"


@dataclass(frozen=True)
class GRevLex:
    def key(self, m: Monomial):
        return (sum(m), tuple(-e for e in reversed(m)))

    def negkey(self, m: Monomial):
        return (-sum(m), m[::-1])

    def __str__(self):
        return "grevlex"


@dataclass(frozen=True)
class BlockOrder:
    """Elimination order: compare the ``front`` variables first, then ``back``.

    ``front`` and ``back`` are disjoint index tuples covering the ring; each
    block is compared with its own inner order (grevlex unless given).
    """

    front: tuple[int, ...]
    back: tuple[int, ...]
    inner_front: Union[Lex, GRevLex] = GRevLex()
    inner_back: Union[Lex, GRevLex] = GRevLex()

    def key(self, m: Monomial):
        a = tuple(m[i] for i in self.front)
        b = tuple(m[i] for i in self.back)
        return (self.inner_front.key(a), self.inner_back.key(b))

    def negkey(self, m: Monomial):
        a = tuple(m[i] for i in self.front)
        b = tuple(m[i] for i in self.back)
        return (self.inner_front.negkey(a), self.inner_back.negkey(b))

    def __str__(self):
        return f"block({self.front}|{self.back})"


MonomialOrder = Union[Lex, GRevLex, BlockOrder]
GREVLEX = GRevLex()
LEX = Lex()


def monomial_compare(m1: Monomial, m2: Monomial, order: MonomialOrder) -> int:
    """Return -1, 0 or 1 as ``m1`` is less than, equal to or greater than ``m2``."""
    if len(m1) != len(m2):
        raise ValueError("monomials of different length")
    k1, k2 = order.key(m1), order.key(m2)
    return (k1 > k2) - (k1 < k2)


# ---------------------------------------------------------------------------
# rings
# ---------------------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_']*\Z")


@dataclass(frozen=True)
class Ring:
    names: tuple[str, ...]
    modulus: int | None = None
    order: MonomialOrder = field(default=GREVLEX)

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        for n in self.names:
            if not _IDENT.match(n):
                raise ValueError(f"bad variable name {n!r}")

    @property
    def field(self):
        return QQ if self.modulus is None else PrimeField(self.modulus)

    @property
    def nvars(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def coeff(self, c):
        if self.modulus is None:
            return mpq(c)
        return PrimeField(self.modulus)(c)

    def zero(self) -> Poly:
        return Poly(self, ())

    def one(self) -> Poly:
        return self.const(1)

    def const(self, c) -> Poly:
        c = self.coeff(c)
        return Poly(self, (((0,) * self.nvars, c),) if c != 0 else ())

    def var(self, name: str) -> Poly:
        m = [0] * self.nvars
        m[self.index(name)] = 1
        return Poly(self, ((tuple(m), self.coeff(1)),))

    def gens(self) -> tuple[Poly, ...]:
        return tuple(self.var(n) for n in self.names)

    def parse(self, text: str) -> Poly:
        return parse_poly(text, self)

    def extend(self, names: Iterable[str], front: bool = False) -> Ring:
        extra = tuple(names)
        new = extra + self.names if front else self.names + extra
        return Ring(new, self.modulus, GREVLEX)

    def subring(self, names: Iterable[str]) -> Ring:
        keep = set(names)
        return Ring(tuple(n for n in self.names if n in keep), self.modulus, GREVLEX)

    def with_modulus(self, q: int | None) -> Ring:
        return Ring(self.names, q, self.order)

    def with_order(self, order: MonomialOrder) -> Ring:
        return Ring(self.names, self.modulus, order)

    def __str__(self):
        dom = "QQ" if self.modulus is None else f"GF({self.modulus})"
        return f"{dom}[{', '.join(self.names)}]"


def block_order(ring: Ring, front_names: Iterable[str]) -> BlockOrder:
    front = {ring.index(n) for n in front_names}
    return BlockOrder(
        tuple(i for i in range(ring.nvars) if i in front),
        tuple(i for i in range(ring.nvars) if i not in front),
    )


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


def _mono_str(names: Sequence[str], m: Monomial) -> str:
    parts = []
    for n, e in zip(names, m):
        if e == 1:
            parts.append(n)
        elif e > 1:
            parts.append(f"{n}^{e}")
    return "*".join(parts)


class Poly:
    """Immutable polynomial; ``terms`` is strictly descending in the ring order."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: Ring, terms: tuple):
        self.ring = ring
        self.terms = terms
        self._hash = None

    @classmethod
    def from_dict(cls, ring: Ring, d: Mapping[Monomial, object]) -> Poly:
        key = ring.order.key
        items = [(m, c) for m, c in d.items() if c != 0]
        items.sort(key=lambda t: key(t[0]), reverse=True)
        return cls(ring, tuple(items))

    def as_dict(self) -> dict:
        return dict(self.terms)

    # -- predicates / accessors
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(self.terms[0][0]))

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def leading_term(self, order: MonomialOrder | None = None):
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        if order is None or order == self.ring.order:
            return self.terms[0]
        return max(self.terms, key=lambda t: order.key(t[0]))

    def total_degree(self) -> int:
        return max((sum(m) for m, _ in self.terms), default=-1)

    def degree(self, name: str) -> int:
        i = self.ring.index(name)
        return max((m[i] for m, _ in self.terms), default=-1)

    def variables(self) -> tuple[str, ...]:
        used = [False] * self.ring.nvars
        for m, _ in self.terms:
            for i, e in enumerate(m):
                if e:
                    used[i] = True
        return tuple(n for n, u in zip(self.ring.names, used) if u)

    def monomial_content(self) -> Monomial:
        """Exponent-wise minimum over all terms (the largest monomial factor)."""
        if not self.terms:
            return (0,) * self.ring.nvars
        it = iter(self.terms)
        low = list(next(it)[0])
        for m, _ in it:
            low = [min(a, b) for a, b in zip(low, m)]
        return tuple(low)

    def is_homogeneous_in(self, names: Iterable[str]) -> bool:
        idx = [self.ring.index(n) for n in names]
        degs = {sum(m[i] for i in idx) for m, _ in self.terms}
        return len(degs) <= 1

    def coefficient_in(self, name: str, power: int) -> Poly:
        """Coefficient of ``name^power`` as a polynomial free of ``name``."""
        i = self.ring.index(name)
        out = {}
        for m, c in self.terms:
            if m[i] == power:
                out[m[:i] + (0,) + m[i + 1 :]] = c
        return Poly.from_dict(self.ring, out)

    # -- arithmetic
    def _check(self, other: Poly):
        if not isinstance(other, Poly):
            return self.ring.const(other)
        if other.ring != self.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")
        return other

    def __add__(self, other) -> Poly:
        other = self._check(other)
        d = dict(self.terms)
        for m, c in other.terms:
            d[m] = d[m] + c if m in d else c
        return Poly.from_dict(self.ring, d)

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly(self.ring, tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other) -> Poly:
        return self + (-self._check(other))

    def __rsub__(self, other) -> Poly:
        return self._check(other) - self

    def __mul__(self, other) -> Poly:
        other = self._check(other)
        d: dict = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = tuple(a + b for a, b in zip(m1, m2))
                c = c1 * c2
                d[m] = d[m] + c if m in d else c
        return Poly.from_dict(self.ring, d)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Poly:
        if n < 0:
            raise ValueError("negative exponent")
        result, base = self.ring.one(), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c) -> Poly:
        c = self.ring.coeff(c)
        if c == 0:
            return self.ring.zero()
        return Poly(self.ring, tuple((m, a * c) for m, a in self.terms))

    def monic(self) -> Poly:
        if not self.terms:
            return self
        return self.scale(1 / self.terms[0][1]) if self.terms[0][1] != 1 else self

    # -- structure
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, int):
            return self == self.ring.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, self.terms))
        return self._hash

    def to_ring(self, ring: Ring) -> Poly:
        """Re-express in ``ring`` (by variable name); every used variable must exist there."""
        if ring == self.ring:
            return self
        pos = []
        for i, n in enumerate(self.ring.names):
            pos.append(ring.names.index(n) if n in ring.names else None)
        d = {}
        for m, c in self.terms:
            new = [0] * ring.nvars
            for i, e in enumerate(m):
                if e:
                    if pos[i] is None:
                        raise RingMismatch(f"variable {self.ring.names[i]} not in {ring}")
                    new[pos[i]] = e
            d[tuple(new)] = ring.coeff(c) if ring.modulus != self.ring.modulus else c
        return Poly.from_dict(ring, d)

    def reduce_mod(self, q: int) -> Poly:
        """Image under Q -> F_q (denominators must be units)."""
        return Poly.from_dict(
            self.ring.with_modulus(q), {m: PrimeField(q)(c) for m, c in self.terms}
        )

    def subs(self, values: Mapping[str, object]) -> Poly:
        """Substitute polynomials or constants for variables (same ring)."""
        ring = self.ring
        repl = {}
        for name, v in values.items():
            repl[ring.index(name)] = v if isinstance(v, Poly) else ring.const(v)
        if all(r.is_constant() for r in repl.values()):
            consts = {i: (r.terms[0][1] if r.terms else ring.coeff(0)) for i, r in repl.items()}
            d: dict = {}
            for m, c in self.terms:
                for i, val in consts.items():
                    if m[i]:
                        c = c * val ** m[i]
                if c == 0:
                    continue
                mm = tuple(0 if i in consts else e for i, e in enumerate(m))
                d[mm] = d[mm] + c if mm in d else c
            return Poly.from_dict(ring, d)
        total = ring.zero()
        for m, c in self.terms:
            base = {}
            mm = list(m)
            for i, r in repl.items():
                if m[i]:
                    base[i] = r ** m[i]
                    mm[i] = 0
            term = Poly(ring, ((tuple(mm), c),))
            for b in base.values():
                term = term * b
            total = total + term
        return total

    def evaluate(self, point: Mapping[str, object]):
        """Evaluate at a full point given by variable name; returns a coefficient."""
        vals = [self.ring.coeff(point[n]) for n in self.ring.names]
        total = self.ring.coeff(0)
        for m, c in self.terms:
            for v, e in zip(vals, m):
                if e:
                    c = c * v**e
            total = total + c
        return total

    def diff(self, name: str) -> Poly:
        i = self.ring.index(name)
        d = {}
        for m, c in self.terms:
            if m[i]:
                mm = m[:i] + (m[i] - 1,) + m[i + 1 :]
                d[mm] = c * m[i]
        return Poly.from_dict(self.ring, d)

    # -- printing
    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for k, (m, c) in enumerate(self.terms):
            neg = _is_negative(c)
            a = -c if neg else c
            mono = _mono_str(self.ring.names, m)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            if k == 0:
                out.append(f"-{body}" if neg else body)
            else:
                out.append(f" - {body}" if neg else f" + {body}")
        return "".join(out)

    def __repr__(self):
        return f"Poly({str(self)!r}, {self.ring})"


def _is_negative(c) -> bool:
    if isinstance(c, GF):
        return False
    return c < 0


def poly_arith(a: Poly, b: Poly, op: str) -> Poly:
    if a.ring != b.ring:
        raise RingMismatch(f"{a.ring} vs {b.ring}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_']*)|(\^|\*|\+|-|/|\(|\)))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].strip()[:1]!r} in {text!r}")
        num, ident, op = m.groups()
        if num is not None:
            toks.append(("num", num))
        elif ident is not None:
            toks.append(("id", ident))
        else:
            toks.append(("op", op))
        pos = m.end()
    return toks


class _Parser:
    # expr   := ['+'|'-'] term (('+'|'-') term)*
    # term   := factor (('*'|'/') factor)*
    # factor := atom ['^' ['-'] num]
    # atom   := num | ident | '(' expr ')'

    def __init__(self, text: str, ring: Ring):
        self.text = text
        self.ring = ring
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            want = value or "token"
            raise ParseError(f"expected {want} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self) -> Poly:
        if not self.toks:
            raise ParseError("empty polynomial")
        p = self.expr()
        if self.i != len(self.toks):
            raise ParseError(f"trailing input {self.toks[self.i][1]!r} in {self.text!r}")
        return p

    def expr(self) -> Poly:
        sign = None
        if self.peek() in (("op", "+"), ("op", "-")):
            sign = self.take()[1]
        p = self.term()
        if sign == "-":
            p = -p
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Poly:
        p = self.factor()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            q = self.factor()
            if op == "*":
                p = p * q
            else:
                if not q.is_constant() or q.is_zero():
                    raise ParseError(f"division by a non-constant or zero in {self.text!r}")
                p = p.scale(1 / q.terms[0][1])
        return p

    def factor(self) -> Poly:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            if self.peek() == ("op", "-"):
                raise ParseError(f"negative exponent in {self.text!r}")
            kind, val = self.take()
            if kind != "num":
                raise ParseError(f"exponent must be an integer literal in {self.text!r}")
            base = base ** int(val)
        return base

    def atom(self) -> Poly:
        kind, val = self.take()
        if kind == "num":
            return self.ring.const(int(val))
        if kind == "id":
            if val not in self.ring.names:
                raise ParseError(f"unknown variable {val!r}")
            return self.ring.var(val)
        if val == "(":
            p = self.expr()
            self.take(")")
            return p
        if val == "-":
            return -self.factor()
        raise ParseError(f"unexpected {val!r} in {self.text!r}")


def parse_poly(text: str, ring: Ring) -> Poly:
    return _Parser(text, ring).parse()


def parse_factors(text: str, ring: Ring) -> list[Poly]:
    """Top-level multiplicative factors written in ``text`` (non-constant ones only).

    ``"(y1 - 1)*y2*(x + 1)^2"`` gives ``[y1 - 1, y2, x + 1]``.  A text that
    is not a product yields an empty list.
    """
    parser = _Parser(text, ring)
    factors = []
    depth = 0
    start = 0
    pieces = []
    for k, (kind, val) in enumerate(parser.toks):
        if val == "(":
            depth += 1
        elif val == ")":
            depth -= 1
        elif depth == 0 and kind == "op" and val in "+-" and k > 0:
            return []
        elif depth == 0 and kind == "op" and val == "*":
            pieces.append(parser.toks[start:k])
            start = k + 1
    pieces.append(parser.toks[start:])
    if len(pieces) < 2:
        return []
    for toks in pieces:
        sub = _Parser("", ring)
        sub.text = text
        sub.toks = toks
        if toks and toks[-2:-1] == [("op", "^")]:
            sub.toks = toks[:-2]
        p = sub.parse()
        if not p.is_constant():
            factors.append(p)
    return factors
