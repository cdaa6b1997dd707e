"""Exact multivariate Laurent polynomial arithmetic over the integers.

A Laurent polynomial is a dictionary mapping exponent tuples to nonzero
integer coefficients.  Exponents may be negative in every position, so the
representation is exact and identity testing is fully reliable.

  LaurentPoly.terms :  Dict[Tuple[int, ...], int]

Every polynomial belongs to a VarContext naming two groups of variables:
n "cluster" variables followed by m "tropical" variables.  The split only
matters to pointed_form and clear-style operations; arithmetic treats all
n+m positions alike.  The zero polynomial is the empty dict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, Mapping, Tuple

Exponent = Tuple[int, ...]


class ContextMismatch(ValueError):
    """Operands belong to different VarContexts."""


class NotDivisible(ArithmeticError):
    """exact_div found no Laurent polynomial quotient."""


class NonInvertibleImage(ValueError):
    """substitute mapped a negatively-powered variable to a non-unit."""


class NotPointed(ValueError):
    """pointed_form found no x^g * (1 + tail) decomposition."""


@dataclass(frozen=True)
class VarContext:
    """Fixed, ordered variable set: n cluster variables then m tropical ones."""

    n: int
    m: int
    names: Tuple[str, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one cluster variable")
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        if len(self.names) != self.n + self.m:
            raise ValueError("names must have length n+m")
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be unique")

    @property
    def nvars(self) -> int:
        return self.n + self.m

    def index(self, name: str) -> int:
        return self.names.index(name)


def default_context(n: int, m: int) -> VarContext:
    """Context named x1..xn, u1..um."""
    names = tuple(f"x{i+1}" for i in range(n)) + tuple(f"u{i+1}" for i in range(m))
    return VarContext(n, m, names)


def _grlex_key(e: Exponent) -> Tuple[int, Exponent]:
    return (sum(e), e)


class LaurentPoly:
    """Immutable-by-convention Laurent polynomial attached to a VarContext."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: VarContext, terms: Mapping[Exponent, int]) -> None:
        self.ctx = ctx
        self.terms: Dict[Exponent, int] = {
            e: c for e, c in terms.items() if c != 0
        }
        for e in self.terms:
            if len(e) != ctx.nvars:
                raise ValueError("exponent vector has wrong length")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(ctx: VarContext) -> "LaurentPoly":
        return LaurentPoly(ctx, {})

    @staticmethod
    def const(ctx: VarContext, c: int) -> "LaurentPoly":
        return LaurentPoly(ctx, {(0,) * ctx.nvars: c})

    @staticmethod
    def monomial(ctx: VarContext, exponents: Iterable[int], c: int = 1) -> "LaurentPoly":
        return LaurentPoly(ctx, {tuple(exponents): c})

    @staticmethod
    def var(ctx: VarContext, index: int) -> "LaurentPoly":
        e = [0] * ctx.nvars
        e[index] = 1
        return LaurentPoly(ctx, {tuple(e): 1})

    # -- basic protocol ----------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.ctx, self.canonical_key()))

    def canonical_key(self) -> Tuple[Tuple[Exponent, int], ...]:
        """Deterministic term list, graded-lex descending."""
        return tuple(
            (e, self.terms[e])
            for e in sorted(self.terms, key=_grlex_key, reverse=True)
        )

    def __iter__(self) -> Iterator[Tuple[Exponent, int]]:
        return iter(self.canonical_key())

    def _check(self, other: "LaurentPoly") -> None:
        if self.ctx != other.ctx:
            raise ContextMismatch("operands live in different variable contexts")

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(self.ctx, out)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.ctx, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        out: Dict[Exponent, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPoly(self.ctx, out)

    def scale(self, c: int) -> "LaurentPoly":
        return LaurentPoly(self.ctx, {e: c * v for e, v in self.terms.items()})

    def shift(self, exponents: Iterable[int]) -> "LaurentPoly":
        """Multiply by the monomial with the given exponent vector."""
        d = tuple(exponents)
        return LaurentPoly(
            self.ctx, {tuple(a + b for a, b in zip(e, d)): c for e, c in self.terms.items()}
        )

    def __pow__(self, k: int) -> "LaurentPoly":
        if k < 0:
            if len(self.terms) == 1:
                ((e, c),) = self.terms.items()
                if c in (1, -1):
                    coeff = c if k % 2 else 1
                    return LaurentPoly.monomial(self.ctx, tuple(k * x for x in e), coeff)
            raise NonInvertibleImage("negative power of a non-unit")
        result = LaurentPoly.const(self.ctx, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- structure helpers ---------------------------------------------------

    def min_exponents(self) -> Exponent:
        """Componentwise minimum exponent over all terms (zero poly gives 0s)."""
        if not self.terms:
            return (0,) * self.ctx.nvars
        cols = zip(*self.terms.keys())
        return tuple(min(col) for col in cols)

    def max_exponents(self) -> Exponent:
        if not self.terms:
            return (0,) * self.ctx.nvars
        cols = zip(*self.terms.keys())
        return tuple(max(col) for col in cols)

    def leading(self) -> Tuple[Exponent, int]:
        """Graded-lex leading term."""
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def coefficient_of(self, predicate: Callable[[Exponent], bool]) -> "LaurentPoly":
        return LaurentPoly(self.ctx, {e: c for e, c in self.terms.items() if predicate(e)})

    def total_degree_in(self, positions: Iterable[int], e: Exponent) -> int:
        return sum(e[i] for i in positions)

    def __repr__(self) -> str:
        return f"LaurentPoly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.canonical_key():
            factors = []
            for name, k in zip(self.ctx.names, e):
                if k == 1:
                    factors.append(name)
                elif k != 0:
                    factors.append(f"{name}^{k}")
            body = "*".join(factors)
            if not body:
                parts.append(f"{c}")
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"{c}*{body}")
        out = " + ".join(parts)
        return out.replace("+ -", "- ")


def exact_div(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """Return q with q*b == a, exactly, over integer Laurent polynomials.

    Both operands are shifted to ordinary polynomials (componentwise minimal
    exponent zero), divided by graded-lex leading-term elimination, and the
    quotient is shifted back.  Raises NotDivisible when no quotient exists.
    """
    a._check(b)
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    if not a:
        return LaurentPoly.zero(a.ctx)
    ma = a.min_exponents()
    mb = b.min_exponents()
    r = a.shift(tuple(-x for x in ma))
    bb = b.shift(tuple(-x for x in mb))
    lead_e, lead_c = bb.leading()
    quotient: Dict[Exponent, int] = {}
    while r:
        re, rc = r.leading()
        qe = tuple(x - y for x, y in zip(re, lead_e))
        if any(x < 0 for x in qe) or rc % lead_c != 0:
            raise NotDivisible("no exact Laurent quotient")
        qc = rc // lead_c
        quotient[qe] = qc
        r = r - bb.shift(qe).scale(qc)
    q = LaurentPoly(a.ctx, quotient)
    return q.shift(tuple(x - y for x, y in zip(ma, mb)))


def divides(a: LaurentPoly, b: LaurentPoly) -> bool:
    """True when b divides a exactly."""
    try:
        exact_div(a, b)
        return True
    except NotDivisible:
        return False


def substitute(p: LaurentPoly, images: Mapping[int, LaurentPoly]) -> LaurentPoly:
    """Apply the ring homomorphism sending variable i to images[i].

    Variables absent from the map are sent to themselves.  A variable that
    occurs with a negative exponent anywhere in p must map to an invertible
    monomial (single term, coefficient +-1); otherwise NonInvertibleImage.
    """
    ctx = p.ctx
    for i, img in images.items():
        if img.ctx != ctx:
            raise ContextMismatch("substitution image in a different context")
        if not (0 <= i < ctx.nvars):
            raise ValueError(f"no variable with index {i}")
    mins = p.min_exponents()
    for i, img in images.items():
        if mins[i] < 0:
            if len(img.terms) != 1 or abs(next(iter(img.terms.values()))) != 1:
                raise NonInvertibleImage(
                    f"variable {ctx.names[i]} appears with negative exponent "
                    "but its image is not an invertible monomial"
                )
    power_cache: Dict[Tuple[int, int], LaurentPoly] = {}

    def power(i: int, k: int) -> LaurentPoly:
        key = (i, k)
        if key not in power_cache:
            img = images[i]
            if k >= 0:
                power_cache[key] = img ** k
            else:
                ((e, c),) = img.terms.items()
                power_cache[key] = LaurentPoly.monomial(
                    ctx, tuple(k * x for x in e), c if k % 2 else 1
                )
        return power_cache[key]

    out = LaurentPoly.zero(ctx)
    for e, c in p.terms.items():
        passthrough = tuple(0 if i in images else x for i, x in enumerate(e))
        term = LaurentPoly.monomial(ctx, passthrough, c)
        for i in images:
            if e[i] != 0:
                term = term * power(i, e[i])
        out = out + term
    return out


def pointed_form(p: LaurentPoly) -> Tuple[Tuple[int, ...], LaurentPoly]:
    """Split p as x^g * tail with tail constant term 1.

    The candidate x^g is the unique term free of the tropical variables; its
    coefficient must be 1, and after factoring it out every remaining term
    must carry only nonnegative tropical exponents.  Returns (g, tail) where
    g is the exponent vector on the cluster variables.  Raises NotPointed.
    """
    ctx = p.ctx
    trop = range(ctx.n, ctx.nvars)
    free = [e for e in p.terms if all(e[i] == 0 for i in trop)]
    if len(free) != 1:
        raise NotPointed(f"expected one tropical-free term, found {len(free)}")
    g_full = free[0]
    if p.terms[g_full] != 1:
        raise NotPointed("tropical-free term has coefficient != 1")
    tail = p.shift(tuple(-x for x in g_full))
    for e in tail.terms:
        if any(e[i] < 0 for i in trop):
            raise NotPointed("tail term with negative tropical exponent")
    return g_full[: ctx.n], tail


def clear_tropical(p: LaurentPoly) -> LaurentPoly:
    """Multiply by the minimal tropical monomial removing negative u-exponents."""
    mins = p.min_exponents()
    shift = [0] * p.ctx.nvars
    for i in range(p.ctx.n, p.ctx.nvars):
        if mins[i] < 0:
            shift[i] = -mins[i]
    return p.shift(shift)


def to_json_dict(p: LaurentPoly) -> dict:
    """JSON form: {"vars": [...], "terms": [{"c": "<int>", "e": [...]}]}."""
    return {
        "vars": list(p.ctx.names),
        "terms": [
            {"c": str(c), "e": list(e)} for e, c in p.canonical_key()
        ],
    }


def from_json_dict(d: dict, ctx: VarContext | None = None) -> LaurentPoly:
    names = tuple(d["vars"])
    if ctx is None:
        # Recover the n/m split from the default naming convention; callers
        # with custom names must pass their context explicitly.
        n = sum(1 for s in names if s.startswith("x"))
        ctx = VarContext(n, len(names) - n, names)
    elif ctx.names != names:
        raise ContextMismatch("JSON variable list does not match context")
    return LaurentPoly(ctx, {tuple(t["e"]): int(t["c"]) for t in d["terms"]})
