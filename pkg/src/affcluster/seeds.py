"""Exchange matrices, seeds, mutation, mutation maps and g-vector search.

Matrices are tall: n+m rows by n columns, the top n x n block being the
exchange matrix proper and the remaining m rows the coefficient part.
All indices in this module are 0-based; the CLI converts from 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, List, Optional, Sequence, Tuple

from .poly import (
    LaurentPoly,
    NotPointed,
    VarContext,
    clear_tropical,
    default_context,
    exact_div,
    pointed_form,
)

Rows = Tuple[Tuple[int, ...], ...]


class NonSkewSymmetrizable(ValueError):
    """No positive skew-symmetrizing constants exist."""


class UnsignedColumn(ValueError):
    """A coefficient column mixes positive and negative entries."""


class NotFound(LookupError):
    """BFS exhausted its depth without locating the target g-vector."""

    def __init__(self, depth: int):
        super().__init__(f"no cluster variable with the target g-vector within depth {depth}")
        self.depth = depth


@dataclass(frozen=True)
class RootVec:
    """Integer vector in the simple-root basis."""

    coords: Tuple[int, ...]

    def __add__(self, other: "RootVec") -> "RootVec":
        return RootVec(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "RootVec") -> "RootVec":
        return RootVec(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "RootVec":
        return RootVec(tuple(-a for a in self.coords))

    def scale(self, k: int) -> "RootVec":
        return RootVec(tuple(k * a for a in self.coords))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)

    def height(self) -> int:
        return sum(self.coords)


@dataclass(frozen=True)
class WeightVec:
    """Integer vector in the fundamental-weight basis."""

    coords: Tuple[int, ...]

    def __add__(self, other: "WeightVec") -> "WeightVec":
        return WeightVec(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "WeightVec") -> "WeightVec":
        return WeightVec(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "WeightVec":
        return WeightVec(tuple(-a for a in self.coords))

    def scale(self, k: int) -> "WeightVec":
        return WeightVec(tuple(k * a for a in self.coords))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)


@dataclass(frozen=True)
class CorootVec:
    """Integer vector in the simple-coroot basis."""

    coords: Tuple[int, ...]


@dataclass(frozen=True)
class CoweightVec:
    """Integer vector in the fundamental-coweight basis."""

    coords: Tuple[int, ...]


def _pos(x: int) -> int:
    return x if x > 0 else 0


@dataclass(frozen=True)
class ExtendedExchangeMatrix:
    """(n+m) x n integer matrix whose top square block is skew-symmetrizable."""

    rows: Rows
    n: int

    def __post_init__(self) -> None:
        if any(len(r) != self.n for r in self.rows):
            raise ValueError("all rows must have length n")
        if len(self.rows) < self.n:
            raise ValueError("need at least n rows")
        skew_symmetrizers(self.top())  # raises NonSkewSymmetrizable

    @property
    def m(self) -> int:
        return len(self.rows) - self.n

    def top(self) -> Rows:
        return self.rows[: self.n]

    def bottom(self) -> Rows:
        return self.rows[self.n :]

    def entry(self, i: int, j: int) -> int:
        return self.rows[i][j]

    def mutate(self, k: int) -> "ExtendedExchangeMatrix":
        return ExtendedExchangeMatrix(mutate_rows(self.rows, k, self.n), self.n)


def mutate_rows(rows: Rows, k: int, n: Optional[int] = None) -> Rows:
    """Matrix mutation in direction k applied to all rows of a tall matrix."""
    ncols = len(rows[0])
    if n is None:
        n = ncols
    if not 0 <= k < ncols:
        raise IndexError(f"mutation index {k} out of range")
    out = []
    for i, row in enumerate(rows):
        new = []
        for j in range(ncols):
            if i == k or j == k:
                new.append(-row[j])
            else:
                new.append(row[j] + _pos(-row[k]) * rows[k][j] + row[k] * _pos(rows[k][j]))
        out.append(tuple(new))
    return tuple(out)


def mutate_matrix(matrix: ExtendedExchangeMatrix, k: int) -> ExtendedExchangeMatrix:
    return matrix.mutate(k)


def skew_symmetrizers(b: Rows) -> Tuple[Fraction, ...]:
    """Positive d with d_i b_ij = -d_j b_ji, normalized so 1/d_i are
    integers with collective gcd 1.  Raises NonSkewSymmetrizable."""
    n = len(b)
    d: List[Optional[Fraction]] = [None] * n
    for start in range(n):
        if d[start] is not None:
            continue
        d[start] = Fraction(1)
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                if b[i][j] == 0 and b[j][i] == 0:
                    continue
                if b[i][j] == 0 or b[j][i] == 0 or (b[i][j] > 0) == (b[j][i] > 0):
                    raise NonSkewSymmetrizable("incompatible sign pattern")
                ratio = Fraction(-b[i][j], b[j][i])
                if d[j] is None:
                    d[j] = d[i] * ratio
                    stack.append(j)
                elif d[j] != d[i] * ratio:
                    raise NonSkewSymmetrizable("inconsistent symmetrizer constraints")
    inv = [Fraction(1) / x for x in d]  # type: ignore[operator]
    scale = reduce(lcm, (f.denominator for f in inv), 1)
    ints = [f * scale for f in inv]
    g = reduce(gcd, (int(x) for x in ints))
    e = tuple(int(x) // g for x in ints)
    return tuple(Fraction(1, ei) for ei in e)


def coroot_scalers(b: Rows) -> Tuple[int, ...]:
    """The integers e_i = 1/d_i (so alpha_i_check = e_i alpha_i)."""
    return tuple(int(Fraction(1) / di) for di in skew_symmetrizers(b))


def principal_extension(b: Rows) -> ExtendedExchangeMatrix:
    """Stack an identity block below the exchange matrix."""
    n = len(b)
    rows = tuple(tuple(r) for r in b) + tuple(
        tuple(1 if j == i else 0 for j in range(n)) for i in range(n)
    )
    return ExtendedExchangeMatrix(rows, n)


def column_sign(matrix: ExtendedExchangeMatrix, k: int) -> int:
    """sgn(y_k): +1 for a nonnegative coefficient column (including all-zero),
    -1 for nonpositive, UnsignedColumn for mixed."""
    col = [matrix.rows[i][k] for i in range(matrix.n, matrix.n + matrix.m)]
    if all(x >= 0 for x in col):
        return 1
    if all(x <= 0 for x in col):
        return -1
    raise UnsignedColumn(f"coefficient column {k} has mixed signs")


@dataclass(frozen=True)
class Seed:
    """An extended exchange matrix together with its cluster variables."""

    matrix: ExtendedExchangeMatrix
    cluster: Tuple[LaurentPoly, ...]
    history: Tuple[int, ...] = ()

    @property
    def ctx(self) -> VarContext:
        return self.cluster[0].ctx

    def key(self):
        """Deduplication key: matrix entries plus the unordered cluster."""
        return (
            self.matrix.rows,
            tuple(sorted(p.canonical_key() for p in self.cluster)),
        )


def initial_seed(matrix: ExtendedExchangeMatrix, ctx: Optional[VarContext] = None) -> Seed:
    n, m = matrix.n, matrix.m
    if ctx is None:
        ctx = default_context(n, m)
    if ctx.n != n or ctx.m != m:
        raise ValueError("context shape does not match the matrix")
    cluster = tuple(LaurentPoly.var(ctx, i) for i in range(n))
    return Seed(matrix, cluster)


def tropical_monomial(ctx: VarContext, exps: Sequence[int], coeff: int = 1) -> LaurentPoly:
    """Monomial u_1^e_1 ... u_m^e_m in the tropical variables."""
    e = [0] * ctx.nvars
    for i, x in enumerate(exps):
        e[ctx.n + i] = x
    return LaurentPoly.monomial(ctx, e, coeff)


def y_hat(seed: Seed, k: int) -> LaurentPoly:
    """The full k-th column monomial: y_k times the cluster-variable part.

    Only valid when every cluster variable with negative column entry is a
    monomial; general mutation avoids this helper."""
    ctx = seed.ctx
    mono = tropical_monomial(ctx, [seed.matrix.rows[seed.matrix.n + i][k] for i in range(seed.matrix.m)])
    for i in range(seed.matrix.n):
        mono = mono * seed.cluster[i] ** seed.matrix.rows[i][k]
    return mono


def exchange_rhs(seed: Seed, k: int) -> LaurentPoly:
    """Right side of the exchange relation x_k x'_k = (1+y_hat_k) * ...

    Expanded to the two-term polynomial form so no cluster variable is ever
    inverted:  with s = sgn(y_k),
      s=+1:  prod x_i^[-b_ik]_+  +  y_k * prod x_i^[b_ik]_+
      s=-1:  y_k^{-1} * prod x_i^[-b_ik]_+  +  prod x_i^[b_ik]_+
    """
    ctx = seed.ctx
    n, m = seed.matrix.n, seed.matrix.m
    s = column_sign(seed.matrix, k)
    ycol = [seed.matrix.rows[n + i][k] for i in range(m)]

    def xprod(exps: List[int]) -> LaurentPoly:
        out = LaurentPoly.const(ctx, 1)
        for i in range(n):
            if exps[i]:
                out = out * seed.cluster[i] ** exps[i]
        return out

    minus = xprod([_pos(-seed.matrix.rows[i][k]) for i in range(n)])
    plus = xprod([_pos(seed.matrix.rows[i][k]) for i in range(n)])
    if s == 1:
        return minus + tropical_monomial(ctx, ycol) * plus
    return tropical_monomial(ctx, [-y for y in ycol]) * minus + plus


def mutate_seed(seed: Seed, k: int) -> Seed:
    """Seed mutation in direction k; the new variable is exact by Laurentness."""
    rhs = exchange_rhs(seed, k)
    new_var = exact_div(rhs, seed.cluster[k])
    cluster = tuple(
        new_var if i == k else v for i, v in enumerate(seed.cluster)
    )
    return Seed(seed.matrix.mutate(k), cluster, seed.history + (k,))


def mutate_seed_word(seed: Seed, word: Iterable[int]) -> Seed:
    for k in word:
        seed = mutate_seed(seed, k)
    return seed


def mutation_map_eta(b: Rows, word: Sequence[int], v: WeightVec) -> WeightVec:
    """eta_word^{B^T}(v): append v's weight coordinates as an extra row below
    B^T, mutate (word applied left to right), read off the extra row."""
    n = len(b)
    transposed = tuple(tuple(b[j][i] for j in range(n)) for i in range(n))
    rows = transposed + (tuple(v.coords),)
    for k in word:
        rows = mutate_rows(rows, k, n)
    return WeightVec(rows[n])


def sink_to_source_word(order: Sequence[int]) -> Tuple[int, ...]:
    """The mutation word realizing mu_{order} (rightmost index applied first)."""
    return tuple(reversed(tuple(order)))


def g_vector_of(seed: Seed, i: int, strict: bool = True) -> WeightVec:
    """Pointed exponent of cluster variable i (principal coefficients)."""
    g, _tail = pointed_form_flexible(seed.cluster[i], strict=strict)
    return WeightVec(g)


def pointed_form_flexible(p: LaurentPoly, strict: bool = True):
    """pointed_form, optionally skipping the nonnegative-tropical-tail check.

    Theta functions for a mutated extended matrix are still pointed (unique
    tropical-free term with coefficient 1) but their tails involve mutated
    coefficient monomials with mixed signs."""
    if strict:
        return pointed_form(p)
    ctx = p.ctx
    trop = range(ctx.n, ctx.nvars)
    free = [e for e in p.terms if all(e[i] == 0 for i in trop)]
    if len(free) != 1 or p.terms[free[0]] != 1:
        raise NotPointed("no unique unit tropical-free term")
    g_full = free[0]
    return g_full[: ctx.n], p.shift(tuple(-x for x in g_full))


def denominator_vector_of(p: LaurentPoly) -> RootVec:
    """Componentwise maximum of negated cluster-variable exponents."""
    if not p:
        raise ValueError("denominator vector of the zero polynomial")
    n = p.ctx.n
    best = [None] * n  # type: List[Optional[int]]
    for e in p.terms:
        for i in range(n):
            v = -e[i]
            if best[i] is None or v > best[i]:
                best[i] = v
    return RootVec(tuple(int(x) for x in best))  # type: ignore[arg-type]


def clear(p: LaurentPoly) -> LaurentPoly:
    """Minimal tropical-monomial rescaling removing negative u exponents."""
    return clear_tropical(p)


# -- g-vector search ---------------------------------------------------------

def _g_mutate(b_top: Rows, g_cols: Rows, eps: int, k: int) -> Rows:
    n = len(b_top)
    new_col = tuple(
        -g_cols[i][k] + sum(g_cols[i][j] * _pos(-eps * b_top[j][k]) for j in range(n))
        for i in range(n)
    )
    return tuple(
        tuple(new_col[i] if j == k else g_cols[i][j] for j in range(n))
        for i in range(n)
    )


def enumerate_gvector_frontier(matrix: ExtendedExchangeMatrix, depth: int):
    """BFS over (B-tilde, G-matrix) states from a principal extension.

    Yields (g_column, mutation word, column index) for every cluster variable
    encountered, initial ones first.  Integer matrices only; polynomials are
    reconstructed by the caller when needed."""
    n = matrix.n
    ident = tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))
    if matrix.bottom() != ident:
        raise ValueError("g-vector search requires principal coefficients")
    start = (matrix.rows, ident)
    seen = {start}
    frontier = [(start, ())]
    for j in range(n):
        yield tuple(ident[i][j] for i in range(n)), (), j
    for _ in range(depth):
        new_frontier = []
        for (rows, g), word in frontier:
            b_top = rows[:n]
            for k in range(n):
                col = [rows[n + i][k] for i in range(n)]
                if all(x >= 0 for x in col):
                    eps = 1
                elif all(x <= 0 for x in col):
                    eps = -1
                else:
                    raise UnsignedColumn("sign-coherence violated (bug)")
                rows2 = mutate_rows(rows, k, n)
                g2 = _g_mutate(b_top, g, eps, k)
                state = (rows2, g2)
                if state in seen:
                    continue
                seen.add(state)
                word2 = word + (k,)
                new_frontier.append((state, word2))
                yield tuple(g2[i][k] for i in range(n)), word2, k
        frontier = new_frontier
        if not frontier:
            break


def find_cluster_variable_by_gvector(
    matrix: ExtendedExchangeMatrix,
    target: WeightVec,
    depth: int = 8,
    ctx: Optional[VarContext] = None,
) -> LaurentPoly:
    """The unique cluster variable with the given g-vector, by BFS.

    The search runs on integer (matrix, G-matrix) states; the witness word is
    then replayed through polynomial seed mutation and the result re-checked
    via its pointed form.  Raises NotFound(depth) when the target never shows."""
    for g_col, word, col in enumerate_gvector_frontier(matrix, depth):
        if g_col == target.coords:
            seed = mutate_seed_word(initial_seed(matrix, ctx), word)
            var = seed.cluster[col]
            g, _ = pointed_form(var)
            if g != target.coords:
                raise AssertionError("G-matrix recursion disagrees with pointed form")
            return var
    raise NotFound(depth)


def enumerate_seeds(seed: Seed, depth: int) -> List[Seed]:
    """All seeds within the given mutation depth, deduplicated by
    (matrix entries, unordered cluster)."""
    seen = {seed.key()}
    out = [seed]
    frontier = [seed]
    for _ in range(depth):
        nxt = []
        for s in frontier:
            for k in range(s.matrix.n):
                s2 = mutate_seed(s, k)
                if s2.key() not in seen:
                    seen.add(s2.key())
                    out.append(s2)
                    nxt.append(s2)
        frontier = nxt
        if not frontier:
            break
    return out


# -- mutation of theta functions (primed-variable rewriting) ------------------

def rewrite_in_mutated_variables(
    seed: Seed, k: int, v: LaurentPoly, label: WeightVec
) -> LaurentPoly:
    """Rewrite a pointed polynomial v (label = its g-vector for seed.matrix)
    in the variables of the seed mutated at k, including the coefficient
    correction y_k^{-[sgn(y_k) <label, alpha_k_check>]_+}.

    The result is expressed in the same symbols, now read as the primed
    variables.  Exactness of the division is part of the claim being tested."""
    ctx = seed.ctx
    n, m = seed.matrix.n, seed.matrix.m
    s = column_sign(seed.matrix, k)
    p = exchange_rhs(seed, k)  # x_k x'_k as a polynomial
    var_k_inv = LaurentPoly.var(ctx, k) ** -1
    image = p * var_k_inv
    shift_k = max(0, -v.min_exponents()[k])
    shifted = v.shift(tuple(shift_k if i == k else 0 for i in range(ctx.nvars)))
    from .poly import substitute

    a = substitute(shifted, {k: image})
    exp = -_pos(s * label.coords[k])
    ycol = [seed.matrix.rows[n + i][k] for i in range(m)]
    mult = tropical_monomial(ctx, [exp * y for y in ycol])
    numer = (a * mult).shift(tuple(shift_k if i == k else 0 for i in range(ctx.nvars)))
    return exact_div(numer, p ** shift_k)
