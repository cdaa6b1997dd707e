"""Affine root-system layer: Cartan matrix, delta, bilinear forms, Coxeter
action, tube detection, arc combinatorics and the nu_c map.

Roots are integer vectors in the simple-root basis (RootVec), weights in the
fundamental-weight basis (WeightVec).  All arithmetic is exact (int/Fraction).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .seeds import (
    CorootVec,
    ExtendedExchangeMatrix,
    RootVec,
    Rows,
    WeightVec,
    coroot_scalers,
    skew_symmetrizers,
)


class NotAcyclic(ValueError):
    """The exchange matrix has a directed cycle."""


class NotAffineType(ValueError):
    """The Cartan counterpart is not of affine type."""


class HeightBoundTooSmall(RuntimeError):
    """Root enumeration was truncated before the tubes closed up."""


class SimplesMismatch(RuntimeError):
    """Finite Coxeter orbits exist but none sums to delta.

    The engine identifies the tube simples by the orbit-sum-equals-delta
    criterion.  On some twisted affine Cartan types the finite orbits of
    positive real roots sum to a proper multiple of delta instead; that is a
    genuine divergence from the span-minimality definition and is reported
    loudly rather than resolved silently."""


class NotInImaginaryWall(ValueError):
    """The vector is not in the cone spanned by delta and the tube roots."""


class NotMaximal(ValueError):
    """The arc set is not a maximal pairwise compatible set."""


class NotMember(ValueError):
    """The arc does not belong to the given set or tube."""


class NegativeInput(ValueError):
    """nu_c is only implemented on nonnegative root vectors."""


def source_to_sink_order(b: Rows) -> Tuple[int, ...]:
    """Topological order with b[i][j] > 0 forcing i before j."""
    n = len(b)
    succ = {i: [j for j in range(n) if b[i][j] > 0] for i in range(n)}
    indeg = [0] * n
    for i in range(n):
        for j in succ[i]:
            indeg[j] += 1
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    order: List[int] = []
    while ready:
        i = ready.pop(0)
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
        ready.sort()
    if len(order) != n:
        raise NotAcyclic("positivity digraph has a cycle")
    return tuple(order)


def cartan_matrix(b: Rows) -> Rows:
    n = len(b)
    return tuple(
        tuple(2 if i == j else -abs(b[i][j]) for j in range(n)) for i in range(n)
    )


def _det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(rows)
    m = [list(map(Fraction, r)) for r in rows]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = Fraction(1) / m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] * inv
            if factor:
                for c in range(col, n):
                    m[r][c] -= factor * m[col][c]
    return det


def solve_linear(
    columns: Sequence[Sequence[Fraction]], target: Sequence[Fraction]
) -> Optional[List[Fraction]]:
    """One exact solution x of  sum_j x_j * columns[j] = target, or None."""
    nrows = len(target)
    ncols = len(columns)
    aug = [[Fraction(columns[j][i]) for j in range(ncols)] + [Fraction(target[i])] for i in range(nrows)]
    pivots: List[Tuple[int, int]] = []
    row = 0
    for col in range(ncols):
        pivot = next((r for r in range(row, nrows) if aug[r][col] != 0), None)
        if pivot is None:
            continue
        aug[row], aug[pivot] = aug[pivot], aug[row]
        inv = Fraction(1) / aug[row][col]
        aug[row] = [v * inv for v in aug[row]]
        for r in range(nrows):
            if r != row and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[row])]
        pivots.append((row, col))
        row += 1
        if row == nrows:
            break
    for r in range(row, nrows):
        if aug[r][ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for r, c in pivots:
        x[c] = aug[r][ncols]
    return x


def _kernel_vector(a: Rows) -> Optional[Tuple[Fraction, ...]]:
    """A nonzero kernel vector when the kernel is 1-dimensional, else None."""
    n = len(a)
    m = [[Fraction(a[i][j]) for j in range(n)] for i in range(n)]
    pivots: List[int] = []
    row = 0
    for col in range(n):
        pivot = next((r for r in range(row, n) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        inv = Fraction(1) / m[row][col]
        m[row] = [v * inv for v in m[row]]
        for r in range(n):
            if r != row and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[row])]
        pivots.append(col)
        row += 1
    free = [c for c in range(n) if c not in pivots]
    if len(free) != 1:
        return None
    f = free[0]
    x = [Fraction(0)] * n
    x[f] = Fraction(1)
    for r, c in enumerate(pivots):
        x[c] = -m[r][f]
    return tuple(x)


@dataclass(frozen=True)
class AffineData:
    """Everything derived from an acyclic affine exchange matrix."""

    b: Rows
    cartan: Rows
    d: Tuple[Fraction, ...]
    e: Tuple[int, ...]  # 1/d_i
    order: Tuple[int, ...]  # source-to-sink listing of indices
    delta: RootVec
    e_c: Rows
    e_cinv: Rows
    cox_root: Rows  # matrix of c in the simple-root basis

    @property
    def n(self) -> int:
        return len(self.b)

    @property
    def symmetric_form(self) -> Rows:
        """Matrix of K (coroot coordinates left, root coordinates right)."""
        return self.cartan

    @property
    def omega(self) -> Rows:
        """Matrix of omega_c; identical to the exchange matrix."""
        return self.b

    # -- reflections and the Coxeter element --------------------------------

    def reflect_root(self, r: int, v: RootVec) -> RootVec:
        pairing = sum(self.cartan[r][i] * v.coords[i] for i in range(self.n))
        coords = list(v.coords)
        coords[r] -= pairing
        return RootVec(tuple(coords))

    def reflect_weight(self, r: int, w: WeightVec) -> WeightVec:
        lr = w.coords[r]
        return WeightVec(
            tuple(w.coords[j] - self.cartan[j][r] * lr for j in range(self.n))
        )

    def coxeter_root(self, v: RootVec, power: int = 1) -> RootVec:
        seq = tuple(reversed(self.order)) if power > 0 else self.order
        for _ in range(abs(power)):
            for r in seq:
                v = self.reflect_root(r, v)
        return v

    def coxeter_weight(self, w: WeightVec, power: int = 1) -> WeightVec:
        seq = tuple(reversed(self.order)) if power > 0 else self.order
        for _ in range(abs(power)):
            for r in seq:
                w = self.reflect_weight(r, w)
        return w

    def coxeter_apply(self, v, power: int = 1):
        """Action of c^power on V (RootVec) or the dual action on V* (WeightVec)."""
        if isinstance(v, RootVec):
            return self.coxeter_root(v, power)
        if isinstance(v, WeightVec):
            return self.coxeter_weight(v, power)
        raise TypeError("expected RootVec or WeightVec")

    # -- pairings ------------------------------------------------------------

    def pair_weight_coroot(self, w: WeightVec, coroot: CorootVec) -> int:
        return sum(a * b for a, b in zip(w.coords, coroot.coords))

    def pair_weight_root(self, w: WeightVec, v: RootVec) -> Fraction:
        return sum(
            Fraction(w.coords[i]) * v.coords[i] * self.d[i] for i in range(self.n)
        )

    def beta_check(self, v: RootVec) -> CorootVec:
        """The primitive coroot parallel to v."""
        # smallest k with k*m_i/e_i integral for all i
        k = 1
        for mi, ei in zip(v.coords, self.e):
            need = ei // gcd(ei, abs(mi)) if mi else 1
            k = k * need // gcd(k, need)
        return CorootVec(tuple(k * mi // ei for mi, ei in zip(v.coords, self.e)))

    def omega_form(self, v: RootVec, w: RootVec) -> Fraction:
        """omega_c(v, w) for v, w in V (both in simple-root coordinates)."""
        bw = [sum(self.b[i][j] * w.coords[j] for j in range(self.n)) for i in range(self.n)]
        return sum(Fraction(v.coords[i], self.e[i]) * bw[i] for i in range(self.n))

    def b_weight(self, v: RootVec) -> WeightVec:
        """omega_c(., v) as a weight vector: the matrix product B v."""
        return WeightVec(
            tuple(sum(self.b[i][j] * v.coords[j] for j in range(self.n)) for i in range(self.n))
        )

    # -- nu_c ------------------------------------------------------------------

    def nu_c(self, v: RootVec) -> WeightVec:
        """nu_c on nonnegative root vectors: -E_c(., v)."""
        if any(x < 0 for x in v.coords):
            raise NegativeInput("nu_c implemented only on nonnegative root vectors")
        return WeightVec(
            tuple(
                -sum(self.e_c[i][j] * v.coords[j] for j in range(self.n))
                for i in range(self.n)
            )
        )

    def nu_c_inv(self, w: WeightVec) -> RootVec:
        """Inverse of nu_c as a linear map Q -> P (exact, unimodular)."""
        target = [-x for x in w.coords]
        coords = [0] * self.n
        # E_c is unitriangular with respect to the source-to-sink order.
        for i in self.order:
            acc = target[i] - sum(
                self.e_c[i][j] * coords[j] for j in range(self.n) if j != i
            )
            coords[i] = acc
        root = RootVec(tuple(coords))
        check = tuple(
            -sum(self.e_c[i][j] * root.coords[j] for j in range(self.n))
            for i in range(self.n)
        )
        if check != w.coords:
            raise AssertionError("nu_c_inv failed to invert")
        return root

    def height(self, v: RootVec) -> int:
        return sum(v.coords)


def build_affine_data(matrix) -> AffineData:
    """Certify acyclicity and affine type, compute delta, forms and c."""
    if isinstance(matrix, ExtendedExchangeMatrix):
        b = matrix.top()
    else:
        b = tuple(tuple(r) for r in matrix)
    n = len(b)
    d = skew_symmetrizers(b)
    e = coroot_scalers(b)
    order = source_to_sink_order(b)
    a = cartan_matrix(b)
    if _det(a) != 0:
        raise NotAffineType("Cartan determinant is nonzero")
    for size in range(1, n):
        for subset in itertools.combinations(range(n), size):
            minor = tuple(tuple(a[i][j] for j in subset) for i in subset)
            if _det(minor) <= 0:
                raise NotAffineType("a proper principal minor is not positive")
    kern = _kernel_vector(a)
    if kern is None:
        raise NotAffineType("Cartan corank is not 1")
    denom_lcm = 1
    for f in kern:
        denom_lcm = denom_lcm * f.denominator // gcd(denom_lcm, f.denominator)
    ints = [int(f * denom_lcm) for f in kern]
    g = 0
    for x in ints:
        g = gcd(g, x)
    ints = [x // g for x in ints]
    if all(x < 0 for x in ints):
        ints = [-x for x in ints]
    if any(x <= 0 for x in ints):
        raise NotAffineType("kernel vector is not strictly positive")
    delta = RootVec(tuple(ints))

    e_c = tuple(
        tuple(1 if i == j else min(b[i][j], 0) for j in range(n)) for i in range(n)
    )
    e_cinv = tuple(
        tuple(1 if i == j else -max(b[i][j], 0) for j in range(n)) for i in range(n)
    )
    data = AffineData(
        b=b, cartan=a, d=d, e=e, order=order, delta=delta,
        e_c=e_c, e_cinv=e_cinv, cox_root=(),
    )
    cols = [data.coxeter_root(RootVec(tuple(1 if i == j else 0 for i in range(n)))) for j in range(n)]
    cox = tuple(tuple(cols[j].coords[i] for j in range(n)) for i in range(n))
    data = AffineData(
        b=b, cartan=a, d=d, e=e, order=order, delta=delta,
        e_c=e_c, e_cinv=e_cinv, cox_root=cox,
    )
    # Howlett: E_{c^{-1}} * M_c = -E_c, and c fixes delta.
    for i in range(n):
        for j in range(n):
            lhs = sum(e_cinv[i][t] * cox[t][j] for t in range(n))
            if lhs != -e_c[i][j]:
                raise AssertionError("Coxeter matrix fails the E_c identity")
    if data.coxeter_root(delta) != delta:
        raise AssertionError("delta is not fixed by c")
    return data


# -- positive real roots and tubes -------------------------------------------

def positive_real_roots(data: AffineData, height_bound: int) -> List[RootVec]:
    """All positive real roots of height <= height_bound, by reflection closure."""
    n = data.n
    seen: Set[Tuple[int, ...]] = set()
    frontier: List[RootVec] = []
    for i in range(n):
        v = RootVec(tuple(1 if j == i else 0 for j in range(n)))
        seen.add(v.coords)
        frontier.append(v)
    out = list(frontier)
    while frontier:
        nxt: List[RootVec] = []
        for v in frontier:
            for r in range(n):
                w = data.reflect_root(r, v)
                if (
                    w.coords not in seen
                    and all(x >= 0 for x in w.coords)
                    and sum(w.coords) <= height_bound
                ):
                    seen.add(w.coords)
                    out.append(w)
                    nxt.append(w)
        frontier = nxt
    return sorted(out, key=lambda v: (sum(v.coords), v.coords))


@dataclass(frozen=True)
class Tube:
    """One c-orbit of tube simples: orbit[i+1] = c(orbit[i]), sum = delta."""

    index: int
    orbit: Tuple[RootVec, ...]

    @property
    def size(self) -> int:
        return len(self.orbit)


@dataclass(frozen=True, order=True)
class TubeRoot:
    """The arc beta_[start, start+length-1] in tube number `tube`."""

    tube: int
    start: int
    length: int


def detect_tubes(data: AffineData, height_bound: Optional[int] = None) -> List[Tube]:
    """Find the tube-simples orbits: finite c-orbits of positive real roots
    summing to delta.  Returns 0 to 3 tubes, each of size >= 2."""
    ht_delta = data.height(data.delta)
    if height_bound is None:
        height_bound = 4 * ht_delta
    if height_bound < ht_delta:
        raise HeightBoundTooSmall("height bound below the height of delta")
    roots = positive_real_roots(data, height_bound)
    qualifying = [v for v in roots if data.omega_form(data.delta, v) == 0]
    seen: Set[Tuple[int, ...]] = set()
    orbits: List[List[RootVec]] = []
    cap = 64 * height_bound * data.n + 64
    for v in qualifying:
        if v.coords in seen:
            continue
        orbit = [v]
        cur = data.coxeter_root(v)
        steps = 0
        while cur != v:
            if any(x < 0 for x in cur.coords):
                raise HeightBoundTooSmall("orbit left the positive cone (truncated data)")
            orbit.append(cur)
            cur = data.coxeter_root(cur)
            steps += 1
            if steps > cap:
                raise HeightBoundTooSmall("orbit failed to close; raise the height bound")
        for w in orbit:
            seen.add(w.coords)
        orbits.append(orbit)
    tubes: List[Tube] = []
    for orbit in orbits:
        total = orbit[0]
        for w in orbit[1:]:
            total = total + w
        if total != data.delta:
            continue
        base = min(range(len(orbit)), key=lambda i: orbit[i].coords)
        cyc = tuple(orbit[(base + i) % len(orbit)] for i in range(len(orbit)))
        tubes.append(Tube(index=0, orbit=cyc))
    if orbits and not tubes:
        raise SimplesMismatch(
            "finite Coxeter orbits found, but none sums to delta; "
            "the tube-simples criterion does not apply to this matrix"
        )
    tubes.sort(key=lambda t: (t.size, t.orbit[0].coords))
    tubes = [Tube(index=i, orbit=t.orbit) for i, t in enumerate(tubes)]
    if len(tubes) > 3:
        raise AssertionError("more than three tube orbits found")
    if any(t.size < 2 for t in tubes):
        raise AssertionError("tube orbit of size < 2")
    return tubes


# -- arcs ---------------------------------------------------------------------

def arc(tube: Tube, start: int, length: int) -> TubeRoot:
    if not 1 <= length < tube.size:
        raise NotMember(f"arc length must be in 1..{tube.size - 1}")
    return TubeRoot(tube.index, start % tube.size, length)


def all_arcs(tube: Tube) -> List[TubeRoot]:
    return [
        TubeRoot(tube.index, s, l)
        for l in range(1, tube.size)
        for s in range(tube.size)
    ]


def arc_support(tube: Tube, r: TubeRoot) -> FrozenSet[int]:
    if r.tube != tube.index:
        raise NotMember("arc belongs to a different tube")
    return frozenset((r.start + i) % tube.size for i in range(r.length))


def tube_root_vector(tube: Tube, r: TubeRoot) -> RootVec:
    if r.tube != tube.index:
        raise NotMember("arc belongs to a different tube")
    if not 1 <= r.length < tube.size:
        raise NotMember("arc length out of range")
    total = tube.orbit[r.start % tube.size]
    for i in range(1, r.length):
        total = total + tube.orbit[(r.start + i) % tube.size]
    return total


def same_tube_compatible(tube: Tube, r1: TubeRoot, r2: TubeRoot) -> bool:
    k = tube.size
    s1 = arc_support(tube, r1)
    s2 = arc_support(tube, r2)
    if s1 <= s2 or s2 <= s1:
        return True
    grown = s1 | {(i + 1) % k for i in s1} | {(i - 1) % k for i in s1}
    return not (grown & s2)


def compatible(tubes: Sequence[Tube], r1: TubeRoot, r2: TubeRoot) -> bool:
    """Nested or spaced (same tube), always true across different tubes."""
    if r1.tube != r2.tube:
        return True
    return same_tube_compatible(tubes[r1.tube], r1, r2)


def maximal_compatible_sets(tube: Tube) -> List[FrozenSet[TubeRoot]]:
    """Brute-force enumeration of all maximal pairwise compatible arc sets."""
    arcs = all_arcs(tube)
    k = tube.size
    out = []
    for combo in itertools.combinations(arcs, k - 1):
        ok = all(
            same_tube_compatible(tube, a, b)
            for a, b in itertools.combinations(combo, 2)
        )
        if ok:
            out.append(frozenset(combo))
    return sorted(out, key=lambda s: sorted((r.start, r.length) for r in s))


def check_maximal(tube: Tube, j: Iterable[TubeRoot]) -> Tuple[TubeRoot, ...]:
    js = tuple(sorted(set(j)))
    if len(js) != tube.size - 1:
        raise NotMaximal(f"expected {tube.size - 1} arcs, got {len(js)}")
    for a, b in itertools.combinations(js, 2):
        if not same_tube_compatible(tube, a, b):
            raise NotMaximal(f"arcs {a} and {b} are not compatible")
    return js


def exchange_partner(tube: Tube, j: Iterable[TubeRoot], gamma: TubeRoot) -> TubeRoot:
    """The unique arc gamma' != gamma with (J - gamma) + gamma' maximal."""
    js = check_maximal(tube, j)
    if gamma not in js:
        raise NotMember("gamma is not in J")
    rest = [r for r in js if r != gamma]
    candidates = []
    for cand in all_arcs(tube):
        if cand == gamma or cand in rest:
            continue
        if all(same_tube_compatible(tube, cand, r) for r in rest):
            candidates.append(cand)
    if len(candidates) != 1:
        raise AssertionError(f"expected a unique exchange partner, found {candidates}")
    return candidates[0]


def maximal_root(tube: Tube, j: Iterable[TubeRoot]) -> TubeRoot:
    js = check_maximal(tube, j)
    big = [r for r in js if r.length == tube.size - 1]
    if len(big) != 1:
        raise AssertionError("maximal compatible set without a unique maximal root")
    return big[0]


def next_larger(tube: Tube, j: Iterable[TubeRoot], gamma: TubeRoot) -> Optional[TubeRoot]:
    js = check_maximal(tube, j)
    sg = arc_support(tube, gamma)
    ups = [r for r in js if sg < arc_support(tube, r)]
    if not ups:
        return None
    best = min(ups, key=lambda r: r.length)
    assert sum(1 for r in ups if r.length == best.length) == 1
    return best


def next_smaller(tube: Tube, j: Iterable[TubeRoot], gamma: TubeRoot) -> List[TubeRoot]:
    js = check_maximal(tube, j)
    sg = arc_support(tube, gamma)
    downs = [r for r in js if arc_support(tube, r) < sg]
    maxima = [
        r
        for r in downs
        if not any(arc_support(tube, r) < arc_support(tube, q) for q in downs)
    ]
    return sorted(maxima)


def private_element(tube: Tube, j: Iterable[TubeRoot], gamma: TubeRoot) -> int:
    """The unique orbit index in Supp(gamma) not covered by any other root
    of J whose support does not contain Supp(gamma)."""
    js = check_maximal(tube, j)
    sg = arc_support(tube, gamma)
    covered: Set[int] = set()
    for r in js:
        if r == gamma:
            continue
        sr = arc_support(tube, r)
        if not (sr >= sg):
            covered |= sr
    left = sorted(sg - covered)
    if len(left) != 1:
        raise AssertionError(f"private element not unique: {left}")
    return left[0]


@dataclass(frozen=True)
class MaxRootData:
    """Exchange data for the maximal root gamma = delta - beta of a maximal
    compatible set: beta is the missing simple, beta_prime the private element
    of gamma, phi/phi_prime the (possibly empty) runs strictly between them."""

    beta_idx: int
    beta_prime_idx: int
    phi: Optional[TubeRoot]
    phi_prime: Optional[TubeRoot]


def max_root_data(tube: Tube, j: Iterable[TubeRoot], gamma: TubeRoot) -> MaxRootData:
    js = check_maximal(tube, j)
    k = tube.size
    if gamma not in js or gamma.length != k - 1:
        raise NotMember("gamma is not the maximal root of J")
    beta_idx = (gamma.start - 1) % k
    beta_prime_idx = private_element(tube, js, gamma)
    ell = (beta_prime_idx - beta_idx) % k
    phi = TubeRoot(tube.index, (beta_idx + 1) % k, ell - 1) if ell > 1 else None
    phi_prime = (
        TubeRoot(tube.index, (beta_prime_idx + 1) % k, k - ell - 1)
        if k - ell > 1
        else None
    )
    for piece in (phi, phi_prime):
        if piece is not None and piece not in js:
            raise AssertionError(f"next-smaller piece {piece} missing from J")
    return MaxRootData(beta_idx, beta_prime_idx, phi, phi_prime)


@dataclass(frozen=True)
class NonMaxRootData:
    """Exchange data for a non-maximal gamma: phi is its next larger root,
    beta/beta_prime the two private elements ordered along Supp(phi) in the
    orbit direction, and phi1/phi2/phi3 the runs of Supp(phi) left after
    deleting them (before beta, between, after beta_prime)."""

    phi: TubeRoot
    beta_idx: int
    beta_prime_idx: int
    phi1: Optional[TubeRoot]
    phi2: Optional[TubeRoot]
    phi3: Optional[TubeRoot]
    gamma_owns_beta: bool  # gamma's private element is beta (not beta_prime)


def nonmax_root_data(tube: Tube, j: Iterable[TubeRoot], gamma: TubeRoot) -> NonMaxRootData:
    js = check_maximal(tube, j)
    k = tube.size
    phi = next_larger(tube, js, gamma)
    if phi is None:
        raise NotMember("gamma is the maximal root; no next larger root")
    pos = {(phi.start + t) % k: t for t in range(phi.length)}
    b_phi = private_element(tube, js, phi)
    b_gamma = private_element(tube, js, gamma)
    if pos[b_phi] < pos[b_gamma]:
        beta_idx, beta_prime_idx = b_phi, b_gamma
    else:
        beta_idx, beta_prime_idx = b_gamma, b_phi
    p_beta, p_prime = pos[beta_idx], pos[beta_prime_idx]

    def run(a: int, b: int) -> Optional[TubeRoot]:
        if b <= a:
            return None
        return TubeRoot(tube.index, (phi.start + a) % k, b - a)

    phi1 = run(0, p_beta)
    phi2 = run(p_beta + 1, p_prime)
    phi3 = run(p_prime + 1, phi.length)
    for piece in (phi1, phi2, phi3):
        if piece is not None and piece not in js:
            raise AssertionError(f"piece {piece} missing from J")
    owns_beta = b_gamma == beta_idx
    expected_support = (
        {(phi.start + t) % k for t in range(0, p_prime)}
        if owns_beta
        else {(phi.start + t) % k for t in range(p_beta + 1, phi.length)}
    )
    if arc_support(tube, gamma) != expected_support:
        raise AssertionError("gamma does not match its pieces (orientation bug)")
    return NonMaxRootData(phi, beta_idx, beta_prime_idx, phi1, phi2, phi3, owns_beta)


# -- membership and cluster expansion inside the imaginary wall ---------------

def _tube_profiles(
    data: AffineData, tubes: Sequence[Tube], phi: RootVec
) -> Optional[Tuple[List[List[Fraction]], Fraction]]:
    """Solve phi = sum of orbit vectors with per-tube profiles; returns the
    min-reduced profiles and the total delta multiplicity, or None."""
    if not tubes:
        # d_infinity degenerates to the ray of delta.
        dcoords = data.delta.coords
        ratios = {Fraction(p, q) for p, q in zip(phi.coords, dcoords)}
        if len(ratios) != 1:
            return None
        t = ratios.pop()
        return [], t
    columns: List[List[Fraction]] = []
    for tube in tubes:
        for v in tube.orbit:
            columns.append([Fraction(x) for x in v.coords])
    sol = solve_linear(columns, [Fraction(x) for x in phi.coords])
    if sol is None:
        return None
    profiles: List[List[Fraction]] = []
    pos = 0
    total = Fraction(0)
    for tube in tubes:
        chunk = sol[pos : pos + tube.size]
        pos += tube.size
        t = min(chunk)
        total += t
        profiles.append([x - t for x in chunk])
    return profiles, total


def weight_in_imaginary_wall(
    data: AffineData, tubes: Sequence[Tube], w: WeightVec
) -> bool:
    """Real-cone membership of a weight in d_infinity."""
    phi = data.nu_c_inv(w)
    res = _tube_profiles(data, tubes, phi)
    return res is not None and res[1] >= 0


def cluster_expansion_imaginary(
    data: AffineData, tubes: Sequence[Tube], phi: RootVec
) -> Tuple[int, Dict[TubeRoot, int]]:
    """Decompose phi as m_delta * delta plus a compatible arc combination.

    Per tube the profile of orbit coordinates is reduced by its minimum (the
    delta content), then cut into nested/spaced arcs by slab decomposition.
    Raises NotInImaginaryWall when phi is not in the cone or not integral."""
    res = _tube_profiles(data, tubes, phi)
    if res is None:
        raise NotInImaginaryWall(f"{phi} is not in the span of the tube simples")
    profiles, total = res
    if total < 0 or total.denominator != 1:
        raise NotInImaginaryWall(f"delta multiplicity {total} is not a nonnegative integer")
    m_delta = int(total)
    arcs: Dict[TubeRoot, int] = {}
    for tube, profile in zip(tubes, profiles):
        if any(x.denominator != 1 or x < 0 for x in profile):
            raise NotInImaginaryWall("tube profile is not nonnegative integral")
        q = [int(x) for x in profile]
        k = tube.size
        zero = q.index(0)
        # Cut the cycle at a zero so every emitted arc is an honest interval.
        line = [(zero + 1 + i) % k for i in range(k - 1)]
        values = [q[p] for p in line]
        while any(values):
            i = 0
            while i < len(values):
                if values[i] == 0:
                    i += 1
                    continue
                jx = i
                while jx < len(values) and values[jx] > 0:
                    jx += 1
                run = range(i, jx)
                mn = min(values[t] for t in run)
                root = TubeRoot(tube.index, line[i], jx - i)
                arcs[root] = arcs.get(root, 0) + mn
                for t in run:
                    values[t] -= mn
                i = jx
    for r1, r2 in itertools.combinations(arcs, 2):
        if not compatible(tubes, r1, r2):
            raise AssertionError("slab decomposition emitted incompatible arcs")
    recon = data.delta.scale(m_delta)
    for r, mult in arcs.items():
        recon = recon + tube_root_vector(tubes[r.tube], r).scale(mult)
    if recon != phi:
        raise AssertionError("cluster expansion failed to reconstruct the input")
    return m_delta, arcs
