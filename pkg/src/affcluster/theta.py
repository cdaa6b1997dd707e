"""Theta functions attached to lattice points of the imaginary wall.

Everything is computed for the principal-coefficient extension of an acyclic
affine exchange matrix: theta functions on the g-vector fan are cluster
variables (found by g-vector search), the theta function of delta comes from
the rank-2 closed forms or from the boundary identity, multiples of delta
from the Chebyshev-style recursion, and interior points from the product
over a compatible expansion.  Products of thetas are re-expanded in the theta
basis by greedy peeling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from . import affine
from .affine import (
    AffineData,
    NotInImaginaryWall,
    Tube,
    TubeRoot,
    cluster_expansion_imaginary,
    exchange_partner,
    nonmax_root_data,
    tube_root_vector,
)
from .poly import LaurentPoly, VarContext, default_context, substitute
from .seeds import (
    ExtendedExchangeMatrix,
    NotFound,
    RootVec,
    Seed,
    WeightVec,
    enumerate_gvector_frontier,
    initial_seed,
    mutate_seed_word,
    principal_extension,
    tropical_monomial,
)


class IdentityViolated(AssertionError):
    """An identity that the engine relies on failed symbolically."""


class NonTerminating(RuntimeError):
    """Theta-basis peeling exceeded its budget; signals a violated identity."""


@dataclass(frozen=True)
class ThetaFunction:
    """A pointed Laurent polynomial together with its g-vector label."""

    label: WeightVec
    poly: LaurentPoly


# The rank-2 closed forms, keyed by (b12, b21).  Exponent order: x1 x2 u1 u2.
_RANK2_DELTA_TABLE = {
    (2, -2): {(-1, 1, 0, 0): 1, (-1, -1, 1, 0): 1, (1, -1, 1, 1): 1},
    (4, -1): {(-2, 1, 0, 0): 1, (-2, 0, 1, 0): 2, (-2, -1, 2, 0): 1, (2, -1, 2, 1): 1},
    (1, -4): {(-1, 2, 0, 0): 1, (-1, -2, 1, 0): 1, (0, -2, 1, 1): 2, (1, -2, 1, 2): 1},
}


class ThetaEngine:
    """Theta-function calculator for one acyclic affine exchange matrix.

    Holds the affine data, the detected tubes, the principal-coefficient seed
    machinery and caches of computed theta functions."""

    def __init__(
        self,
        b_rows,
        depth: int = 8,
        height_bound: Optional[int] = None,
        peel_budget: int = 64,
    ) -> None:
        self.data: AffineData = affine.build_affine_data(b_rows)
        self.tubes: List[Tube] = affine.detect_tubes(self.data, height_bound)
        self.n = self.data.n
        self.depth = depth
        self.peel_budget = peel_budget
        self.matrix: ExtendedExchangeMatrix = principal_extension(self.data.b)
        self.ctx: VarContext = default_context(self.n, self.n)
        self._frontier = enumerate_gvector_frontier(self.matrix, depth)
        self._gvec_index: Dict[Tuple[int, ...], Tuple[Tuple[int, ...], int]] = {}
        self._seed_cache: Dict[Tuple[int, ...], Seed] = {(): initial_seed(self.matrix, self.ctx)}
        self._theta_cache: Dict[Tuple[int, ...], ThetaFunction] = {}
        self._k_delta: List[ThetaFunction] = []

    # -- monomial helpers ----------------------------------------------------

    def y_monomial(self, beta: RootVec, coeff: int = 1) -> LaurentPoly:
        """y^beta: the tropical monomial u^beta (principal coefficients)."""
        return tropical_monomial(self.ctx, beta.coords, coeff)

    def one(self) -> LaurentPoly:
        return LaurentPoly.const(self.ctx, 1)

    def assert_pointed(self, poly: LaurentPoly, label: WeightVec) -> None:
        """Pointedness at the label: p = x^label (1 + sum c_beta yhat^beta)
        with beta > 0, i.e. every term is x^(label + B beta) u^beta."""
        n = self.n
        seen_unit = False
        for e, c in poly.terms.items():
            beta = RootVec(e[n:])
            if any(x < 0 for x in beta.coords):
                raise IdentityViolated("negative tropical exponent in a theta function")
            expect = label + self.data.b_weight(beta)
            if e[:n] != expect.coords:
                raise IdentityViolated("theta term off the pointed grading")
            if beta.is_zero():
                if c != 1:
                    raise IdentityViolated("pointed term has coefficient != 1")
                seen_unit = True
            elif c <= 0:
                raise IdentityViolated("nonpositive theta coefficient")
        if not seen_unit:
            raise IdentityViolated("missing pointed term")

    # -- g-vector fan thetas ---------------------------------------------------

    def _seed_for_word(self, word: Tuple[int, ...]) -> Seed:
        if word in self._seed_cache:
            return self._seed_cache[word]
        seed = mutate_seed_word(self._seed_for_word(word[:-1]), [word[-1]])
        self._seed_cache[word] = seed
        return seed

    def theta_gfan(self, label: WeightVec) -> ThetaFunction:
        """The cluster variable with the given g-vector (ray of the g-fan)."""
        key = label.coords
        if key in self._theta_cache:
            return self._theta_cache[key]
        if key not in self._gvec_index:
            for g_col, word, col in self._frontier:
                self._gvec_index.setdefault(g_col, (word, col))
                if g_col == key:
                    break
            else:
                raise NotFound(self.depth)
        word, col = self._gvec_index[key]
        var = self._seed_for_word(word).cluster[col]
        theta = ThetaFunction(label, var)
        self.assert_pointed(var, label)
        self._theta_cache[key] = theta
        return theta

    def theta_tube_root(self, r: TubeRoot) -> ThetaFunction:
        """Theta of nu_c(arc); a cluster variable by the ray bijection."""
        vec = tube_root_vector(self.tubes[r.tube], r)
        return self.theta_gfan(self.data.nu_c(vec))

    # -- the imaginary ray ------------------------------------------------------

    def _theta_delta_rank2(self) -> ThetaFunction:
        b12, b21 = self.data.b[0][1], self.data.b[1][0]
        label = self.data.nu_c(self.data.delta)
        if (b12, b21) in _RANK2_DELTA_TABLE:
            poly = LaurentPoly(self.ctx, _RANK2_DELTA_TABLE[(b12, b21)])
        else:
            swapped = _RANK2_DELTA_TABLE.get((b21, b12))
            if swapped is None:
                raise NotInImaginaryWall("not an affine 2x2 exchange matrix")
            poly = LaurentPoly(
                self.ctx, {(e[1], e[0], e[3], e[2]): c for e, c in swapped.items()}
            )
        self.assert_pointed(poly, label)
        return ThetaFunction(label, poly)

    def theta_delta_from(self, tube_idx: int, orbit_pos: int) -> ThetaFunction:
        """Theta of nu_c(delta) computed from one chosen tube simple:
        theta_{nu(beta)} theta_{nu(delta-beta)} - y^beta theta_{nu(delta-beta-c^{-1}beta)}
                                               - y^{c beta} theta_{nu(delta-beta-c beta)}."""
        tube = self.tubes[tube_idx]
        k = tube.size
        i = orbit_pos % k
        t_beta = self.theta_tube_root(TubeRoot(tube.index, i, 1))
        t_rest = self.theta_tube_root(TubeRoot(tube.index, (i + 1) % k, k - 1))
        if k == 2:
            tail1 = tail2 = self.one()
        else:
            tail1 = self.theta_tube_root(TubeRoot(tube.index, (i + 1) % k, k - 2)).poly
            tail2 = self.theta_tube_root(TubeRoot(tube.index, (i + 2) % k, k - 2)).poly
        poly = (
            t_beta.poly * t_rest.poly
            - self.y_monomial(tube.orbit[i]) * tail1
            - self.y_monomial(tube.orbit[(i + 1) % k]) * tail2
        )
        label = self.data.nu_c(self.data.delta)
        self.assert_pointed(poly, label)
        return ThetaFunction(label, poly)

    def theta_delta(self) -> ThetaFunction:
        if self._k_delta:
            return self._k_delta[0]
        if self.n == 2:
            theta = self._theta_delta_rank2()
        elif not self.tubes:
            raise NotInImaginaryWall(
                "no tube simples detected; theta_delta needs rank 2 or a tube"
            )
        else:
            theta = self.theta_delta_from(0, 0)
        self._k_delta.append(theta)
        return theta

    def theta_k_delta(self, k: int) -> ThetaFunction:
        """Theta of k*nu_c(delta) by the recursion
        theta_2 = theta_1^2 - 2 y^delta,  theta_k = theta_{k-1} theta_1 - y^delta theta_{k-2}."""
        if k < 1:
            raise ValueError("k must be >= 1")
        self.theta_delta()
        ydelta = self.y_monomial(self.data.delta)
        while len(self._k_delta) < k:
            j = len(self._k_delta) + 1
            t1 = self._k_delta[0].poly
            if j == 2:
                poly = t1 * t1 - ydelta.scale(2)
            else:
                prev = self._k_delta[-1].poly
                prev2 = self._k_delta[-2].poly if j > 2 else self.one()
                poly = prev * t1 - ydelta * prev2
            label = self.data.nu_c(self.data.delta).scale(j)
            self.assert_pointed(poly, label)
            self._k_delta.append(ThetaFunction(label, poly))
        return self._k_delta[k - 1]

    # -- general points of the imaginary wall -----------------------------------

    def theta_imaginary(self, phi: RootVec) -> ThetaFunction:
        """Theta of nu_c(phi) for phi in the tube cone, as the product
        theta_{m_delta nu(delta)} * prod theta_{nu(arc)}^mult."""
        m_delta, arcs = cluster_expansion_imaginary(self.data, self.tubes, phi)
        poly = self.one() if m_delta == 0 else self.theta_k_delta(m_delta).poly
        for r in sorted(arcs):
            poly = poly * self.theta_tube_root(r).poly ** arcs[r]
        label = self.data.nu_c(phi)
        self.assert_pointed(poly, label)
        return ThetaFunction(label, poly)

    def theta_by_label(self, label: WeightVec) -> ThetaFunction:
        """Theta for a lattice point of the imaginary wall given by its label
        (theta_0 = 1 by convention)."""
        if label.is_zero():
            return ThetaFunction(label, self.one())
        return self.theta_imaginary(self.data.nu_c_inv(label))

    # -- products in the theta basis ----------------------------------------------

    def _x_coefficient(self, p: LaurentPoly, kappa: WeightVec) -> LaurentPoly:
        """Sum of u-monomials over terms of p whose x-part equals kappa."""
        n = self.n
        out = {}
        for e, c in p.terms.items():
            if e[:n] == kappa.coords:
                out[(0,) * n + e[n:]] = c
        return LaurentPoly(self.ctx, out)

    def dominance_chain(self, label: WeightVec) -> List[WeightVec]:
        """{label - 2a nu_c(delta) : a >= 0} intersected with d_infinity."""
        out = []
        nu_delta = self.data.nu_c(self.data.delta)
        a = 0
        while True:
            kappa = label - nu_delta.scale(2 * a)
            if not affine.weight_in_imaginary_wall(self.data, self.tubes, kappa):
                break
            out.append(kappa)
            a += 1
        return out

    def expand_product(
        self, a: ThetaFunction, b: ThetaFunction
    ) -> Dict[WeightVec, LaurentPoly]:
        """Expand theta_a * theta_b as a k[y]-combination of thetas.

        First peels along the dominance chain of label(a)+label(b) (largest
        label first), then peels any remaining pointed leading terms; aborts
        loudly if the remainder survives the budget."""
        lam = a.label + b.label
        remainder = a.poly * b.poly
        combo: Dict[WeightVec, LaurentPoly] = {}

        def peel(kappa: WeightVec) -> None:
            nonlocal remainder
            coeff = self._x_coefficient(remainder, kappa)
            if not coeff:
                return
            theta = self.theta_by_label(kappa)
            remainder = remainder - coeff * theta.poly
            combo[kappa] = combo.get(kappa, LaurentPoly.zero(self.ctx)) + coeff

        for kappa in self.dominance_chain(lam):
            if not remainder:
                break
            peel(kappa)
        budget = self.peel_budget
        n = self.n
        while remainder:
            if budget == 0:
                raise NonTerminating("theta-basis peeling exceeded its budget")
            budget -= 1
            # pointed leading term: minimal total u-degree, graded-lex max x-part
            best = min(
                remainder.terms,
                key=lambda e: (sum(e[n:]), tuple(-x for x in e[:n])),
            )
            try:
                peel(WeightVec(best[:n]))
            except NotInImaginaryWall as exc:
                raise IdentityViolated(
                    f"product of imaginary thetas left d_infinity: {exc}"
                ) from exc
        for kappa, coeff in combo.items():
            for e in coeff.terms:
                if any(x < 0 for x in e[n:]):
                    raise IdentityViolated("structure constant not in k[y]")
        return {k: v for k, v in combo.items() if v}

    # -- exchange identities --------------------------------------------------------

    def imaginary_exchange(self, tube_idx: int, i: int, j: int) -> dict:
        """Verify the three-term imaginary exchange relation for the pair
        (delta - beta_[i], delta - beta_[j]) in one tube orbit; returns the
        right-hand side pieces.  Raises IdentityViolated on failure."""
        tube = self.tubes[tube_idx]
        k = tube.size
        i %= k
        j %= k
        if i == j:
            raise ValueError("need two distinct orbit positions")
        ell = (j - i) % k
        m = k - ell
        phi = TubeRoot(tube.index, (i + 1) % k, ell - 1) if ell > 1 else None
        phi_p = TubeRoot(tube.index, (j + 1) % k, m - 1) if m > 1 else None
        vec_phi = tube_root_vector(tube, phi) if phi else RootVec((0,) * self.n)
        vec_phi_p = tube_root_vector(tube, phi_p) if phi_p else RootVec((0,) * self.n)
        lhs = (
            self.theta_tube_root(TubeRoot(tube.index, (i + 1) % k, k - 1)).poly
            * self.theta_tube_root(TubeRoot(tube.index, (j + 1) % k, k - 1)).poly
        )
        t_main = self.theta_imaginary(self.data.delta + vec_phi + vec_phi_p).poly
        sq_phi = self.theta_tube_root(phi).poly ** 2 if phi else self.one()
        sq_phi_p = self.theta_tube_root(phi_p).poly ** 2 if phi_p else self.one()
        term2 = self.y_monomial(vec_phi_p + tube.orbit[i]) * sq_phi
        term3 = self.y_monomial(vec_phi + tube.orbit[j]) * sq_phi_p
        if lhs != t_main + term2 + term3:
            raise IdentityViolated(
                f"imaginary exchange failed for tube {tube_idx}, positions {i},{j}"
            )
        return {
            "vacuous": phi is None and phi_p is None,
            "lhs": lhs,
            "rhs": (t_main, term2, term3),
        }

    def real_exchange(self, tube_idx: int, j_set, gamma: TubeRoot) -> dict:
        """Verify the two-term exchange relation for a non-maximal gamma in a
        maximal compatible set:  theta_g theta_g' = theta_phi theta_phi2
        + y^{phi2 + beta'} theta_phi1 theta_phi3."""
        tube = self.tubes[tube_idx]
        info = nonmax_root_data(tube, j_set, gamma)
        gamma_p = exchange_partner(tube, j_set, gamma)

        def tpoly(r: Optional[TubeRoot]) -> LaurentPoly:
            return self.theta_tube_root(r).poly if r else self.one()

        def vec(r: Optional[TubeRoot]) -> RootVec:
            return tube_root_vector(tube, r) if r else RootVec((0,) * self.n)

        lhs = self.theta_tube_root(gamma).poly * self.theta_tube_root(gamma_p).poly
        first = tpoly(info.phi) * tpoly(info.phi2)
        second = self.y_monomial(
            vec(info.phi2) + tube.orbit[info.beta_prime_idx]
        ) * tpoly(info.phi1) * tpoly(info.phi3)
        if lhs != first + second:
            raise IdentityViolated(
                f"real exchange failed for {gamma} in tube {tube_idx}"
            )
        return {"lhs": lhs, "rhs": (first, second), "partner": gamma_p}

    # -- coefficient specialization ---------------------------------------------

    def specialize_coefficient_free(self, p: LaurentPoly) -> LaurentPoly:
        """Set every tropical variable to 1 (the coefficient-free engine)."""
        images = {
            self.n + i: LaurentPoly.const(self.ctx, 1) for i in range(self.n)
        }
        return substitute(p, images)
