"""Existence and non-existence of uniting measures.

Implements the signed uniting construction (always possible for
consistent families), the exact feasibility criterion backed by the LP
engine (a uniting measure or a dual certificate with sum f_alpha >= 0
pointwise and sum of integrals < 0), the density-ratio sufficient
conditions for (3,2) families, and the two standard counterexample
builders (mod-k and the two-point anti-diagonal family).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from . import lp_core
from .measures import (
    DiscreteMeasure,
    DomainError,
    IndexSet,
    MarginalFamily,
    ProductGrid,
    SignedDiscreteMeasure,
    all_index_sets,
    is_consistent,
    lower_marginal,
    product,
    project,
)


class PreconditionError(DomainError):
    """A documented precondition of an operation does not hold."""


class DensityAssemblyError(Exception):
    """The density-2 assembly produced a negative weight.

    On finite grids the extreme-measure argument holds only up to
    almost-everywhere modifications of densities, so a discrete family
    with M/m <= 2 may still defeat the explicit formulas.  This error
    reports the offending cell instead of guessing.
    """

    def __init__(self, message: str, cell=None, weight=None):
        super().__init__(message)
        self.cell = cell
        self.weight = weight


class QuadExt:
    """An element a + b*sqrt(root) of a real quadratic field.

    `root` is a fixed nonnegative rational that is not a perfect square
    of a rational.  Supports field arithmetic with Fractions/ints and
    exact comparisons, which is what the density-2 construction needs to
    certify nonnegativity without floating point.
    """

    __slots__ = ("a", "b", "root")

    def __init__(self, a, b, root):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.root = Fraction(root)
        if self.root < 0:
            raise DomainError("root must be nonnegative")

    def _coerce(self, other):
        if isinstance(other, QuadExt):
            if other.root != self.root:
                raise DomainError("mixed quadratic fields")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadExt(other, 0, self.root)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.a + o.a, self.b + o.b, self.root)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.root)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.a - o.a, self.b - o.b, self.root)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(
            self.a * o.a + self.b * o.b * self.root,
            self.a * o.b + self.b * o.a,
            self.root,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        norm = o.a * o.a - o.b * o.b * self.root
        if norm == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        conj = QuadExt(o.a / norm, -o.b / norm, self.root)
        return self * conj

    def __rtruediv__(self, other):
        return QuadExt(other, 0, self.root) / self

    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # Opposite signs: compare |a| with |b|*sqrt(root) via squares.
        lhs, rhs = a * a, b * b * self.root
        if a > 0:  # b < 0
            return 1 if lhs > rhs else (-1 if lhs < rhs else 0)
        return 1 if rhs > lhs else (-1 if rhs < lhs else 0)

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is NotImplemented:
            raise TypeError(f"cannot compare QuadExt with {type(other)}")
        return (self - o).sign()

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
            return NotImplemented

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(float(self.root))

    def __repr__(self):
        return f"QuadExt({self.a} + {self.b}*sqrt({self.root}))"


class CoefficientVector:
    """Lambda coefficients (lambda_0, ..., lambda_k) of a linear combination."""

    __slots__ = ("lambdas",)

    def __init__(self, lambdas: Sequence[Fraction]):
        object.__setattr__(self, "lambdas", tuple(Fraction(v) for v in lambdas))

    def __setattr__(self, name, value):
        raise AttributeError("CoefficientVector is immutable")

    def __iter__(self):
        return iter(self.lambdas)

    def __getitem__(self, t):
        return self.lambdas[t]

    def __len__(self):
        return len(self.lambdas)

    def __eq__(self, other):
        other_t = tuple(other) if not isinstance(other, CoefficientVector) else other.lambdas
        return self.lambdas == other_t

    def __repr__(self):
        return f"CoefficientVector({[str(v) for v in self.lambdas]})"


class DensityBounds:
    """Cellwise bounds m <= mu_alpha / nu_alpha <= M for a checked family."""

    __slots__ = ("m", "M")

    def __init__(self, m, M):
        object.__setattr__(self, "m", Fraction(m))
        object.__setattr__(self, "M", Fraction(M))

    def __setattr__(self, name, value):
        raise AttributeError("DensityBounds is immutable")

    @property
    def ratio(self) -> Fraction:
        return self.M / self.m

    def __repr__(self):
        return f"DensityBounds(m={self.m}, M={self.M})"


class FeasibilityVerdict:
    """Feasible with a uniting witness, or infeasible with {f_alpha}.

    For the infeasible branch `potentials` maps alpha -> tuple of values
    on grid_alpha with sum_alpha f_alpha(x_alpha) >= 0 on every cell and
    sum_alpha int f_alpha d mu_alpha < 0.
    """

    __slots__ = ("feasible", "witness", "potentials", "lp_certificate")

    def __init__(self, feasible, witness=None, potentials=None, lp_certificate=None):
        object.__setattr__(self, "feasible", feasible)
        object.__setattr__(self, "witness", witness)
        object.__setattr__(self, "potentials", potentials)
        object.__setattr__(self, "lp_certificate", lp_certificate)

    def __setattr__(self, name, value):
        raise AttributeError("FeasibilityVerdict is immutable")

    def __bool__(self):
        return self.feasible

    def __repr__(self):
        kind = "feasible" if self.feasible else "infeasible"
        return f"FeasibilityVerdict({kind})"


def _binom(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def signed_lambda(n: int, k: int) -> CoefficientVector:
    """Coefficients making sum_t lambda_t mu~_t project to every mu_alpha.

    The system is triangular with unit diagonal:
        sum_{t=i}^{k} lambda_t C(n-k, t-i) = [i == k]   for i = 0..k.
    """
    if not 1 <= k < n:
        raise DomainError(f"need 1 <= k < n, got n={n}, k={k}")
    lambdas = [Fraction(0)] * (k + 1)
    lambdas[k] = Fraction(1)
    for i in range(k - 1, -1, -1):
        acc = sum(lambdas[t] * _binom(n - k, t - i) for t in range(i + 1, k + 1))
        lambdas[i] = -acc  # diagonal coefficient C(n-k, 0) = 1
    return CoefficientVector(lambdas)


def _ref_product(refs: Sequence[DiscreteMeasure], axes: Sequence[int]):
    return [refs[a - 1] for a in axes]


def _check_refs(fam: MarginalFamily, refs: Sequence[DiscreteMeasure]):
    if len(refs) != fam.n:
        raise DomainError(f"expected {fam.n} reference measures, got {len(refs)}")
    for axis, nu in enumerate(refs, start=1):
        if nu.grid.axes != (axis,):
            raise DomainError(f"reference measure #{axis} must live on axis {axis}")
        if nu.grid.sizes != (fam.sizes[axis - 1],):
            raise DomainError(f"reference measure #{axis} has the wrong size")
        if nu.mass != 1:
            raise DomainError(f"reference measure #{axis} is not a probability measure")


def signed_uniting(
    fam: MarginalFamily, refs: Sequence[DiscreteMeasure]
) -> SignedDiscreteMeasure:
    """A signed measure projecting exactly to every mu_alpha of `fam`.

    Builds mu~_t = sum over t-subsets of (lower marginal x off-axis
    refs) and combines them with signed_lambda(n, k).  The result's
    projections are asserted before returning.
    """
    if not is_consistent(fam):
        raise PreconditionError("signed_uniting requires a consistent family")
    _check_refs(fam, refs)
    n, k = fam.n, fam.k
    lambdas = signed_lambda(n, k)
    grid = fam.full_grid()
    total = SignedDiscreteMeasure(grid, [Fraction(0)] * grid.ncells)
    for t in range(k + 1):
        if lambdas[t] == 0:
            continue
        tier = SignedDiscreteMeasure(grid, [Fraction(0)] * grid.ncells)
        for beta in all_index_sets(n, t) if t > 0 else [IndexSet([])]:
            off_axes = [a for a in range(1, n + 1) if a not in beta]
            factors = list(_ref_product(refs, off_axes))
            if t > 0:
                factors.append(lower_marginal(fam, beta))
            term = product(factors)
            tier = tier + SignedDiscreteMeasure(grid, term.weights)
        total = total + tier.scaled(lambdas[t])
    for alpha in fam.index_sets():
        got = project(total, alpha)
        want = fam[alpha]
        if tuple(got.weights) != tuple(want.weights):
            raise AssertionError(f"signed uniting projection mismatch on {alpha}")
    return total


def marginal_constraint_rows(fam: MarginalFamily):
    """The equality system prj_alpha(pi) = mu_alpha as LP rows.

    Returns (rows, rhs, row_index) where row_index lists (alpha, cell)
    in row order and columns are full-grid raveled cells.
    """
    grid = fam.full_grid()
    rows = []
    rhs = []
    row_index = []
    for alpha in fam.index_sets():
        sub = grid.subgrid(alpha)
        positions = [grid.axes.index(a) for a in alpha]
        base = len(rows)
        for _ in range(sub.ncells):
            rows.append({})
        for j in range(grid.ncells):
            cell = grid.unravel(j)
            sub_idx = sub.ravel([cell[p] for p in positions])
            rows[base + sub_idx][j] = Fraction(1)
        for idx in range(sub.ncells):
            rhs.append(fam[alpha].weights[idx])
            row_index.append((alpha, sub.unravel(idx)))
    return rows, rhs, row_index


def kellerer_check(fam: MarginalFamily, arithmetic: str = "exact") -> FeasibilityVerdict:
    """Decide Pi(mu_alpha) != {} exactly, with a checkable witness either way.

    Feasible: a uniting measure found by the LP phase 1.  Infeasible:
    potentials f_alpha = -y_alpha from the Farkas certificate, verified
    to satisfy sum f_alpha >= 0 cellwise and sum int f_alpha d mu < 0.
    """
    rows, rhs, row_index = marginal_constraint_rows(fam)
    grid = fam.full_grid()
    problem = lp_core.LPProblem([Fraction(0)] * grid.ncells, rows, rhs)
    sol = lp_core.solve(problem, arithmetic=arithmetic)
    if sol.status == "optimal":
        weights = sol.x
        witness = DiscreteMeasure(grid, weights)
        return FeasibilityVerdict(True, witness=witness)
    assert sol.status == "infeasible"
    potentials = {}
    offset = 0
    for alpha in fam.index_sets():
        sub = grid.subgrid(alpha)
        block = [-sol.certificate.y[offset + idx] for idx in range(sub.ncells)]
        potentials[alpha] = tuple(block)
        offset += sub.ncells
    if arithmetic == "exact":
        for j in range(grid.ncells):
            cell = grid.unravel(j)
            s = Fraction(0)
            for alpha in fam.index_sets():
                sub = grid.subgrid(alpha)
                positions = [grid.axes.index(a) for a in alpha]
                s += potentials[alpha][sub.ravel([cell[p] for p in positions])]
            assert s >= 0, "certificate potentials must be nonnegative cellwise"
        total = Fraction(0)
        for alpha in fam.index_sets():
            total += sum(
                f * w for f, w in zip(potentials[alpha], fam[alpha].weights)
            )
        assert total < 0, "certificate potentials must have negative total integral"
    return FeasibilityVerdict(
        False, potentials=potentials, lp_certificate=sol.certificate
    )


def density_bounds(fam: MarginalFamily, refs: Sequence[DiscreteMeasure]) -> DensityBounds:
    """Extremes of mu_alpha-weight / nu_alpha-weight over all alpha and cells."""
    _check_refs(fam, refs)
    m = None
    M = None
    for alpha in fam.index_sets():
        nu_alpha = product(_ref_product(refs, list(alpha)))
        for w_mu, w_nu in zip(fam[alpha].weights, nu_alpha.weights):
            if w_nu == 0:
                if w_mu != 0:
                    raise DomainError(
                        f"marginal for {alpha} is not absolutely continuous "
                        "with respect to the reference product"
                    )
                continue
            ratio = w_mu / w_nu
            m = ratio if m is None or ratio < m else m
            M = ratio if M is None or ratio > M else M
    if m is None:
        raise DomainError("reference product vanishes everywhere")
    return DensityBounds(m, M)


def _assert_uniting(mu, fam: MarginalFamily, label: str) -> DiscreteMeasure:
    for i, w in enumerate(mu.weights):
        if w < 0:
            raise DensityAssemblyError(
                f"{label}: negative weight at cell {mu.grid.unravel(i)}",
                cell=mu.grid.unravel(i),
                weight=w,
            )
    for alpha in fam.index_sets():
        got = project(mu, alpha)
        if any(a != b for a, b in zip(got.weights, fam[alpha].weights)):
            raise AssertionError(f"{label}: projection mismatch on {alpha}")
    return DiscreteMeasure(mu.grid, mu.weights)


def _pairs32():
    return [IndexSet([1, 2]), IndexSet([1, 3]), IndexSet([2, 3])]


def _require_32(fam: MarginalFamily):
    if (fam.n, fam.k) != (3, 2):
        raise PreconditionError(f"(3,2) family required, got ({fam.n},{fam.k})")


def uniting_by_density_32(
    fam: MarginalFamily, refs: Sequence[DiscreteMeasure]
) -> DiscreteMeasure:
    """The explicit uniting measure for (3,2) families with M/m <= 3/2.

    mu = 4 mu1 mu2 mu3 - 2(nu1 mu2 mu3 + mu1 nu2 mu3 + mu1 mu2 nu3)
         + 2(mu12 nu3 + mu13 nu2 + mu23 nu1)
         - (mu12 mu3 + mu13 mu2 + mu23 mu1)
    """
    _require_32(fam)
    bounds = density_bounds(fam, refs)
    if bounds.ratio > Fraction(3, 2):
        raise PreconditionError(f"M/m = {bounds.ratio} exceeds 3/2")
    mu = {a: lower_marginal(fam, IndexSet([a])) for a in (1, 2, 3)}
    nu = {a: refs[a - 1] for a in (1, 2, 3)}
    pair = {tuple(a): fam[a] for a in _pairs32()}
    grid = fam.full_grid()

    def t(*factors):
        return SignedDiscreteMeasure(grid, product(list(factors)).weights)

    total = t(mu[1], mu[2], mu[3]).scaled(4)
    total = total - (
        t(nu[1], mu[2], mu[3]) + t(mu[1], nu[2], mu[3]) + t(mu[1], mu[2], nu[3])
    ).scaled(2)
    total = total + (
        t(pair[(1, 2)], nu[3]) + t(pair[(1, 3)], nu[2]) + t(pair[(2, 3)], nu[1])
    ).scaled(2)
    total = total - (
        t(pair[(1, 2)], mu[3]) + t(pair[(1, 3)], mu[2]) + t(pair[(2, 3)], mu[1])
    )
    return _assert_uniting(total, fam, "density-3/2 assembly")


def uniting_by_twothirds(fam: MarginalFamily) -> DiscreteMeasure:
    """Uniting measure when mu_ij >= (2/3) mu_i x mu_j cellwise.

    mu = sum over pairs of (mu_ij - (2/3) mu_i x mu_j) x mu_k.
    """
    _require_32(fam)
    mu = {a: lower_marginal(fam, IndexSet([a])) for a in (1, 2, 3)}
    grid = fam.full_grid()
    total = SignedDiscreteMeasure(grid, [Fraction(0)] * grid.ncells)
    for alpha in _pairs32():
        i, j = alpha.members
        (k,) = [a for a in (1, 2, 3) if a not in alpha]
        prod_ij = product([mu[i], mu[j]])
        for idx, (w_pair, w_prod) in enumerate(
            zip(fam[alpha].weights, prod_ij.weights)
        ):
            if w_pair < Fraction(2, 3) * w_prod:
                cell = fam[alpha].grid.unravel(idx)
                raise PreconditionError(
                    f"mu_{alpha.key()} < (2/3) product at cell {cell}"
                )
        slack = SignedDiscreteMeasure(
            fam[alpha].grid,
            [
                w_pair - Fraction(2, 3) * w_prod
                for w_pair, w_prod in zip(fam[alpha].weights, prod_ij.weights)
            ],
        )
        total = total + SignedDiscreteMeasure(
            grid, product([slack, mu[k]]).weights
        )
    return _assert_uniting(total, fam, "two-thirds assembly")


def _sqrt_fraction(value: Fraction):
    """Exact rational square root, or None if irrational."""
    if value < 0:
        return None
    num = math.isqrt(value.numerator)
    den = math.isqrt(value.denominator)
    if num * num == value.numerator and den * den == value.denominator:
        return Fraction(num, den)
    return None


def uniting_by_density_2(
    fam: MarginalFamily, refs: Sequence[DiscreteMeasure]
) -> DiscreteMeasure:
    """Uniting measure for (3,2) families with M/m <= 2.

    Pipeline: (i) an LP extracts the largest mass xi with residual
    densities still >= m; (ii) the residual family is renormalized;
    (iii) the residual is united by the product branch (m' = 1), the
    2-mu1mu2mu3 formula (m' = 2/3), or the explicit u-formula with
    u = sqrt(3 - 2/m') evaluated in the quadratic field Q(u).  Any
    negative weight raises DensityAssemblyError with diagnostics.
    """
    _require_32(fam)
    _check_refs(fam, refs)
    bounds = density_bounds(fam, refs)
    if bounds.ratio > 2:
        raise PreconditionError(f"M/m = {bounds.ratio} exceeds 2")
    m = bounds.m
    grid = fam.full_grid()
    pairs = _pairs32()
    nu_pair = {
        tuple(alpha): product(_ref_product(refs, list(alpha))) for alpha in pairs
    }

    # (i) maximize xi(X) subject to prj_ij(xi) <= mu_ij - m nu_ij.
    ncells = grid.ncells
    rows = []
    rhs = []
    slack_col = ncells
    for alpha in pairs:
        sub = grid.subgrid(alpha)
        positions = [grid.axes.index(a) for a in alpha]
        base = len(rows)
        for _ in range(sub.ncells):
            rows.append({})
        for j in range(ncells):
            cell = grid.unravel(j)
            rows[base + sub.ravel([cell[p] for p in positions])][j] = Fraction(1)
        for idx in range(sub.ncells):
            rows[base + idx][slack_col] = Fraction(1)
            slack_col += 1
            rhs.append(
                fam[alpha].weights[idx] - m * nu_pair[tuple(alpha)].weights[idx]
            )
    nvars = slack_col
    objective = [Fraction(1)] * ncells + [Fraction(0)] * (nvars - ncells)
    sol = lp_core.solve(lp_core.LPProblem(objective, rows, rhs, sense="max"))
    assert sol.status == "optimal"
    xi = DiscreteMeasure(grid, sol.x[:ncells])
    extracted = xi.mass
    if extracted == 1:
        return _assert_uniting(xi, fam, "density-2 assembly (pure extraction)")
    alpha_rem = 1 - extracted

    residual = {}
    for alpha in pairs:
        proj = project(xi, alpha)
        residual[tuple(alpha)] = DiscreteMeasure(
            proj.grid,
            [
                (w_mu - w_xi) / alpha_rem
                for w_mu, w_xi in zip(fam[alpha].weights, proj.weights)
            ],
        )
    fam_prime = MarginalFamily(
        3, 2, fam.sizes, {alpha: residual[tuple(alpha)] for alpha in pairs}
    )
    bounds_prime = density_bounds(fam_prime, refs)
    m_prime = bounds_prime.m

    mu_i = {a: lower_marginal(fam_prime, IndexSet([a])) for a in (1, 2, 3)}
    nu_i = {a: refs[a - 1] for a in (1, 2, 3)}

    def t(*factors):
        return SignedDiscreteMeasure(grid, product(list(factors)).weights)

    if m_prime >= 1:
        inner = t(nu_i[1], nu_i[2], nu_i[3])
    elif m_prime == Fraction(2, 3):
        inner = (
            t(mu_i[1], residual[(2, 3)])
            + t(mu_i[2], residual[(1, 3)])
            + t(mu_i[3], residual[(1, 2)])
            - t(mu_i[1], mu_i[2], mu_i[3]).scaled(2)
        )
    elif m_prime > Fraction(2, 3):
        u_sq = 3 - 2 / m_prime
        u = _sqrt_fraction(u_sq)
        if u is None:
            u = QuadExt(0, 1, u_sq)
        one = u * 0 + 1  # unit in the same field as u
        denom3 = u * (u + 1) * (u + 1) * (u + 1)
        denom2 = (u + 1) * (u + 1)
        c_mmm = (one * (-8)) / (m_prime * m_prime * denom3)
        c_nnn = (one * 2) * (u * 5 + 9) / denom3
        c_nmm = (one * 4) * (u + 3) / (m_prime * denom3)
        c_mnn = (one * (-2)) * (u * 5 + 9) / denom3
        c_pair_nu = (one * 2) * (u + 2) / denom2
        c_pair_mu = (one * (-2)) / (m_prime * denom2)
        inner = (
            t(mu_i[1], mu_i[2], mu_i[3]).scaled(c_mmm)
            + t(nu_i[1], nu_i[2], nu_i[3]).scaled(c_nnn)
            + (
                t(nu_i[1], mu_i[2], mu_i[3])
                + t(mu_i[1], nu_i[2], mu_i[3])
                + t(mu_i[1], mu_i[2], nu_i[3])
            ).scaled(c_nmm)
            + (
                t(mu_i[1], nu_i[2], nu_i[3])
                + t(nu_i[1], mu_i[2], nu_i[3])
                + t(nu_i[1], nu_i[2], mu_i[3])
            ).scaled(c_mnn)
            + (
                t(residual[(2, 3)], nu_i[1])
                + t(residual[(1, 3)], nu_i[2])
                + t(residual[(1, 2)], nu_i[3])
            ).scaled(c_pair_nu)
            + (
                t(residual[(2, 3)], mu_i[1])
                + t(residual[(1, 3)], mu_i[2])
                + t(residual[(1, 2)], mu_i[3])
            ).scaled(c_pair_mu)
        )
    else:
        raise DensityAssemblyError(
            f"residual lower density m' = {m_prime} < 2/3; the discrete family "
            "violates the extreme-measure assumptions"
        )

    _assert_uniting(inner, fam_prime, "density-2 inner assembly")
    combined = SignedDiscreteMeasure(
        grid,
        [alpha_rem * w + x for w, x in zip(inner.weights, xi.weights)],
    )
    return _assert_uniting(combined, fam, "density-2 assembly")


def make_modk_counterexample(n: int, k: int) -> MarginalFamily:
    """The consistent but infeasible mod-k family on {0..k-1}^n.

    mu_alpha(x) = k^(1-k) exactly when the coordinates of x sum to
    1 mod k.  All lower-dimensional projections are uniform, so the
    family is consistent; no uniting measure exists for 1 < k < n.
    """
    if not 1 < k < n:
        raise DomainError(f"need 1 < k < n, got n={n}, k={k}")
    sizes = [k] * n
    weight = Fraction(1, k ** (k - 1))
    marginals = {}
    for alpha in all_index_sets(n, k):
        sub = ProductGrid([k] * k, axes=tuple(alpha))
        ws = []
        for cell in sub.cells():
            ws.append(weight if sum(cell) % k == 1 else Fraction(0))
        marginals[alpha] = DiscreteMeasure(sub, ws)
    return MarginalFamily(n, k, sizes, marginals)


def make_two_point_counterexample(ratio) -> MarginalFamily:
    """The (3,2) two-point family: weight M on the anti-diagonal of
    {0,1}^2, m on the diagonal, with M/m = ratio and 2M + 2m = 1.

    Feasible exactly for 1 <= ratio <= 2.
    """
    r = Fraction(ratio)
    if r < 1:
        raise DomainError(f"ratio must be >= 1, got {r}")
    m = Fraction(1, 2) / (1 + r)
    M = r * m
    marginals = {}
    for alpha in _pairs32():
        sub = ProductGrid([2, 2], axes=tuple(alpha))
        ws = []
        for cell in sub.cells():
            ws.append(M if cell[0] + cell[1] == 1 else m)
        marginals[alpha] = DiscreteMeasure(sub, ws)
    return MarginalFamily(3, 2, [2, 2, 2], marginals)
