"""Worked examples: truncated lattice counterexamples, the discontinuous
dual, structured couplings on the torus, the uniform-band experiment,
and the polynomial dual family.

The lattice examples live on the positive integers; here they are cut to
a finite window {1..N}^3 and renormalized, with quantitative bounds
checked against explicit truncation slack.  pi^2 never enters as a
float: every formula uses the certified rational bracket
98696/10000 < pi^2 < 98697/10000.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .measures import (
    DiscreteMeasure,
    DomainError,
    IndexSet,
    MarginalFamily,
    ProductGrid,
    all_index_sets,
    project,
    uniform,
)
from .transport import (
    CostGrid,
    DualPotentials,
    solve_dual,
    solve_primal,
)
from . import lp_core
from .feasibility import marginal_constraint_rows

# Certified rational bracket for pi^2; the upper bound is used wherever
# a larger "pi^2" makes the derived inequalities conservative.
PI_SQUARED_LOW = Fraction(98696, 10000)
PI_SQUARED_HIGH = Fraction(98697, 10000)


class TruncationSpec:
    """A finite window {1..N}^3 onto a lattice construction."""

    __slots__ = ("N", "renormalize")

    def __init__(self, N: int, renormalize: bool = True):
        if N < 4:
            raise DomainError("window must cover at least {1..4}")
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "renormalize", bool(renormalize))

    def __setattr__(self, name, value):
        raise AttributeError("TruncationSpec is immutable")

    def __repr__(self):
        return f"TruncationSpec(N={self.N}, renormalize={self.renormalize})"


def _pairs32():
    return all_index_sets(3, 2)


def _family_from_full_measure(mu: DiscreteMeasure) -> MarginalFamily:
    n = len(mu.grid.axes)
    marginals = {alpha: project(mu, alpha) for alpha in all_index_sets(n, 2)}
    return MarginalFamily(n, 2, mu.grid.sizes, marginals)


def _a_points(n: int):
    """The three lattice points (n+1,n,n),(n,n+1,n),(n,n,n+1)."""
    return [(n + 1, n, n), (n, n + 1, n), (n, n, n + 1)]


def _b_points(n: int):
    """The three lattice points (n,n+1,n+1),(n+1,n,n+1),(n+1,n+1,n)."""
    return [(n, n + 1, n + 1), (n + 1, n, n + 1), (n + 1, n + 1, n)]


def unreachable_alpha0() -> Fraction:
    """The mixing weight: strictly below 2/(M pi^2 + 2) by using the
    rational upper bracket for pi^2.  M = max_n 2^-n n^2(n+1)^2/(2n+1),
    scanned over n <= 64 (the maximum sits at n = 4)."""
    M = max(
        Fraction(n * n * (n + 1) * (n + 1), (2 * n + 1) * (1 << n))
        for n in range(1, 65)
    )
    return 2 / (M * PI_SQUARED_HIGH + 2)


def build_unreachable(N: int):
    """Truncated mixture (1-a)mu_p + a mu_eps with the A_n indicator cost.

    mu_p spreads 2/(pi^2 n^2) over each point of A_n; mu_eps is the
    dyadic product 2^(-n1-n2-n3).  Grid cell (i,j,k), 0-based,
    represents the lattice point (i+1, j+1, k+1).  Returns
    (family, cost, alpha0).
    """
    if N < 6:
        raise DomainError("need N >= 6")
    alpha0 = unreachable_alpha0()
    grid = ProductGrid([N, N, N])
    weights = [Fraction(0)] * grid.ncells
    for cell in grid.cells():
        n1, n2, n3 = (c + 1 for c in cell)
        weights[grid.ravel(cell)] = alpha0 * Fraction(1, 1 << (n1 + n2 + n3))
    for n in range(1, N):
        w = (1 - alpha0) * 2 / (PI_SQUARED_HIGH * n * n)
        for pt in _a_points(n):
            weights[grid.ravel(tuple(c - 1 for c in pt))] += w
    total = sum(weights)
    mu = DiscreteMeasure(grid, [w / total for w in weights])
    fam = _family_from_full_measure(mu)
    cost_values = [Fraction(0)] * grid.ncells
    for n in range(1, N):
        for pt in _a_points(n):
            cost_values[grid.ravel(tuple(c - 1 for c in pt))] = Fraction(1)
    return fam, CostGrid(grid, cost_values), alpha0


def unreachable_gamma_bound(m: int, alpha0: Fraction) -> Fraction:
    """Lower bound 2(1-a)/pi^2 (1/m^2 - 1/(m+1)^2) - a/2^m on the mass a
    uniting measure must place on each point of A_m."""
    return (
        2
        * (1 - alpha0)
        / PI_SQUARED_HIGH
        * (Fraction(1, m * m) - Fraction(1, (m + 1) * (m + 1)))
        - alpha0 / (1 << m)
    )


def _mass_extreme(fam: MarginalFamily, cell, sense: str, arithmetic: str):
    """LP extreme of pi(cell) over the uniting polytope.

    Cells where some marginal vanishes carry no mass in any uniting
    measure, so they are dropped up front; a dropped query cell has
    min = max = 0 immediately.
    """
    from .transport import _supported_columns

    grid = fam.full_grid()
    target = grid.ravel(cell)
    columns = _supported_columns(fam)
    if columns is None:
        columns = list(range(grid.ncells))
    elif target not in columns:
        return Fraction(0)
    col_of = {j: t for t, j in enumerate(columns)}
    rows, rhs, _ = marginal_constraint_rows(fam)
    reduced = [
        {col_of[j]: v for j, v in row.items() if j in col_of} for row in rows
    ]
    objective = [Fraction(0)] * len(columns)
    objective[col_of[target]] = Fraction(1)
    sol = lp_core.solve(
        lp_core.LPProblem(objective, reduced, rhs, sense=sense),
        arithmetic=arithmetic,
    )
    if sol.status != "optimal":
        raise DomainError(f"family is {sol.status}")
    return sol.value


def min_mass_at_cell(fam: MarginalFamily, cell, arithmetic: str = "exact"):
    """LP minimum of pi(cell) over all uniting measures of the family."""
    return _mass_extreme(fam, cell, "min", arithmetic)


def max_mass_at_cell(fam: MarginalFamily, cell, arithmetic: str = "exact"):
    """LP maximum of pi(cell) over all uniting measures of the family."""
    return _mass_extreme(fam, cell, "max", arithmetic)


def diagnose_dual_growth(N: int, arithmetic: str = "float"):
    """Diagonal dual magnitudes of the truncated unreachable instance.

    Solves the dual LP and returns the list, indexed n = 1..N, of
    |f12(n,n)| + |f13(n,n)| + |f23(n,n)|.  The n^-2-weighted total of
    this list grows with the window size: at full scale the dual
    supremum is not attained and the potentials blow up along the
    diagonal.
    """
    fam, cost, _ = build_unreachable(N)
    potentials, _ = solve_dual(fam, cost, arithmetic=arithmetic)
    grid = fam.full_grid()
    sums = []
    for n in range(1, N + 1):
        idx = grid.subgrid(IndexSet([1, 2])).ravel((n - 1, n - 1))
        s = sum(
            abs(potentials[alpha][idx]) for alpha in _pairs32()
        )
        sums.append(s)
    return sums


def weighted_diagonal_growth(sums) -> float:
    """sum over n of n^-2 * sums[n-1]; the unboundedness witness."""
    return float(sum(Fraction(1, n * n) * Fraction(s) for n, s in enumerate(sums, 1)))


def build_nonstrong(N: int):
    """Truncated measure with weight 1/(pi^2 n^2) on A_n and B_n points,
    and the B_n indicator cost.  Returns (family, cost)."""
    if N < 6:
        raise DomainError("need N >= 6")
    grid = ProductGrid([N, N, N])
    weights = [Fraction(0)] * grid.ncells
    for n in range(1, N):
        w = Fraction(1) / (PI_SQUARED_HIGH * n * n)
        for pt in _a_points(n) + _b_points(n):
            weights[grid.ravel(tuple(c - 1 for c in pt))] += w
    total = sum(weights)
    mu = DiscreteMeasure(grid, [w / total for w in weights])
    fam = _family_from_full_measure(mu)
    cost_values = [Fraction(0)] * grid.ncells
    for n in range(1, N):
        for pt in _b_points(n):
            cost_values[grid.ravel(tuple(c - 1 for c in pt))] = Fraction(1)
    return fam, CostGrid(grid, cost_values)


def verify_unique_uniting(fam: MarginalFamily, cells, arithmetic: str = "exact"):
    """Check min pi(cell) == max pi(cell) over the uniting polytope for
    the given cells; returns the common values (proves uniqueness when
    the cells span the support and the polytope is a point)."""
    out = {}
    for cell in cells:
        lo = min_mass_at_cell(fam, cell, arithmetic)
        hi = max_mass_at_cell(fam, cell, arithmetic)
        if lo != hi:
            return None
        out[tuple(cell)] = lo
    return out


class PiecewiseDual32:
    """The closed-form dual of the discontinuous example.

    f12 = 0; f13(x1,x3) and f23(x2,x3) vanish for x3 < 2/3 and equal
    x_i + (3/2)x3 - 3/2 beyond.  The sum F jumps across x3 = 2/3.
    """

    __slots__ = ("threshold",)

    def __init__(self):
        object.__setattr__(self, "threshold", Fraction(2, 3))

    def __setattr__(self, name, value):
        raise AttributeError("PiecewiseDual32 is immutable")

    def f12(self, x1, x2) -> Fraction:
        return Fraction(0)

    def f13(self, x1, x3) -> Fraction:
        if x3 < self.threshold:
            return Fraction(0)
        return Fraction(x1) + Fraction(3, 2) * Fraction(x3) - Fraction(3, 2)

    f23 = f13

    def F(self, x1, x2, x3) -> Fraction:
        return self.f13(x1, x3) + self.f23(x2, x3)

    def potentials(self, N: int) -> DualPotentials:
        """Sampled at cell centers (i + 1/2)/N of the N^3 grid."""
        sub = ProductGrid([N, N])

        def center(i):
            return Fraction(2 * i + 1, 2 * N)

        out = {}
        for alpha in _pairs32():
            if alpha == IndexSet([1, 2]):
                out[alpha] = [Fraction(0)] * sub.ncells
            else:
                out[alpha] = [
                    self.f13(center(c[0]), center(c[1])) for c in sub.cells()
                ]
        return DualPotentials(out)


def build_discontinuous(N: int):
    """Uniform pairwise marginals on the N^3 grid with the cost
    max(0, x1 + x2 + 3 x3 - 3) at cell centers, plus the closed-form
    dual.  Returns (family, cost, PiecewiseDual32)."""
    if N % 6:
        raise DomainError("N must be divisible by 6")
    marginals = {
        alpha: uniform([N, N], axes=tuple(alpha)) for alpha in _pairs32()
    }
    fam = MarginalFamily(3, 2, [N, N, N], marginals)
    grid = fam.full_grid()

    def cost_fn(i, j, k):
        x = Fraction(2 * i + 1, 2 * N)
        y = Fraction(2 * j + 1, 2 * N)
        z = Fraction(2 * k + 1, 2 * N)
        return max(Fraction(0), x + y + 3 * z - 3)

    return fam, CostGrid.from_function(grid, cost_fn), PiecewiseDual32()


def cyclic_coupling(N: int) -> DiscreteMeasure:
    """Weight 1/N^2 on every cell with i + j + k = 0 (mod N).

    Each pair of coordinates determines the third, so all three
    pairwise projections are exactly uniform (asserted).
    """
    if N < 1:
        raise DomainError("need N >= 1")
    grid = ProductGrid([N, N, N])
    w = Fraction(1, N * N)
    weights = [Fraction(0)] * grid.ncells
    for i in range(N):
        for j in range(N):
            weights[grid.ravel((i, j, (-i - j) % N))] = w
    mu = DiscreteMeasure(grid, weights)
    flat = uniform([N, N])
    for alpha in _pairs32():
        assert tuple(project(mu, alpha).weights) == tuple(flat.weights)
    return mu


def frac_coupling(a1: int, a2: int, a3: int, N: int) -> DiscreteMeasure:
    """The coupling concentrated on frac(a1 x1 + a2 x2 + a3 x3) = 0.

    Mixture over shift triples t_i in {0..a_i-1} of the cyclic coupling
    squeezed into the box of side 1/a_i at offset t_i/a_i; pairwise
    projections stay exactly uniform (asserted).
    """
    a = (int(a1), int(a2), int(a3))
    if any(v < 1 for v in a):
        raise DomainError("coefficients must be >= 1")
    if any(N % v for v in a):
        raise DomainError(f"each coefficient must divide N = {N}")
    M = [N // v for v in a]
    grid = ProductGrid([N, N, N])
    weights = [Fraction(0)] * grid.ncells
    w = Fraction(1, a[0] * a[1] * a[2] * N * N)
    for t in itertools.product(*(range(v) for v in a)):
        base = [t[i] * M[i] for i in range(3)]
        for v1 in range(N):
            for v2 in range(N):
                v3 = (-v1 - v2) % N
                cell = (
                    base[0] + v1 // a[0],
                    base[1] + v2 // a[1],
                    base[2] + v3 // a[2],
                )
                weights[grid.ravel(cell)] += w
    mu = DiscreteMeasure(grid, weights)
    flat = uniform([N, N])
    for alpha in _pairs32():
        assert tuple(project(mu, alpha).weights) == tuple(flat.weights)
    return mu


def composite_pi(N: int) -> DiscreteMeasure:
    """The near-optimal uniting measure of the discontinuous example.

    Lebesgue mass 1/3 below x3 = 1/3, plus 2/3 of the (1,1,2) fractional
    coupling pushed through z -> (2z + 1)/3 into the band x3 >= 1/3.
    All pairwise projections are exactly uniform (asserted).
    """
    if N % 6:
        raise DomainError("N must be divisible by 6")
    grid = ProductGrid([N, N, N])
    weights = [Fraction(0)] * grid.ncells
    low = Fraction(1, N * N * N)
    third = N // 3
    for i in range(N):
        for j in range(N):
            for k in range(third):
                weights[grid.ravel((i, j, k))] += low
    fine = frac_coupling(1, 1, 2, 2 * N)
    scale = Fraction(2, 3)
    for idx, w in enumerate(fine.weights):
        if w == 0:
            continue
        w1, w2, w3 = fine.grid.unravel(idx)
        cell = (w1 // 2, w2 // 2, (w3 + N) // 3)
        weights[grid.ravel(cell)] += scale * w
    mu = DiscreteMeasure(grid, weights)
    flat = uniform([N, N])
    for alpha in _pairs32():
        assert tuple(project(mu, alpha).weights) == tuple(flat.weights)
    return mu


def build_uniformband(N: int):
    """The N x N x 3 instance with uniform mu_12 and product mu_13,
    mu_23; cost x*y*z with x, y at cell centers and z in {0,1,2}."""
    if N < 3:
        raise DomainError("need N >= 3")
    marginals = {
        IndexSet([1, 2]): uniform([N, N], axes=(1, 2)),
        IndexSet([1, 3]): uniform([N, 3], axes=(1, 3)),
        IndexSet([2, 3]): uniform([N, 3], axes=(2, 3)),
    }
    fam = MarginalFamily(3, 2, [N, N, 3], marginals)

    def cost_fn(i, j, k):
        return Fraction(2 * i + 1, 2 * N) * Fraction(2 * j + 1, 2 * N) * k

    return fam, CostGrid.from_function(fam.full_grid(), cost_fn)


def eval_fA(A, x, y) -> Fraction:
    """The polynomial dual potential f_A(x, y)."""
    A, x, y = Fraction(A), Fraction(x), Fraction(y)
    if A < 0:
        raise DomainError("A must be >= 0")
    return (
        -Fraction(1, 12) * (x**3 + y**3)
        - Fraction(1, 2) * x * y * (x + y)
        - (A - 2) * (x * x / 12 + x * y / 3 + y * y / 12)
        - (1 - 2 * A) * (x + y) / 12
        - A / 18
    )


FA_KAPPA = Fraction(1, 6)


def fA_defect(A, x, y, z) -> Fraction:
    """xyz - [f_A(x,y) + f_A(x,z) + f_A(y,z)]; equals
    (1/6)(x+y+z-1)^2 (x+y+z+A) identically."""
    A, x, y, z = Fraction(A), Fraction(x), Fraction(y), Fraction(z)
    return x * y * z - (eval_fA(A, x, y) + eval_fA(A, x, z) + eval_fA(A, y, z))


def build_nonuniform_2x2x2() -> MarginalFamily:
    """Pairwise marginals 1/3 off the diagonal of {0,1}^2 and 1/6 on it.

    The uniting polytope is a single point: the measure vanishing at
    (0,0,0) and (1,1,1) and equal to 1/6 elsewhere.
    """
    marginals = {}
    for alpha in _pairs32():
        sub = ProductGrid([2, 2], axes=tuple(alpha))
        w = [
            Fraction(1, 6) if c[0] == c[1] else Fraction(1, 3)
            for c in sub.cells()
        ]
        marginals[alpha] = DiscreteMeasure(sub, w)
    return MarginalFamily(3, 2, [2, 2, 2], marginals)
