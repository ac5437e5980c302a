"""Primal and dual (n,k)-transport problems as exact LPs.

Solving is a single simplex run: the primal optimum is the vertex, the
dual potentials are the projection-row prices.  On top of that the
module provides the base-point decomposition of an (n,k)-function into
per-alpha potentials with explicit norm control, and the bounded-dual
extraction for (3,2) instances with product marginals.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Mapping, Sequence

from . import lp_core
from .feasibility import (
    CoefficientVector,
    FeasibilityVerdict,
    PreconditionError,
    kellerer_check,
    marginal_constraint_rows,
)
from .measures import (
    DiscreteMeasure,
    DomainError,
    IndexSet,
    MarginalFamily,
    ProductGrid,
    all_index_sets,
    product,
    project,
)


class InfeasibleFamilyError(Exception):
    """The marginal family admits no uniting measure.

    Carries the FeasibilityVerdict whose potentials certify emptiness.
    """

    def __init__(self, verdict: FeasibilityVerdict):
        super().__init__("marginal family is infeasible")
        self.verdict = verdict


class CostGrid:
    """A cost function given by one rational value per full-grid cell."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: ProductGrid, values: Sequence):
        if len(values) != grid.ncells:
            raise DomainError(f"expected {grid.ncells} values, got {len(values)}")
        object.__setattr__(
            self,
            "grid",
            grid,
        )
        object.__setattr__(
            self,
            "values",
            tuple(Fraction(v) if isinstance(v, int) else v for v in values),
        )

    def __setattr__(self, name, value):
        raise AttributeError("CostGrid is immutable")

    def at(self, cell: Sequence[int]):
        return self.values[self.grid.ravel(cell)]

    def linf(self):
        return max(abs(v) for v in self.values)

    @staticmethod
    def from_function(grid: ProductGrid, fn) -> "CostGrid":
        return CostGrid(grid, [fn(*cell) for cell in grid.cells()])

    def __repr__(self):
        return f"CostGrid(grid={self.grid})"


class DualPotentials:
    """A map alpha -> grid function f_alpha on grid_alpha.

    Feasible for cost c iff sum_alpha f_alpha(x_alpha) <= c(x) cellwise.
    """

    __slots__ = ("potentials",)

    def __init__(self, potentials: Mapping[IndexSet, Sequence]):
        object.__setattr__(
            self,
            "potentials",
            {
                alpha: tuple(
                    Fraction(v) if isinstance(v, int) else v for v in values
                )
                for alpha, values in potentials.items()
            },
        )

    def __setattr__(self, name, value):
        raise AttributeError("DualPotentials is immutable")

    def __getitem__(self, alpha: IndexSet):
        return self.potentials[alpha]

    def index_sets(self) -> list[IndexSet]:
        return sorted(self.potentials, key=lambda a: a.members)

    def total_at(self, grid: ProductGrid, cell: Sequence[int]):
        """sum_alpha f_alpha(x_alpha) at a full-grid cell."""
        s = Fraction(0)
        for alpha, values in self.potentials.items():
            sub = grid.subgrid(alpha)
            positions = [grid.axes.index(a) for a in alpha]
            s += values[sub.ravel([cell[p] for p in positions])]
        return s

    def value_against(self, fam: MarginalFamily):
        """sum_alpha int f_alpha d mu_alpha."""
        s = Fraction(0)
        for alpha, values in self.potentials.items():
            s += sum(f * w for f, w in zip(values, fam[alpha].weights))
        return s

    def shifted(self, offsets: Mapping[IndexSet, Fraction]) -> "DualPotentials":
        return DualPotentials(
            {
                alpha: [v + offsets.get(alpha, 0) for v in values]
                for alpha, values in self.potentials.items()
            }
        )

    def __repr__(self):
        keys = ",".join(a.key() for a in self.index_sets())
        return f"DualPotentials(alphas=[{keys}])"


class SolveReport:
    """Joint outcome of one primal/dual solve with its duality gap."""

    __slots__ = ("pi", "value", "potentials", "dual_value", "gap")

    def __init__(self, pi, value, potentials, dual_value, gap):
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "potentials", potentials)
        object.__setattr__(self, "dual_value", dual_value)
        object.__setattr__(self, "gap", gap)

    def __setattr__(self, name, value):
        raise AttributeError("SolveReport is immutable")

    def to_json(self) -> dict:
        from .measures import measure_to_json

        return {
            "value": str(Fraction(self.value)),
            "gap": str(Fraction(self.gap)),
            "pi": measure_to_json(self.pi),
            "potentials": {
                alpha.key(): [str(Fraction(v)) for v in values]
                for alpha, values in self.potentials.potentials.items()
            },
        }

    def __repr__(self):
        return f"SolveReport(value={self.value}, gap={self.gap})"


def _check_cost(fam: MarginalFamily, cost: CostGrid):
    if cost.grid != fam.full_grid():
        raise DomainError("cost grid does not match the family's full grid")


def _supported_columns(fam: MarginalFamily) -> list[int] | None:
    """Columns that can carry mass: every marginal weight positive.

    Returns None when no column can be dropped.
    """
    grid = fam.full_grid()
    keep = []
    for j in range(grid.ncells):
        cell = grid.unravel(j)
        ok = True
        for alpha in fam.index_sets():
            sub = grid.subgrid(alpha)
            positions = [grid.axes.index(a) for a in alpha]
            if fam[alpha].weights[sub.ravel([cell[p] for p in positions])] == 0:
                ok = False
                break
        if ok:
            keep.append(j)
    return None if len(keep) == grid.ncells else keep


def _normalize(potentials: dict, fam: MarginalFamily) -> DualPotentials:
    """Force f_alpha(first cell) = 0 for all but the first alpha."""
    alphas = fam.index_sets()
    offsets = {}
    carried = Fraction(0)
    for alpha in alphas[1:]:
        s = potentials[alpha][0]
        offsets[alpha] = -s
        carried += s
    offsets[alphas[0]] = carried
    return DualPotentials(potentials).shifted(offsets)


def _solve_lp(fam: MarginalFamily, cost: CostGrid, arithmetic: str, columns):
    rows, rhs, _ = marginal_constraint_rows(fam)
    grid = fam.full_grid()
    if columns is None:
        objective = list(cost.values)
        problem = lp_core.LPProblem(objective, rows, rhs)
        sol = lp_core.solve(problem, arithmetic=arithmetic)
        return sol, list(range(grid.ncells))
    col_of = {j: t for t, j in enumerate(columns)}
    objective = [cost.values[j] for j in columns]
    reduced_rows = [
        {col_of[j]: v for j, v in row.items() if j in col_of} for row in rows
    ]
    problem = lp_core.LPProblem(objective, reduced_rows, rhs)
    sol = lp_core.solve(problem, arithmetic=arithmetic)
    return sol, columns


def _dual_from_prices(fam: MarginalFamily, y: Sequence) -> dict:
    potentials = {}
    offset = 0
    grid = fam.full_grid()
    for alpha in fam.index_sets():
        sub = grid.subgrid(alpha)
        potentials[alpha] = [y[offset + t] for t in range(sub.ncells)]
        offset += sub.ncells
    return potentials


def _solve_both(fam: MarginalFamily, cost: CostGrid, arithmetic: str):
    """One simplex run giving (pi, value, normalized potentials, dual value).

    Cells where some marginal vanishes are dropped first (they can carry
    no mass); if the resulting dual prices violate feasibility on a
    dropped cell, the full LP is re-solved.
    """
    _check_cost(fam, cost)
    grid = fam.full_grid()
    for columns in (_supported_columns(fam), None):
        sol, cols = _solve_lp(fam, cost, arithmetic, columns)
        if sol.status == "infeasible":
            verdict = kellerer_check(fam, arithmetic=arithmetic)
            raise InfeasibleFamilyError(verdict)
        assert sol.status == "optimal", sol.status
        weights = [Fraction(0)] * grid.ncells
        for t, j in enumerate(cols):
            weights[j] = Fraction(sol.x[t]) if arithmetic == "exact" else sol.x[t]
        if arithmetic == "exact":
            pi = DiscreteMeasure(grid, weights)
        else:
            pi = DiscreteMeasure(
                grid, [Fraction(w) if w > 0 else Fraction(0) for w in weights]
            )
        raw = _dual_from_prices(fam, sol.y)
        potentials = _normalize(raw, fam)
        if columns is not None and arithmetic == "exact":
            # Dual prices from the reduced LP may overshoot on dropped
            # cells.  Every dropped cell has a zero-weight marginal
            # section, and potentials there carry no dual value, so
            # sinking them restores feasibility without losing optimality.
            dropped = set(range(grid.ncells)) - set(cols)
            bad = any(
                potentials.total_at(grid, grid.unravel(j)) > cost.values[j]
                for j in dropped
            )
            if bad:
                sink = (
                    sum(max(abs(v) for v in potentials[a]) for a in fam.index_sets())
                    + max(abs(v) for v in cost.values)
                    + 1
                )
                repaired = {}
                for alpha in fam.index_sets():
                    repaired[alpha] = [
                        v if w != 0 else min(v, -sink)
                        for v, w in zip(potentials[alpha], fam[alpha].weights)
                    ]
                potentials = DualPotentials(repaired)
                still_bad = any(
                    potentials.total_at(grid, grid.unravel(j)) > cost.values[j]
                    for j in dropped
                )
                if still_bad:
                    continue
        value = sol.value
        dual_value = potentials.value_against(fam)
        return pi, value, potentials, dual_value
    raise AssertionError("unreachable: full LP produced no usable duals")


def solve_primal(fam: MarginalFamily, cost: CostGrid, arithmetic: str = "exact"):
    """Minimize int c d pi over uniting measures; returns (pi, value)."""
    pi, value, _, _ = _solve_both(fam, cost, arithmetic)
    return pi, value


def solve_dual(fam: MarginalFamily, cost: CostGrid, arithmetic: str = "exact"):
    """Maximize sum int f_alpha d mu_alpha over feasible potentials.

    Potentials are normalized to f_alpha(first cell) = 0 for all but the
    first alpha, making the output deterministic.
    """
    _, _, potentials, dual_value = _solve_both(fam, cost, arithmetic)
    return potentials, dual_value


def verify_gap(fam: MarginalFamily, cost: CostGrid, arithmetic: str = "exact") -> SolveReport:
    """Solve both problems and assert a zero (exact) or tiny (float) gap."""
    pi, value, potentials, dual_value = _solve_both(fam, cost, arithmetic)
    gap = value - dual_value
    if arithmetic == "exact":
        assert gap == 0, f"exact duality gap {gap} != 0"
    else:
        assert abs(gap) <= 1e-7 * (1 + abs(float(value))), f"float gap {gap}"
    return SolveReport(pi, value, potentials, dual_value, gap)


def decomp_lambda(n: int, k: int) -> CoefficientVector:
    """Coefficients of the base-point decomposition of an (n,k)-function.

    Unique solution with lambda_k = 1 of
        sum_{t=a}^{k} lambda_t C(n-t, k-t) C(n-k, t-a) = 0,  a = 0..k-1.
    """
    import math

    if not 1 <= k < n:
        raise DomainError(f"need 1 <= k < n, got n={n}, k={k}")
    lam = [Fraction(0)] * (k + 1)
    lam[k] = Fraction(1)
    for a in range(k - 1, -1, -1):
        acc = sum(
            lam[t] * math.comb(n - t, k - t) * math.comb(n - k, t - a)
            for t in range(a + 1, k + 1)
        )
        lam[a] = -acc / math.comb(n - a, k - a)
    return CoefficientVector(lam)


def nk_decompose(
    F: CostGrid, y: Sequence[int], lam: CoefficientVector
) -> DualPotentials:
    """Split F into potentials f_alpha via sections through base cell y.

    f_alpha(x_alpha) = sum over beta subset of alpha of
    lambda_{|beta|} F(x_beta, y off beta).  When F is an exact
    (n,k)-function the potentials sum back to F on every cell.
    """
    grid = F.grid
    n = len(grid.axes)
    k = len(lam) - 1
    y = tuple(y)
    if len(y) != n:
        raise DomainError(f"base cell must have {n} coordinates")
    grid.ravel(y)  # validates the cell
    potentials = {}
    for alpha in all_index_sets(n, k):
        sub = grid.subgrid(alpha)
        positions = [grid.axes.index(a) for a in alpha]
        values = []
        for cell_alpha in sub.cells():
            total = Fraction(0)
            for size in range(k + 1):
                if lam[size] == 0:
                    continue
                for beta in itertools.combinations(range(len(positions)), size):
                    full = list(y)
                    for t in beta:
                        full[positions[t]] = cell_alpha[t]
                    total += lam[size] * F.values[grid.ravel(full)]
            values.append(total)
        potentials[alpha] = values
    return DualPotentials(potentials)


def _weighted_l1(values, weight_of) -> Fraction:
    return sum(abs(v) * w for v, w in zip(values, weight_of))


def good_basepoint(c: CostGrid, refs: Sequence[DiscreteMeasure]) -> tuple[int, ...]:
    """A cell y whose sections of c have controlled L1 norms.

    For every nonempty proper subset alpha the section
    x_alpha -> c(x_alpha, y off alpha) satisfies
    ||c_alpha||_{L1(nu_alpha)} <= 2^(n+1) ||c||_{L1(nu)}.  Cells of
    nu-mass >= 1/2 qualify, so a lexicographic scan (with a seeded
    random fallback) terminates.
    """
    grid = c.grid
    n = len(grid.axes)
    nu = product(list(refs))
    norm_c = sum(abs(v) * w for v, w in zip(c.values, nu.weights))
    bound = (2 ** (n + 1)) * norm_c
    subsets = [
        IndexSet(s)
        for size in range(1, n)
        for s in itertools.combinations(grid.axes, size)
    ]

    def qualifies(cell) -> bool:
        for alpha in subsets:
            sub = grid.subgrid(alpha)
            positions = [grid.axes.index(a) for a in alpha]
            nu_alpha = product([refs[p] for p in positions])
            section = Fraction(0)
            for t, sub_cell in enumerate(sub.cells()):
                full = list(cell)
                for p, v in zip(positions, sub_cell):
                    full[p] = v
                section += abs(c.values[grid.ravel(full)]) * nu_alpha.weights[t]
            if section > bound:
                return False
        return True

    failures = 0
    for cell in grid.cells():
        if qualifies(cell):
            return tuple(cell)
        failures += 1
        if failures >= 2 ** (n + 1):
            break
    rng = random.Random(0)
    while True:
        cell = tuple(rng.randrange(s) for s in grid.sizes)
        if qualifies(cell):
            return cell


def check_dual_feasible(d: DualPotentials, c: CostGrid):
    """Max over cells of sum_alpha f_alpha - c; <= 0 means feasible."""
    grid = c.grid
    worst = None
    for j in range(grid.ncells):
        v = d.total_at(grid, grid.unravel(j)) - c.values[j]
        worst = v if worst is None or v > worst else worst
    return worst


def complementary_slackness(
    pi: DiscreteMeasure, d: DualPotentials, c: CostGrid
) -> list:
    """Cells carrying pi-mass where the dual sum is strictly below cost.

    Empty iff (pi, d) is a jointly optimal feasible pair.
    """
    grid = c.grid
    out = []
    for j, w in enumerate(pi.weights):
        if w <= 0:
            continue
        cell = grid.unravel(j)
        slack = c.values[j] - d.total_at(grid, cell)
        if slack != 0:
            out.append((cell, slack))
    return out


def extract_bounded_dual(
    fam: MarginalFamily, c: CostGrid, d: DualPotentials
) -> DualPotentials:
    """Rebuild an optimal (3,2) dual with uniformly bounded potentials.

    Requires product pairwise marginals (mu_ij = mu_i x mu_j) and c >= 0.
    The sum F = sum f_ij is bounded below by -12||c||_inf wherever the
    product measure charges the cell; F is clamped there on null cells,
    decomposed through a good base point with decomp_lambda(3,2), and
    the result is floor-clamped at -80/3 ||c||_inf on null cells.  The
    output keeps the dual value exactly and stays feasible, with every
    value in [-80/3 ||c||_inf, 40/3 ||c||_inf].
    """
    if (fam.n, fam.k) != (3, 2):
        raise PreconditionError("extract_bounded_dual handles (3,2) only")
    _check_cost(fam, c)
    if any(v < 0 for v in c.values):
        raise PreconditionError("cost must be nonnegative")
    grid = fam.full_grid()
    mu_i = []
    for a in (1, 2, 3):
        from .measures import lower_marginal

        mu_i.append(lower_marginal(fam, IndexSet([a])))
    for alpha in fam.index_sets():
        i, j = alpha.members
        if fam[alpha] != project(product([mu_i[i - 1], mu_i[j - 1]]), alpha):
            raise PreconditionError(
                f"marginal for {alpha} is not the product of its 1-marginals"
            )
    # d must be optimal: its value must match the primal optimum.
    _, opt_value = solve_primal(fam, c)
    d_value = d.value_against(fam)
    if d_value != opt_value:
        raise PreconditionError(
            f"dual value {d_value} != primal optimum {opt_value}"
        )
    if check_dual_feasible(d, c) > 0:
        raise PreconditionError("input potentials are not feasible")

    norm = c.linf()
    floor_F = -12 * norm
    nu = product(mu_i)
    F_values = [d.total_at(grid, grid.unravel(t)) for t in range(grid.ncells)]
    bad = set()
    for t, v in enumerate(F_values):
        if v < floor_F:
            # Bounded below everywhere the product measure charges; only
            # null cells may fall under the floor.
            assert nu.weights[t] == 0, (
                f"F = {v} < -12||c|| on a cell of positive product mass"
            )
            bad.add(t)
    F = CostGrid(grid, F_values)

    # The base point must (a) keep section L1 norms of F controlled and
    # (b) have every section through it avoid the bad set, so the
    # decomposition only reads F values >= -12||c||_inf and the
    # reconstruction identity survives untouched.
    def sections_clear(cell) -> bool:
        if grid.ravel(cell) in bad:
            return False
        if not bad:
            return True
        for alpha in itertools.chain(all_index_sets(3, 1), all_index_sets(3, 2)):
            positions = [grid.axes.index(a) for a in alpha]
            for sub_cell in grid.subgrid(alpha).cells():
                full = list(cell)
                for p, v in zip(positions, sub_cell):
                    full[p] = v
                if grid.ravel(full) in bad:
                    return False
        return True

    y = good_basepoint(F, mu_i)
    if not sections_clear(y):
        y = next(
            (tuple(cell) for cell in grid.cells() if sections_clear(cell)), None
        )
    assert y is not None, "no base cell with sections avoiding the bad set"
    lam = decomp_lambda(3, 2)
    out = nk_decompose(F, y, lam)

    floor_g = Fraction(-80, 3) * norm
    ceil_g = Fraction(40, 3) * norm
    clamped = {}
    for alpha in fam.index_sets():
        values = []
        for t, v in enumerate(out[alpha]):
            if v < floor_g:
                assert fam[alpha].weights[t] == 0, (
                    f"potential below the clamp floor on a charged cell of {alpha}"
                )
                v = floor_g
            assert v <= ceil_g, f"potential {v} above 40/3 ||c||_inf"
            values.append(v)
        clamped[alpha] = values
    result = DualPotentials(clamped)
    assert result.value_against(fam) == opt_value, "extraction changed the value"
    assert check_dual_feasible(result, c) <= 0, "extraction broke feasibility"
    return result
