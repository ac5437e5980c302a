"""Desk-scale builders: truncated N^3 instances, fractional couplings,
the composite near-optimal coupling, polynomial duals, and the rigid
2x2x2 family."""

import math
from fractions import Fraction

import pytest

from mmk import case_studies as cs
from mmk.measures import (
    DiscreteMeasure,
    DomainError,
    IndexSet,
    all_index_sets,
    is_consistent,
    project,
    uniform,
)
from mmk.transport import check_dual_feasible, solve_primal


class TestPiBracket:
    def test_brackets_pi_squared(self):
        assert float(cs.PI_SQUARED_LOW) < math.pi**2 < float(cs.PI_SQUARED_HIGH)
        assert cs.PI_SQUARED_HIGH - cs.PI_SQUARED_LOW == Fraction(1, 10000)


class TestUnreachable:
    def test_alpha0_value(self):
        a0 = cs.unreachable_alpha0()
        assert a0 == Fraction(2400, 35299)
        assert 0 < a0 < 1

    def test_build_shapes_and_mass(self):
        fam, cost, a0 = cs.build_unreachable(6)
        assert fam.full_grid().sizes == (6, 6, 6)
        assert all(fam[a].mass == 1 for a in fam.index_sets())
        assert is_consistent(fam)
        assert sum(1 for v in cost.values if v == 1) == 3 * 5
        assert set(cost.values) == {Fraction(0), Fraction(1)}

    def test_gamma_bound_signs(self):
        a0 = cs.unreachable_alpha0()
        for m in (1, 2, 3, 5):
            assert cs.unreachable_gamma_bound(m, a0) > 0
        # The mixing weight is tuned to make the bound tight exactly at
        # the maximizing index m = 4.
        assert cs.unreachable_gamma_bound(4, a0) == 0

    def test_mass_extremes_bound_every_uniting_measure(self):
        fam, cost, a0 = cs.build_unreachable(6)
        # On each A_1 point the LP minimum must clear the closed-form bound.
        bound = cs.unreachable_gamma_bound(1, a0)
        for pt in cs._a_points(1):
            cell = tuple(c - 1 for c in pt)
            lo = cs.min_mass_at_cell(fam, cell, arithmetic="float")
            assert lo >= float(bound) - 1e-8

    def test_min_le_max(self):
        fam, _, _ = cs.build_unreachable(6)
        cell = (0, 0, 0)
        lo = cs.min_mass_at_cell(fam, cell)
        hi = cs.max_mass_at_cell(fam, cell)
        assert 0 <= lo <= hi

    def test_dual_growth_diagnostic(self):
        sums = cs.diagnose_dual_growth(6)
        assert len(sums) == 6
        assert all(s >= 0 for s in sums)
        g6 = cs.weighted_diagonal_growth(sums)
        g8 = cs.weighted_diagonal_growth(cs.diagnose_dual_growth(8))
        assert g8 > g6 > 0

    def test_domain(self):
        with pytest.raises(DomainError):
            cs.build_unreachable(4)


class TestNonstrong:
    def test_unique_uniting_on_support(self):
        fam, cost = cs.build_nonstrong(6)
        grid = fam.full_grid()
        support = [
            tuple(c - 1 for c in pt)
            for n in range(1, 6)
            for pt in cs._a_points(n) + cs._b_points(n)
        ]
        values = cs.verify_unique_uniting(fam, support)
        assert values is not None
        assert all(v > 0 for v in values.values())

    def test_unique_measure_is_primal_optimum(self):
        fam, cost = cs.build_nonstrong(6)
        pi, value = solve_primal(fam, cost)
        # Value is the cost mass of the unique uniting measure: the total
        # weight on the B_n points.
        expected = sum(
            w for w, c in zip(pi.weights, cost.values) if c == 1
        )
        assert value == expected > 0


class TestDiscontinuous:
    def test_closed_form_dual_is_feasible_and_worth_one_sixth(self):
        fam, cost, dual = cs.build_discontinuous(12)
        pot = dual.potentials(12)
        assert check_dual_feasible(pot, cost) <= 0
        assert pot.value_against(fam) == Fraction(1, 6)

    def test_F_jumps_at_threshold(self):
        dual = cs.PiecewiseDual32()
        x = Fraction(1)
        below = dual.F(x, x, Fraction(2, 3) - Fraction(1, 1000))
        at = dual.F(x, x, Fraction(2, 3))
        assert at - below > Fraction(1, 2)

    def test_domain(self):
        with pytest.raises(DomainError):
            cs.build_discontinuous(8)


class TestCouplings:
    def test_cyclic_support_and_mass(self):
        mu = cs.cyclic_coupling(5)
        assert mu.mass == 1
        assert sum(1 for w in mu.weights if w > 0) == 25
        grid = mu.grid
        for j, w in enumerate(mu.weights):
            i, jj, k = grid.unravel(j)
            assert (w > 0) == ((i + jj + k) % 5 == 0)

    def test_frac_support_meets_level_surface(self):
        # Every charged cell's box must straddle an integer level of
        # a1 x1 + a2 x2 + a3 x3.
        for a in [(1, 1, 2), (1, 2, 3), (2, 2, 2)]:
            N = 12
            mu = cs.frac_coupling(*a, N)
            assert mu.mass == 1
            grid = mu.grid
            for j, w in enumerate(mu.weights):
                if w == 0:
                    continue
                cell = grid.unravel(j)
                lo = sum(Fraction(ai * ci, N) for ai, ci in zip(a, cell))
                hi = sum(
                    Fraction(ai * (ci + 1), N) for ai, ci in zip(a, cell)
                )
                assert math.floor(hi) >= math.ceil(lo)

    def test_frac_reduces_to_cyclic(self):
        assert cs.frac_coupling(1, 1, 1, 5).weights == cs.cyclic_coupling(5).weights

    def test_frac_domain(self):
        with pytest.raises(DomainError):
            cs.frac_coupling(1, 1, 5, 12)

    def test_composite_structure(self):
        mu = cs.composite_pi(6)
        assert mu.mass == 1
        grid = mu.grid
        low_mass = sum(
            w for j, w in enumerate(mu.weights) if grid.unravel(j)[2] < 2
        )
        # The slab below x3 = 1/3 holds exactly its Lebesgue share plus
        # nothing from the band part.
        assert low_mass == Fraction(1, 3)

    def test_composite_near_optimal_value(self):
        fam, cost, _ = cs.build_discontinuous(6)
        mu = cs.composite_pi(6)
        value = sum(w * v for w, v in zip(mu.weights, cost.values))
        assert abs(value - Fraction(1, 6)) <= Fraction(2, 6)


class TestUniformband:
    def test_marginals(self):
        fam, cost = cs.build_uniformband(6)
        assert fam.full_grid().sizes == (6, 6, 3)
        assert fam[IndexSet([1, 2])] == uniform([6, 6], axes=(1, 2))
        assert cost.at((5, 5, 2)) == Fraction(11, 12) * Fraction(11, 12) * 2

    def test_solution_is_bang_bang(self):
        fam, cost = cs.build_uniformband(6)
        pi, _ = solve_primal(fam, cost)
        allowed = {Fraction(0), Fraction(1, 36)}
        assert set(pi.weights) <= allowed


class TestPolynomialDuals:
    def test_defect_identity_symbolically(self):
        import sympy

        A, x, y, z = sympy.symbols("A x y z")

        def fA(u, v):
            return (
                -sympy.Rational(1, 12) * (u**3 + v**3)
                - sympy.Rational(1, 2) * u * v * (u + v)
                - (A - 2) * (u * u / 12 + u * v / 3 + v * v / 12)
                - (1 - 2 * A) * (u + v) / 12
                - A / 18
            )

        defect = x * y * z - (fA(x, y) + fA(x, z) + fA(y, z))
        target = sympy.Rational(1, 6) * (x + y + z - 1) ** 2 * (x + y + z + A)
        assert sympy.simplify(sympy.expand(defect - target)) == 0

    def test_defect_matches_kappa_form(self):
        import random

        rng = random.Random(24)
        for _ in range(50):
            A = Fraction(rng.randint(0, 4))
            x, y, z = (
                Fraction(rng.randint(0, 12), 12) for _ in range(3)
            )
            s = x + y + z
            assert cs.fA_defect(A, x, y, z) == cs.FA_KAPPA * (s - 1) ** 2 * (
                s + A
            )

    def test_defect_nonnegative_on_unit_cube(self):
        import random

        rng = random.Random(25)
        for _ in range(50):
            A = Fraction(rng.randint(0, 3))
            x, y, z = (Fraction(rng.randint(0, 10), 10) for _ in range(3))
            assert cs.fA_defect(A, x, y, z) >= 0

    def test_zero_exactly_on_plane(self):
        for x, y in [(Fraction(1, 4), Fraction(1, 4)), (0, 1), (Fraction(1, 3), 0)]:
            z = 1 - Fraction(x) - Fraction(y)
            assert cs.fA_defect(2, x, y, z) == 0


class TestNonuniform222:
    def test_marginals(self):
        fam = cs.build_nonuniform_2x2x2()
        alpha = IndexSet([1, 2])
        assert fam[alpha].weight((0, 0)) == Fraction(1, 6)
        assert fam[alpha].weight((0, 1)) == Fraction(1, 3)
        assert fam[alpha].mass == 1

    def test_uniting_polytope_is_a_point(self):
        fam = cs.build_nonuniform_2x2x2()
        grid = fam.full_grid()
        values = cs.verify_unique_uniting(fam, list(grid.cells()))
        assert values is not None
        assert values[(0, 0, 0)] == values[(1, 1, 1)] == 0
        others = [v for c, v in values.items() if c not in {(0, 0, 0), (1, 1, 1)}]
        assert all(v == Fraction(1, 6) for v in others)
