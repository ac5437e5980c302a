"""Exact linear programming over rationals.

Solves min/max c.x subject to A x = b, x >= 0 with a two-phase primal
simplex.  Pricing is Dantzig by default and falls back to Bland's rule
after a streak of degenerate pivots, which guarantees termination on the
degenerate transport polytopes this package produces.

Exact mode keeps every tableau entry rational (gmpy2.mpq when available,
fractions.Fraction otherwise), so optimal answers satisfy A x = b with
zero residual and primal value == dual value exactly.  Infeasible
problems ship a Farkas certificate y with y.A <= 0 and y.b > 0.  Float
mode runs the same pivoting with numpy rows and a 1e-9 tolerance on
reduced costs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .measures import DomainError

try:
    from gmpy2 import mpq as _RAT
except ImportError:  # pragma: no cover - gmpy2 is normally present
    _RAT = Fraction

# Exact pivoting cost grows with coefficient size; beyond this many
# nonzeros the caller must opt into float mode explicitly.
EXACT_NONZERO_CAP = 50_000

# Degenerate pivots tolerated before switching pricing to Bland's rule.
DEGENERATE_STREAK_LIMIT = 40


class LPError(Exception):
    pass


class SizeCapError(LPError):
    """Exact mode refused: problem too large, pass arithmetic='float'."""


class LPProblem:
    """min or max objective.x over {x >= 0, A x = b}.

    `rows` may be dense sequences or {column: value} mappings; they are
    stored row-sparse.
    """

    __slots__ = ("objective", "rows", "rhs", "sense")

    def __init__(self, objective: Sequence, rows: Sequence, rhs: Sequence, sense: str = "min"):
        if sense not in ("min", "max"):
            raise DomainError(f"sense must be 'min' or 'max', got {sense!r}")
        obj = tuple(Fraction(v) for v in objective)
        ncols = len(obj)
        sparse_rows = []
        for row in rows:
            if isinstance(row, Mapping):
                entries = {int(j): Fraction(v) for j, v in row.items() if v != 0}
            else:
                if len(row) != ncols:
                    raise DomainError(
                        f"row has {len(row)} entries, objective has {ncols}"
                    )
                entries = {j: Fraction(v) for j, v in enumerate(row) if v != 0}
            if entries and (min(entries) < 0 or max(entries) >= ncols):
                raise DomainError("row refers to a column outside the objective")
            sparse_rows.append(entries)
        b = tuple(Fraction(v) for v in rhs)
        if len(b) != len(sparse_rows):
            raise DomainError(f"{len(sparse_rows)} rows but {len(b)} rhs entries")
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "rows", tuple(sparse_rows))
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "sense", sense)

    def __setattr__(self, name, value):
        raise AttributeError("LPProblem is immutable")

    @property
    def ncols(self) -> int:
        return len(self.objective)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def nonzeros(self) -> int:
        return sum(len(r) for r in self.rows)


class Certificate:
    """A Farkas witness of infeasibility: y.A <= 0 componentwise, y.b > 0."""

    __slots__ = ("y",)

    def __init__(self, y: Sequence):
        object.__setattr__(self, "y", tuple(Fraction(v) for v in y))

    def __setattr__(self, name, value):
        raise AttributeError("Certificate is immutable")

    def __repr__(self) -> str:
        return f"Certificate(y={[str(v) for v in self.y]})"


class LPSolution:
    """Solver outcome: status plus the relevant witness objects.

    status 'optimal':    x, y (dual prices), value
    status 'infeasible': certificate
    status 'unbounded':  ray (an improving direction), x (feasible point)
    """

    __slots__ = ("status", "x", "y", "value", "certificate", "ray")

    def __init__(self, status, x=None, y=None, value=None, certificate=None, ray=None):
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "certificate", certificate)
        object.__setattr__(self, "ray", ray)

    def __setattr__(self, name, value):
        raise AttributeError("LPSolution is immutable")

    def __repr__(self) -> str:
        return f"LPSolution(status={self.status!r}, value={self.value})"


def check_certificate(problem: LPProblem, cert: Certificate, tol=0) -> bool:
    """True iff y.A <= 0 on every column and y.b > 0 (up to tol)."""
    y = cert.y
    if len(y) != problem.nrows:
        return False
    col_sums = [Fraction(0)] * problem.ncols
    for yi, row in zip(y, problem.rows):
        if yi == 0:
            continue
        for j, v in row.items():
            col_sums[j] += yi * v
    if any(s > tol for s in col_sums):
        return False
    yb = sum(yi * bi for yi, bi in zip(y, problem.rhs))
    return yb > tol


class _ExactTableau:
    """Dense two-phase tableau over exact rationals.

    Columns: n structural, then m artificials, then the rhs.  Artificial
    columns stay in the tableau through phase 2 (never eligible to
    enter); they carry the basis inverse, so dual prices can be read off
    the final reduced-cost row.
    """

    def __init__(self, problem: LPProblem, minimize_obj: Sequence):
        self.n = problem.ncols
        self.m = problem.nrows
        self.obj = [_RAT(v.numerator, v.denominator) for v in minimize_obj]
        zero = _RAT(0)
        one = _RAT(1)
        self.row_sign = []
        self.rows = []
        for i in range(self.m):
            b = problem.rhs[i]
            sign = -1 if b < 0 else 1
            self.row_sign.append(sign)
            row = [zero] * (self.n + self.m + 1)
            for j, v in problem.rows[i].items():
                row[j] = _RAT(sign * v.numerator, v.denominator)
            row[self.n + i] = one
            row[-1] = _RAT(sign * b.numerator, b.denominator)
            self.rows.append(row)
        self.basis = [self.n + i for i in range(self.m)]
        self.live = list(range(self.m))  # rows not dropped as dependent
        self.r = None  # reduced-cost row; r[-1] == -objective value

    def _set_costs(self, costs):
        width = self.n + self.m + 1
        r = list(costs) + [_RAT(0)] * (width - len(costs))
        for i in self.live:
            cb = costs[self.basis[i]] if self.basis[i] < len(costs) else _RAT(0)
            if cb == 0:
                continue
            row = self.rows[i]
            for j in range(width):
                if row[j]:
                    r[j] -= cb * row[j]
        self.r = r

    def _pivot(self, i, j):
        row = self.rows[i]
        piv = row[j]
        if piv != 1:
            inv = 1 / piv
            for s, v in enumerate(row):
                if v:
                    row[s] = v * inv
        nz = [s for s, v in enumerate(row) if v]
        for t in self.live:
            if t == i:
                continue
            other = self.rows[t]
            f = other[j]
            if f:
                for s in nz:
                    other[s] -= f * row[s]
        r = self.r
        f = r[j]
        if f:
            for s in nz:
                r[s] -= f * row[s]
        self.basis[i] = j

    def _run(self, allowed_cols: int) -> str:
        """Pivot to optimality; returns 'optimal' or 'unbounded'."""
        bland = False
        degenerate_streak = 0
        last_obj = self.r[-1]
        while True:
            r = self.r
            enter = -1
            if bland:
                for j in range(allowed_cols):
                    if r[j] < 0:
                        enter = j
                        break
            else:
                best = 0
                for j in range(allowed_cols):
                    v = r[j]
                    if v < best:
                        best = v
                        enter = j
            if enter < 0:
                return "optimal"
            leave = -1
            best_ratio = None
            for i in self.live:
                coef = self.rows[i][enter]
                if coef > 0:
                    ratio = self.rows[i][-1] / coef
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < self.basis[leave])
                    ):
                        best_ratio = ratio
                        leave = i
            if leave < 0:
                return "unbounded"
            self._pivot(leave, enter)
            if self.r[-1] == last_obj:
                degenerate_streak += 1
                if degenerate_streak > DEGENERATE_STREAK_LIMIT:
                    bland = True
            else:
                degenerate_streak = 0
                bland = False
                last_obj = self.r[-1]

    def phase1(self) -> bool:
        """Drive artificials out; False means infeasible."""
        costs = [_RAT(0)] * self.n + [_RAT(1)] * self.m
        self._set_costs(costs)
        status = self._run(allowed_cols=self.n)
        assert status == "optimal"  # phase-1 objective is bounded below by 0
        if -self.r[-1] > 0:
            return False
        # Pivot out (or drop) artificials still basic at level zero.
        for i in list(self.live):
            if self.basis[i] < self.n:
                continue
            row = self.rows[i]
            enter = next((j for j in range(self.n) if row[j] != 0), -1)
            if enter >= 0:
                self._pivot(i, enter)
            else:
                self.live.remove(i)  # dependent constraint row
        return True

    def phase2(self) -> str:
        self._set_costs(self.obj + [_RAT(0)] * self.m)
        return self._run(allowed_cols=self.n)

    def farkas(self) -> list:
        # At phase-1 optimality r[n+i] = 1 - y_i, so y = 1 - r over the
        # artificial block; undo the row sign flips for the original system.
        return [
            self.row_sign[i] * Fraction(1 - self.r[self.n + i]) for i in range(self.m)
        ]

    def primal(self) -> list:
        x = [Fraction(0)] * self.n
        for i in self.live:
            j = self.basis[i]
            if j < self.n:
                x[j] = Fraction(self.rows[i][-1])
        return x

    def duals(self) -> list:
        # Phase-2 artificial costs are 0, so r[n+i] = -y_i; dropped rows
        # contribute price 0.
        y = [Fraction(0)] * self.m
        for i in self.live:
            y[i] = self.row_sign[i] * Fraction(-self.r[self.n + i])
        return y

    def ray(self, enter: int) -> list:
        d = [Fraction(0)] * self.n
        d[enter] = Fraction(1)
        for i in self.live:
            j = self.basis[i]
            if j < self.n:
                d[j] = Fraction(-self.rows[i][enter])
        return d

    def dump(self) -> str:
        lines = ["basis: " + " ".join(str(b) for b in self.basis)]
        for i in self.live:
            lines.append(" ".join(str(v) for v in self.rows[i]))
        if self.r is not None:
            lines.append("r: " + " ".join(str(v) for v in self.r))
        return "\n".join(lines)


def _solve_exact(problem: LPProblem) -> LPSolution:
    flip = -1 if problem.sense == "max" else 1
    internal_obj = [flip * v for v in problem.objective]
    tab = _ExactTableau(problem, internal_obj)
    if not tab.phase1():
        y = tab.farkas()
        cert = Certificate(y)
        assert check_certificate(problem, cert), "phase-1 produced a bad certificate"
        return LPSolution("infeasible", certificate=cert)
    status = tab.phase2()
    if status == "unbounded":
        # Re-find the entering column that proved unboundedness.
        enter = next(j for j in range(tab.n) if tab.r[j] < 0)
        return LPSolution("unbounded", x=tab.primal(), ray=tab.ray(enter))
    x = tab.primal()
    y = [flip * v for v in tab.duals()]
    value = sum(c * v for c, v in zip(problem.objective, x))
    dual_value = sum(yi * bi for yi, bi in zip(y, problem.rhs))
    assert value == dual_value, "exact mode must close the duality gap"
    return LPSolution("optimal", x=x, y=y, value=value)


def _solve_float(problem: LPProblem, tol: float) -> LPSolution:
    """Float mode: HiGHS via scipy when available, else the tableau.

    HiGHS does not expose Farkas rays through scipy, so infeasible
    problems are re-run through the tableau to produce a certificate.
    """
    try:
        from scipy.optimize import linprog
        from scipy.sparse import csr_matrix
    except ImportError:  # pragma: no cover - scipy is normally present
        return _solve_float_tableau(problem, tol)
    n, m = problem.ncols, problem.nrows
    flip = -1.0 if problem.sense == "max" else 1.0
    c = [flip * float(v) for v in problem.objective]
    data, ri, ci = [], [], []
    for i, row in enumerate(problem.rows):
        for j, v in row.items():
            ri.append(i)
            ci.append(j)
            data.append(float(v))
    A = csr_matrix((data, (ri, ci)), shape=(m, n))
    b = [float(v) for v in problem.rhs]
    res = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status == 2:
        return _solve_float_tableau(problem, tol)
    if res.status == 3:
        return LPSolution("unbounded")
    if res.status != 0:  # pragma: no cover - numerical trouble
        return _solve_float_tableau(problem, tol)
    x = [float(v) for v in res.x]
    y = [flip * float(v) for v in res.eqlin.marginals]
    value = flip * float(res.fun)
    return LPSolution("optimal", x=x, y=y, value=value)


def _solve_float_tableau(problem: LPProblem, tol: float) -> LPSolution:
    import numpy as np

    n, m = problem.ncols, problem.nrows
    T = np.zeros((m, n + m + 1))
    sign = np.ones(m)
    for i in range(m):
        b = float(problem.rhs[i])
        s = -1.0 if b < 0 else 1.0
        sign[i] = s
        for j, v in problem.rows[i].items():
            T[i, j] = s * float(v)
        T[i, n + i] = 1.0
        T[i, -1] = s * b
    flip = -1.0 if problem.sense == "max" else 1.0
    obj = np.array([flip * float(v) for v in problem.objective])
    basis = list(range(n, n + m))
    live = np.ones(m, dtype=bool)

    def set_costs(costs):
        r = np.concatenate([costs, np.zeros(n + m + 1 - len(costs))])
        for i in range(m):
            if live[i]:
                cb = costs[basis[i]] if basis[i] < len(costs) else 0.0
                if cb:
                    r -= cb * T[i]
        return r

    def pivot(r, i, j):
        T[i] /= T[i, j]
        col = T[:, j].copy()
        col[i] = 0.0
        col[~live] = 0.0
        T[:, :] -= np.outer(col, T[i])
        if r[j]:
            r -= r[j] * T[i]
        basis[i] = j
        return r

    def run(r, allowed, bland_only=False):
        degen = 0
        bland = bland_only
        last = r[-1]
        while True:
            rr = r[:allowed]
            if bland:
                cand = np.nonzero(rr < -tol)[0]
                enter = int(cand[0]) if cand.size else -1
            else:
                enter = int(np.argmin(rr))
                if rr[enter] >= -tol:
                    enter = -1
            if enter < 0:
                return r, "optimal"
            coef = T[:, enter]
            ok = live & (coef > tol)
            if not ok.any():
                return r, "unbounded"
            ratios = np.where(ok, T[:, -1] / np.where(ok, coef, 1.0), np.inf)
            leave = int(np.argmin(ratios))
            r = pivot(r, leave, enter)
            if abs(r[-1] - last) <= tol * (1 + abs(last)):
                degen += 1
                if degen > DEGENERATE_STREAK_LIMIT:
                    bland = True
            else:
                degen = 0
                bland = bland_only
                last = r[-1]

    r = set_costs(np.concatenate([np.zeros(n), np.ones(m)]))
    r, status = run(r, allowed=n)
    if -r[-1] > tol * (1 + abs(float(sum(problem.rhs)))):
        y = [Fraction((sign[i] * (1.0 - r[n + i])).item()) for i in range(m)]
        cert = Certificate(y)
        return LPSolution("infeasible", certificate=cert)
    for i in range(m):
        if basis[i] >= n and live[i]:
            nz = np.nonzero(np.abs(T[i, :n]) > tol)[0]
            if nz.size:
                r = pivot(r, i, int(nz[0]))
            else:
                live[i] = False
    r = set_costs(np.concatenate([obj, np.zeros(m)]))
    r, status = run(r, allowed=n)
    if status == "unbounded":
        return LPSolution("unbounded")
    xs = [0.0] * n
    for i in range(m):
        if live[i] and basis[i] < n:
            xs[basis[i]] = float(T[i, -1])
    y = [
        float(flip * sign[i] * -r[n + i]) if live[i] else 0.0 for i in range(m)
    ]
    value = sum(float(c) * v for c, v in zip(problem.objective, xs))
    return LPSolution("optimal", x=xs, y=y, value=value)


def solve(problem: LPProblem, arithmetic: str = "exact", tol: float = 1e-9) -> LPSolution:
    """Solve the LP; exact rational mode unless arithmetic='float'.

    Exact mode enforces the nonzero cap (coefficient growth makes huge
    exact pivots impractical); float mode applies `tol` to reduced costs
    and ratio tests.
    """
    if arithmetic == "exact":
        if problem.nonzeros() > EXACT_NONZERO_CAP:
            raise SizeCapError(
                f"{problem.nonzeros()} nonzeros exceeds the exact-mode cap "
                f"{EXACT_NONZERO_CAP}; pass arithmetic='float'"
            )
        return _solve_exact(problem)
    if arithmetic == "float":
        return _solve_float(problem, tol)
    raise DomainError(f"unknown arithmetic mode {arithmetic!r}")
