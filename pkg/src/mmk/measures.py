"""Product grids and discrete (signed) measures with exact rational weights.

Everything here is combinatorial: a grid is a list of per-axis cell counts,
a measure is a dense weight array over the grid cells.  Geometry (cell
centers, dyadic coordinates) belongs to the modules that need it.

All objects are immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence


class DomainError(ValueError):
    """An operation was called with arguments outside its domain."""


def as_fraction(value) -> Fraction:
    """Coerce ints, 'p/q' strings, floats and Fractions to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    raise DomainError(f"cannot interpret {value!r} as a rational")


class IndexSet:
    """A duplicate-free, sorted set of axis indices in {1..n}."""

    __slots__ = ("members",)

    def __init__(self, members: Iterable[int]):
        ms = tuple(sorted(members))
        if len(set(ms)) != len(ms):
            raise DomainError(f"duplicate axis in index set {ms}")
        if any((not isinstance(m, int)) or m < 1 for m in ms):
            raise DomainError(f"axis indices must be integers >= 1, got {ms}")
        object.__setattr__(self, "members", ms)

    def __setattr__(self, name, value):
        raise AttributeError("IndexSet is immutable")

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, axis: int) -> bool:
        return axis in self.members

    def __eq__(self, other) -> bool:
        return isinstance(other, IndexSet) and self.members == other.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __le__(self, other: "IndexSet") -> bool:
        return set(self.members) <= set(other.members)

    def __lt__(self, other: "IndexSet") -> bool:
        return self.members < other.members

    def __and__(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(set(self.members) & set(other.members))

    def __or__(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(set(self.members) | set(other.members))

    def key(self) -> str:
        return ",".join(str(m) for m in self.members)

    @staticmethod
    def from_key(key: str) -> "IndexSet":
        return IndexSet(int(part) for part in key.split(",") if part != "")

    def __repr__(self) -> str:
        return f"IndexSet({list(self.members)})"


def all_index_sets(n: int, k: int) -> list[IndexSet]:
    """All k-element subsets of {1..n}, sorted lexicographically."""
    return [IndexSet(c) for c in itertools.combinations(range(1, n + 1), k)]


class ProductGrid:
    """A labelled product grid: axis `axes[t]` has `sizes[t]` cells.

    A full grid over n axes has axes (1, ..., n); sub-grids keep the
    original labels so projections know which axes survive.
    """

    __slots__ = ("axes", "sizes")

    def __init__(self, sizes: Sequence[int], axes: Sequence[int] | None = None):
        sizes = tuple(int(s) for s in sizes)
        if any(s < 1 for s in sizes):
            raise DomainError(f"grid sizes must be >= 1, got {sizes}")
        if axes is None:
            axes = tuple(range(1, len(sizes) + 1))
        else:
            axes = tuple(axes)
        if len(axes) != len(sizes):
            raise DomainError("axes and sizes length mismatch")
        if tuple(sorted(set(axes))) != axes:
            raise DomainError(f"axes must be strictly increasing, got {axes}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "sizes", sizes)

    def __setattr__(self, name, value):
        raise AttributeError("ProductGrid is immutable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ProductGrid)
            and self.axes == other.axes
            and self.sizes == other.sizes
        )

    def __hash__(self) -> int:
        return hash((self.axes, self.sizes))

    def __repr__(self) -> str:
        return f"ProductGrid(sizes={list(self.sizes)}, axes={list(self.axes)})"

    @property
    def ncells(self) -> int:
        out = 1
        for s in self.sizes:
            out *= s
        return out

    def index_set(self) -> IndexSet:
        return IndexSet(self.axes)

    def size_of(self, axis: int) -> int:
        return self.sizes[self.axes.index(axis)]

    def cells(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(s) for s in self.sizes))

    def ravel(self, cell: Sequence[int]) -> int:
        idx = 0
        for coord, size in zip(cell, self.sizes):
            if not 0 <= coord < size:
                raise DomainError(f"cell {tuple(cell)} outside grid {self}")
            idx = idx * size + coord
        return idx

    def unravel(self, index: int) -> tuple[int, ...]:
        coords = []
        for size in reversed(self.sizes):
            coords.append(index % size)
            index //= size
        return tuple(reversed(coords))

    def subgrid(self, alpha: IndexSet) -> "ProductGrid":
        if not alpha <= self.index_set():
            raise DomainError(f"{alpha} is not a subset of grid axes {self.axes}")
        positions = [self.axes.index(a) for a in alpha]
        return ProductGrid([self.sizes[p] for p in positions], axes=tuple(alpha))


class SignedDiscreteMeasure:
    """A measure with one (possibly negative) weight per grid cell.

    Weights are exact rationals by default; any field elements supporting
    +, -, *, and comparison with 0 are accepted (used for quadratic-field
    weights in the density-2 construction).
    """

    __slots__ = ("grid", "weights")

    def __init__(self, grid: ProductGrid, weights: Sequence):
        if len(weights) != grid.ncells:
            raise DomainError(
                f"expected {grid.ncells} weights, got {len(weights)}"
            )
        ws = tuple(
            Fraction(w) if isinstance(w, int) else w for w in weights
        )
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "weights", ws)

    def __setattr__(self, name, value):
        raise AttributeError("measures are immutable")

    @property
    def mass(self):
        return sum(self.weights, Fraction(0))

    def weight(self, cell: Sequence[int]):
        return self.weights[self.grid.ravel(cell)]

    def is_nonnegative(self) -> bool:
        return all(w >= 0 for w in self.weights)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SignedDiscreteMeasure)
            and self.grid == other.grid
            and all(a == b for a, b in zip(self.weights, other.weights))
        )

    def __hash__(self) -> int:
        return hash((self.grid, self.weights))

    def __add__(self, other: "SignedDiscreteMeasure") -> "SignedDiscreteMeasure":
        if self.grid != other.grid:
            raise DomainError("cannot add measures on different grids")
        return SignedDiscreteMeasure(
            self.grid, [a + b for a, b in zip(self.weights, other.weights)]
        )

    def __sub__(self, other: "SignedDiscreteMeasure") -> "SignedDiscreteMeasure":
        if self.grid != other.grid:
            raise DomainError("cannot subtract measures on different grids")
        return SignedDiscreteMeasure(
            self.grid, [a - b for a, b in zip(self.weights, other.weights)]
        )

    def scaled(self, factor) -> "SignedDiscreteMeasure":
        return SignedDiscreteMeasure(self.grid, [factor * w for w in self.weights])

    def as_measure(self) -> "DiscreteMeasure":
        """Reinterpret as a nonnegative measure; fails if any weight < 0."""
        return DiscreteMeasure(self.grid, self.weights)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(grid={self.grid}, mass={self.mass})"


class DiscreteMeasure(SignedDiscreteMeasure):
    """A nonnegative discrete measure."""

    __slots__ = ()

    def __init__(self, grid: ProductGrid, weights: Sequence):
        super().__init__(grid, weights)
        for i, w in enumerate(self.weights):
            if w < 0:
                raise DomainError(
                    f"negative weight {w} at cell {grid.unravel(i)}"
                )


def uniform(sizes: Sequence[int], axes: Sequence[int] | None = None) -> DiscreteMeasure:
    """The uniform probability measure on the given grid."""
    grid = ProductGrid(sizes, axes=axes)
    w = Fraction(1, grid.ncells)
    return DiscreteMeasure(grid, [w] * grid.ncells)


def dirac(grid: ProductGrid, cell: Sequence[int]) -> DiscreteMeasure:
    """The point mass at `cell`."""
    weights = [Fraction(0)] * grid.ncells
    weights[grid.ravel(cell)] = Fraction(1)
    return DiscreteMeasure(grid, weights)


def project(mu: SignedDiscreteMeasure, alpha: IndexSet) -> SignedDiscreteMeasure:
    """Push `mu` forward along the coordinate projection onto `alpha`.

    Mass is preserved; signed measures stay signed.
    """
    grid = mu.grid
    if not alpha <= grid.index_set():
        raise DomainError(f"{alpha} is not a subset of measure axes {grid.axes}")
    sub = grid.subgrid(alpha)
    positions = [grid.axes.index(a) for a in alpha]
    out = [Fraction(0)] * sub.ncells
    for idx, w in enumerate(mu.weights):
        if w == 0:
            continue
        cell = grid.unravel(idx)
        out[sub.ravel([cell[p] for p in positions])] += w
    cls = DiscreteMeasure if isinstance(mu, DiscreteMeasure) else SignedDiscreteMeasure
    return cls(sub, out)


def product(factors: Sequence[SignedDiscreteMeasure]) -> SignedDiscreteMeasure:
    """The product measure of factors living on pairwise disjoint axes."""
    if not factors:
        raise DomainError("product of an empty factor list")
    seen: set[int] = set()
    for f in factors:
        axes = set(f.grid.axes)
        if axes & seen:
            raise DomainError(f"overlapping axes {sorted(axes & seen)} in product")
        seen |= axes
    size_of = {}
    for f in factors:
        for a, s in zip(f.grid.axes, f.grid.sizes):
            size_of[a] = s
    axes = tuple(sorted(size_of))
    grid = ProductGrid([size_of[a] for a in axes], axes=axes)
    positions = [
        [axes.index(a) for a in f.grid.axes] for f in factors
    ]
    weights = []
    for cell in grid.cells():
        w = factors[0].weights[factors[0].grid.ravel([cell[p] for p in positions[0]])]
        for f, pos in zip(factors[1:], positions[1:]):
            w = w * f.weights[f.grid.ravel([cell[p] for p in pos])]
        weights.append(w)
    signed = any(not isinstance(f, DiscreteMeasure) for f in factors)
    cls = SignedDiscreteMeasure if signed else DiscreteMeasure
    return cls(grid, weights)


class MarginalFamily:
    """The constraint data of an (n,k)-problem: one measure per alpha in I_nk."""

    __slots__ = ("n", "k", "sizes", "marginals")

    def __init__(
        self,
        n: int,
        k: int,
        sizes: Sequence[int],
        marginals: Mapping[IndexSet, DiscreteMeasure],
    ):
        if not 1 <= k < n:
            raise DomainError(f"need 1 <= k < n, got n={n}, k={k}")
        sizes = tuple(int(s) for s in sizes)
        if len(sizes) != n:
            raise DomainError(f"expected {n} axis sizes, got {len(sizes)}")
        expected = all_index_sets(n, k)
        if sorted(marginals.keys(), key=lambda a: a.members) != expected:
            raise DomainError("marginal keys must enumerate I_nk exactly")
        full = ProductGrid(sizes)
        for alpha, mu in marginals.items():
            if mu.grid != full.subgrid(alpha):
                raise DomainError(f"marginal for {alpha} lives on the wrong grid")
            if mu.mass != 1:
                raise DomainError(f"marginal for {alpha} has mass {mu.mass}, not 1")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "marginals", dict(marginals))

    def __setattr__(self, name, value):
        raise AttributeError("MarginalFamily is immutable")

    def full_grid(self) -> ProductGrid:
        return ProductGrid(self.sizes)

    def index_sets(self) -> list[IndexSet]:
        return all_index_sets(self.n, self.k)

    def __getitem__(self, alpha: IndexSet) -> DiscreteMeasure:
        return self.marginals[alpha]

    def __repr__(self) -> str:
        return f"MarginalFamily(n={self.n}, k={self.k}, sizes={list(self.sizes)})"


class ConsistencyReport:
    """Outcome of the pairwise overlap check on a marginal family."""

    __slots__ = ("consistent", "failures")

    def __init__(self, consistent: bool, failures: list):
        object.__setattr__(self, "consistent", consistent)
        object.__setattr__(self, "failures", tuple(failures))

    def __setattr__(self, name, value):
        raise AttributeError("ConsistencyReport is immutable")

    def __bool__(self) -> bool:
        return self.consistent

    def __repr__(self) -> str:
        return f"ConsistencyReport(consistent={self.consistent}, failures={list(self.failures)})"


def is_consistent(fam: MarginalFamily) -> ConsistencyReport:
    """Check prj_{a&b}(mu_a) == prj_{a&b}(mu_b) exactly for every pair."""
    failures = []
    index_sets = fam.index_sets()
    for i, alpha in enumerate(index_sets):
        for beta in index_sets[i + 1 :]:
            overlap = alpha & beta
            if len(overlap) == 0:
                continue
            if project(fam[alpha], overlap) != project(fam[beta], overlap):
                failures.append((alpha, beta))
    return ConsistencyReport(not failures, failures)


def lower_marginal(fam: MarginalFamily, beta: IndexSet) -> DiscreteMeasure:
    """The common projection prj_beta(mu_alpha) over all alpha containing beta.

    Well-defined only for consistent families; asserts the independence of
    the chosen alpha.
    """
    if len(beta) > fam.k:
        raise DomainError(f"|beta| = {len(beta)} exceeds k = {fam.k}")
    hosts = [alpha for alpha in fam.index_sets() if beta <= alpha]
    if not hosts:
        raise DomainError(f"no marginal contains {beta}")
    results = [project(fam[alpha], beta) for alpha in hosts]
    first = results[0]
    for r in results[1:]:
        if r != first:
            raise DomainError(
                f"family is inconsistent: prj_{beta.key()} differs between hosts"
            )
    return first


def measure_to_json(mu: SignedDiscreteMeasure) -> dict:
    """Encode a measure as {"axes": [...sizes...], "weights": ["p/q", ...]}."""
    return {
        "axes": list(mu.grid.sizes),
        "weights": [str(Fraction(w)) for w in mu.weights],
    }


def measure_from_json(data: Mapping, axes: Sequence[int] | None = None) -> DiscreteMeasure:
    """Decode a measure; weights may be 'p/q' strings or JSON numbers."""
    try:
        sizes = data["axes"]
        weights = [as_fraction(w) for w in data["weights"]]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed measure object: {exc}") from exc
    return DiscreteMeasure(ProductGrid(sizes, axes=axes), weights)
