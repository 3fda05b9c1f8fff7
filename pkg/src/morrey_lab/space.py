"""Finite metric measure spaces and ball/measure queries.

A space is the triple (X, d, mu): a finite point set, a distance matrix and
strictly positive atomic masses.  All sup-over-radius quantities downstream
are piecewise constant in the radius, so every module reduces its supremum
to the finite breakpoint set {d(x, y) : y in X} and evaluates right limits,
which on a finite space are closed-ball values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OPEN = "open"
CLOSED = "closed"

# Relative slack for the triangle-inequality check.  Euclidean distances
# computed in floating point can miss the exact inequality by a few ulps.
TRIANGLE_RTOL = 1e-12


class SpaceError(Exception):
    pass


class IndexOutOfRange(SpaceError):
    pass


class InvalidSpaceError(SpaceError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = ", ".join(str(v) for v in self.violations[:8])
        more = "" if len(self.violations) <= 8 else f" (+{len(self.violations) - 8} more)"
        super().__init__(f"invalid space: {lines}{more}")


@dataclass(frozen=True)
class Violation:
    """One violated space invariant, with the witnessing indices."""

    kind: str  # Asymmetry | TriangleViolation | NegativeDistance | NonzeroDiagonal | NonpositiveMass | Shape
    indices: tuple

    def __str__(self):
        return f"{self.kind}{self.indices}"


@dataclass(frozen=True)
class BallSpec:
    center: int
    radius: float
    closure: str = CLOSED


@dataclass(frozen=True, eq=False)
class MetricMeasureSpace:
    """Validated (X, d, mu) with cached sorted-distance prefix sums.

    ``order[x]`` sorts the points by distance from x, ``sorted_dist`` is the
    row-sorted distance matrix and ``csum0[x, j]`` is the mass of the j
    nearest points (leading zero included), so any closed/open ball measure
    is one searchsorted away.
    """

    dist: np.ndarray
    mass: np.ndarray
    order: np.ndarray = field(init=False, repr=False)
    sorted_dist: np.ndarray = field(init=False, repr=False)
    csum0: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        dist = np.ascontiguousarray(np.asarray(self.dist, dtype=float))
        mass = np.ascontiguousarray(np.asarray(self.mass, dtype=float))
        order = np.argsort(dist, axis=1, kind="stable")
        sorted_dist = np.take_along_axis(dist, order, axis=1)
        csum = np.cumsum(mass[order], axis=1)
        csum0 = np.concatenate([np.zeros((dist.shape[0], 1)), csum], axis=1)
        for name, arr in (
            ("dist", dist),
            ("mass", mass),
            ("order", order),
            ("sorted_dist", sorted_dist),
            ("csum0", csum0),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.csum0[0, -1])

    @property
    def diameter(self) -> float:
        return float(self.sorted_dist[:, -1].max())

    def check_index(self, x: int):
        if not 0 <= x < self.n:
            raise IndexOutOfRange(f"point index {x} out of range [0, {self.n})")

    def closed_measure(self, x: int, radii):
        """mu(closed ball(x, r)) for scalar or array radii."""
        idx = np.searchsorted(self.sorted_dist[x], radii, side="right")
        return self.csum0[x][idx]

    def open_measure(self, x: int, radii):
        """mu(open ball(x, r)) for scalar or array radii."""
        idx = np.searchsorted(self.sorted_dist[x], radii, side="left")
        return self.csum0[x][idx]

    def cumulative(self, weights: np.ndarray) -> np.ndarray:
        """Row x, column j: sum of ``weights`` over the j+1 nearest points of x.

        With ``weights = |f|**q * mass`` this is the closed-ball integral of
        |f|^q at every candidate radius at once (take the last duplicate of a
        tied distance for the exact ball value; earlier duplicates give
        partial sums that never exceed it).
        """
        return np.cumsum(np.asarray(weights, dtype=float)[self.order], axis=1)


def find_violations(dist, mass) -> list[Violation]:
    """Every violated MetricMeasureSpace invariant, with indices."""
    dist = np.asarray(dist, dtype=float)
    mass = np.asarray(mass, dtype=float)
    out: list[Violation] = []
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        out.append(Violation("Shape", (dist.shape,)))
        return out
    n = dist.shape[0]
    if mass.shape != (n,):
        out.append(Violation("Shape", (mass.shape,)))
        return out

    for i in np.nonzero(np.diag(dist) != 0.0)[0]:
        out.append(Violation("NonzeroDiagonal", (int(i),)))
    bad = np.argwhere(dist < 0.0)
    for i, j in bad:
        out.append(Violation("NegativeDistance", (int(i), int(j))))
    asym = np.argwhere(dist != dist.T)
    for i, j in asym:
        if i < j:
            out.append(Violation("Asymmetry", (int(i), int(j))))
    # d(i,k) <= d(i,j) + d(j,k), checked with a small relative slack
    via = dist[:, :, None] + dist[None, :, :]  # via[i, j, k]
    tol = TRIANGLE_RTOL * np.maximum(via, 1.0)
    viol = dist[:, None, :] > via + tol
    for i, j, k in np.argwhere(viol):
        if i != j and j != k:
            out.append(Violation("TriangleViolation", (int(i), int(j), int(k))))
    for i in np.nonzero(~(mass > 0.0))[0]:
        out.append(Violation("NonpositiveMass", (int(i),)))
    if not np.all(np.isfinite(dist)) or not np.all(np.isfinite(mass)):
        out.append(Violation("Shape", ("non-finite entries",)))
    return out


def validate_space(dist, mass) -> MetricMeasureSpace:
    """Build a space, raising InvalidSpaceError listing every violation."""
    violations = find_violations(dist, mass)
    if violations:
        raise InvalidSpaceError(violations)
    return MetricMeasureSpace(np.asarray(dist, dtype=float), np.asarray(mass, dtype=float))


def ball_members(space: MetricMeasureSpace, ball: BallSpec) -> set[int]:
    space.check_index(ball.center)
    d = space.dist[ball.center]
    if ball.closure == CLOSED:
        mask = d <= ball.radius
    elif ball.closure == OPEN:
        mask = d < ball.radius
    else:
        raise ValueError(f"unknown closure {ball.closure!r}")
    return set(int(i) for i in np.nonzero(mask)[0])


def ball_measure(space: MetricMeasureSpace, ball: BallSpec) -> float:
    space.check_index(ball.center)
    if ball.closure == CLOSED:
        return float(space.closed_measure(ball.center, ball.radius))
    if ball.closure == OPEN:
        return float(space.open_measure(ball.center, ball.radius))
    raise ValueError(f"unknown closure {ball.closure!r}")


def breakpoints(space: MetricMeasureSpace, x: int) -> np.ndarray:
    """Sorted distinct distances from x; always starts at 0."""
    space.check_index(x)
    return np.unique(space.dist[x])


def doubling_ratio(space: MetricMeasureSpace) -> tuple[float, tuple[int, float]]:
    """sup over x and r > 0 of mu(B(x,2r)) / mu(B(x,r)), with its witness.

    Both ball measures are piecewise constant in r, jumping at breakpoints
    (denominator) and half-breakpoints (numerator), so the sup of the
    right-limit evaluation is attained on {0} u bp(x) u bp(x)/2 with closed
    balls.
    """
    best = 1.0
    witness = (0, 0.0)
    for x in range(space.n):
        bp = np.unique(space.dist[x])
        cand = np.unique(np.concatenate([[0.0], bp, bp / 2.0]))
        num = space.closed_measure(x, 2.0 * cand)
        den = space.closed_measure(x, cand)
        ratios = num / den  # den >= mass of x's zero-distance class > 0
        j = int(np.argmax(ratios))
        if ratios[j] > best:
            best = float(ratios[j])
            witness = (x, float(cand[j]))
    return best, witness
