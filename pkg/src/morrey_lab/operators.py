"""The centered modified maximal operator, the fractional integral with a
dilated-ball kernel, and the dyadic layer machinery behind the pointwise
(Hedberg-type) domination of the potential by maximal-function powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functions import ExponentOutOfRange, as_function
from .space import MetricMeasureSpace

CLOSED_BALL = "closed-ball"
EXCLUDE_DIAGONAL = "exclude-diagonal"


class DivisionByZeroKernel(ArithmeticError):
    pass


@dataclass(frozen=True)
class KernelConvention:
    """Kernel mass mu(B(x, kappa*d(x,y)))^{alpha-1}.

    closed-ball: the ball is evaluated as the eps->0 right limit (closed),
    so the diagonal term y=x contributes through the atom's own mass.
    exclude-diagonal: drop y with d(x,y)=0 and use open balls.
    """

    kappa: float = 2.0
    diagonal: str = CLOSED_BALL

    def __post_init__(self):
        if not self.kappa > 0.0:
            raise ExponentOutOfRange(f"kappa must be positive, got {self.kappa}")
        if self.diagonal not in (CLOSED_BALL, EXCLUDE_DIAGONAL):
            raise ValueError(f"unknown diagonal mode {self.diagonal!r}")


def maximal(space: MetricMeasureSpace, f, k: float = 2.0) -> np.ndarray:
    """M_k f(x) = sup_{r>0} mu(B(x,kr))^{-1} int_{B(x,r)} |f| dmu.

    Exact breakpoint enumeration: the numerator is constant between
    breakpoints of x and the normalizer is nondecreasing, so each interval
    sup is the closed-ball value at the left breakpoint.
    """
    if k < 1.0:
        raise ExponentOutOfRange(f"need k >= 1, got {k}")
    f = as_function(space, f)
    cum = space.cumulative(np.abs(f) * space.mass)
    out = np.empty(space.n)
    for x in range(space.n):
        denom = space.closed_measure(x, k * space.sorted_dist[x])
        out[x] = float((cum[x] / denom).max())
    return out


def fractional_integral(
    space: MetricMeasureSpace,
    f,
    alpha: float,
    conv: KernelConvention = KernelConvention(),
) -> np.ndarray:
    """I_alpha f(x) = sum_y f(y) mass_y mu(B(x, kappa*d(x,y)))^{alpha-1}."""
    if not 0.0 < alpha < 1.0:
        raise ExponentOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    f = as_function(space, f)
    fm = f * space.mass
    out = np.empty(space.n)
    for x in range(space.n):
        d = space.dist[x]
        if conv.diagonal == CLOSED_BALL:
            km = space.closed_measure(x, conv.kappa * d)
            out[x] = float(np.sum(fm * km ** (alpha - 1.0)))
        else:
            mask = d > 0.0
            km = space.open_measure(x, conv.kappa * d[mask])
            if np.any(km <= 0.0):
                raise DivisionByZeroKernel(
                    f"open kernel ball has zero mass at x={x} in exclude-diagonal mode"
                )
            out[x] = float(np.sum(fm[mask] * km ** (alpha - 1.0)))
    return out


def default_k_range(space: MetricMeasureSpace) -> tuple[int, int]:
    """Dyadic index range outside of which the layer radii are constant."""
    lo = math.floor(math.log2(float(space.mass.min()))) - 1
    hi = math.ceil(math.log2(space.total_mass)) + 1
    return lo, hi


def layer_radii(space: MetricMeasureSpace, x: int, k_range: tuple[int, int] | None = None) -> dict[int, float]:
    """R_k(x): the smallest R with mu(B(x, 2R)) > 2^k, as a map k -> radius.

    On a finite space R_k(x) = t/2 where t is the first breakpoint whose
    closed ball exceeds mass 2^k; infinity when the total mass never does.
    """
    space.check_index(x)
    if k_range is None:
        k_range = default_k_range(space)
    lo, hi = k_range
    sd = space.sorted_dist[x]
    cs = space.csum0[x][1:]  # closed-ball mass at each sorted position
    out: dict[int, float] = {}
    for k in range(lo, hi + 1):
        idx = int(np.searchsorted(cs, 2.0**k, side="right"))
        out[k] = math.inf if idx >= space.n else float(sd[idx]) / 2.0
    return out


def hedberg_constant(p: float, alpha: float) -> float:
    """Explicit constant for the pointwise potential bound.

    Splitting the dyadic-layer sum at 2^{k0} ~ (norm / maximal)^p leaves two
    geometric series; their closed forms give
    2^{1-alpha} * (1/(1-2^{-alpha}) + 1/(1-2^{alpha-1/p})).
    """
    if not p > 1.0:
        raise ExponentOutOfRange(f"p must exceed 1, got {p}")
    if not 0.0 < alpha < 1.0 / p:
        raise ExponentOutOfRange(f"alpha must lie in (0, 1/p), got alpha={alpha}, p={p}")
    return 2.0 ** (1.0 - alpha) * (
        1.0 / (1.0 - 2.0 ** (-alpha)) + 1.0 / (1.0 - 2.0 ** (alpha - 1.0 / p))
    )


def hedberg_layer_sum(space: MetricMeasureSpace, f, alpha: float) -> np.ndarray:
    """Per point x: sum over active layers k (R_{k-1}(x) < R_k(x)) of
    2^{(k-1)(alpha-1)} * int_{B(x, R_k(x))} |f| dmu  (open balls).

    Layers with R_{k-1} = R_k (both zero or both infinite) contribute
    nothing; the single layer reaching R_k = infinity integrates over all
    of X.  This sum dominates I_alpha f pointwise (kappa=2, closed-ball
    kernel) and is in turn dominated by the explicit-constant bound.
    """
    if not 0.0 < alpha < 1.0:
        raise ExponentOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    f = as_function(space, f)
    absfm = np.abs(f) * space.mass
    lo, hi = default_k_range(space)
    out = np.empty(space.n)
    total = float(absfm.sum())
    for x in range(space.n):
        sd = space.sorted_dist[x]
        cf = np.concatenate([[0.0], np.cumsum(absfm[space.order[x]])])
        radii = layer_radii(space, x, (lo, hi))
        s = 0.0
        prev = 0.0  # R_{lo-1} = 0 by the range choice
        for k in range(lo, hi + 1):
            rk = radii[k]
            if prev < rk:
                if math.isinf(rk):
                    integral = total
                else:
                    integral = float(cf[np.searchsorted(sd, rk, side="left")])
                s += 2.0 ** ((k - 1) * (alpha - 1.0)) * integral
            prev = rk
        out[x] = s
    return out
