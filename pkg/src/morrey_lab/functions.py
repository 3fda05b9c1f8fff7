"""Functions on a space and the norm/level-set functionals.

Norms follow the ball-dilated Morrey scale: the normalizing measure uses the
k-dilated ball while the integral runs over the undilated one.  All suprema
over radii are evaluated exactly on the breakpoint set via right limits
(closed balls), never by sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .space import MetricMeasureSpace


class ExponentOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class ExponentSet:
    """The coupled exponent tuple (p, q, alpha, s, t).

    s and t are derived: 1/s = 1/p - alpha and t = s*q/p, so the pair
    (p, q) -> (s, t) keeps q/p = t/s.
    """

    p: float
    q: float
    alpha: float
    s: float
    t: float

    @classmethod
    def from_pqa(cls, p: float, q: float, alpha: float) -> "ExponentSet":
        if not p > 1.0:
            raise ExponentOutOfRange(f"p must exceed 1, got {p}")
        if not 1.0 < q <= p:
            raise ExponentOutOfRange(f"q must lie in (1, p], got q={q}, p={p}")
        if not 0.0 < alpha < 1.0 / p:
            raise ExponentOutOfRange(f"alpha must lie in (0, 1/p), got alpha={alpha}, p={p}")
        s = p / (1.0 - p * alpha)
        t = q / (1.0 - p * alpha)  # equals s*q/p, and exactly s when q == p
        return cls(p=p, q=q, alpha=alpha, s=s, t=t)


def as_function(space: MetricMeasureSpace, values) -> np.ndarray:
    """Validate a value vector against the space: right length, all finite."""
    f = np.asarray(values, dtype=float)
    if f.shape != (space.n,):
        raise ValueError(f"function has shape {f.shape}, expected ({space.n},)")
    if not np.all(np.isfinite(f)):
        raise ValueError("function values must be finite")
    return f


def lq_norm(space: MetricMeasureSpace, f, q: float, region=None) -> float:
    """(sum_{i in region} |f(x_i)|^q mass_i)^{1/q}; region defaults to X."""
    if q < 1.0:
        raise ExponentOutOfRange(f"q must be >= 1, got {q}")
    f = as_function(space, f)
    w = np.abs(f) ** q * space.mass
    if region is not None:
        idx = np.fromiter(region, dtype=int) if not isinstance(region, np.ndarray) else region
        if idx.dtype == bool:
            w = w[idx]
        else:
            w = w[idx] if idx.size else np.zeros(0)
    return float(np.sum(w) ** (1.0 / q))


def morrey_norm(space: MetricMeasureSpace, f, p: float, q: float = 1.0, k: float = 1.0) -> float:
    """sup over x, r>0 of mu(B(x,kr))^{1/p-1/q} (int_{B(x,r)} |f|^q dmu)^{1/q}.

    Exact: the integral is constant between breakpoints and the normalizer
    carries a nonpositive exponent, so the sup per interval sits at the left
    endpoint's right limit, i.e. closed balls at breakpoints.
    """
    if not 1.0 <= q <= p:
        raise ExponentOutOfRange(f"need 1 <= q <= p, got q={q}, p={p}")
    if k < 1.0:
        raise ExponentOutOfRange(f"need k >= 1, got {k}")
    f = as_function(space, f)
    e = 1.0 / p - 1.0 / q  # <= 0
    cum = space.cumulative(np.abs(f) ** q * space.mass)
    best = 0.0
    for x in range(space.n):
        norm_mass = space.closed_measure(x, k * space.sorted_dist[x])
        vals = norm_mass**e * cum[x] ** (1.0 / q) if e != 0.0 else cum[x] ** (1.0 / q)
        m = float(vals.max())
        if m > best:
            best = m
    return best


def level_set_measure(space: MetricMeasureSpace, g, region, gamma: float) -> float:
    """mu{x in region : g(x) > gamma} (strict inequality)."""
    g = as_function(space, g)
    mask = g > gamma
    if region is None:
        sel = mask
    else:
        sel = np.zeros(space.n, dtype=bool)
        idx = np.asarray(region) if isinstance(region, np.ndarray) else np.fromiter(region, dtype=int)
        if idx.dtype == bool:
            sel = idx & mask
        else:
            if idx.size:
                sel[idx] = True
            sel &= mask
    return float(space.mass[sel].sum())
