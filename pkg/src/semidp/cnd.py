"""Canonical noise distributions built from a symmetric tradeoff function.

Given a symmetric nontrivial tradeoff function f, a canonical noise CDF F is
pinned by the fixed point c in [0, 1/2) with f(1 - c) = c: F is affine with
slope 1 - 2c on [-1/2, 1/2] and extends one unit step at a time through
F(x) = f(F(x + 1)) on the left and F(x) = 1 - f(1 - F(x - 1)) on the right.
Adding noise drawn from F to an integer-valued statistic with unit
sensitivity makes the unit-shift testing problem exactly as hard as f.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import NoiseRng, RngSeed
from .tradeoff import TradeoffSpec, eval_tradeoff, is_nontrivial

_FIXED_POINT_TOL = 1e-13
_QUANTILE_TOL = 1e-13
_MAX_BRACKET_DOUBLINGS = 200


@dataclass(frozen=True)
class CndSpec:
    """A tradeoff function together with its fixed point c, f(1-c) = c."""

    tradeoff: TradeoffSpec
    c: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.c < 0.5:
            raise ValueError(f"c must lie in [0, 1/2), got {self.c}")
        gap = abs(eval_tradeoff(self.tradeoff, 1.0 - self.c) - self.c)
        if gap > 1e-12:
            raise ValueError(f"c does not satisfy f(1-c)=c (residual {gap:.2e})")


def solve_c(f: TradeoffSpec, tol: float = _FIXED_POINT_TOL) -> float:
    """Fixed point of g(c) = f(1-c) - c on [0, 1/2] by bisection.

    g is strictly decreasing, g(0) = f(1) and g(1/2) = f(1/2) - 1/2 <= 0.
    Trivial inputs (root at 1/2) and the perfect-distinguishability edge
    f(1) = 0 (root at 0) are rejected.
    """
    if not is_nontrivial(f):
        raise ValueError("tradeoff function is trivial; no usable fixed point")
    g0 = eval_tradeoff(f, 1.0)
    if g0 <= tol:
        raise ValueError("f(1) = 0: distributions are perfectly distinguishable at "
                         "the endpoint; the construction degenerates")
    lo, hi = 0.0, 0.5
    if eval_tradeoff(f, 1.0 - hi) - hi > 0:
        raise ValueError("no sign change on [0, 1/2]; f is not a valid symmetric input")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if eval_tradeoff(f, 1.0 - mid) - mid > 0:
            lo = mid
        else:
            hi = mid
    c = 0.5 * (lo + hi)
    if c >= 0.5 - 1e-9:
        raise ValueError("fixed point sits at 1/2; tradeoff function is trivial")
    return c


def make_cnd(f: TradeoffSpec) -> CndSpec:
    return CndSpec(tradeoff=f, c=solve_c(f))


def _cdf_array(spec: CndSpec, x: np.ndarray) -> np.ndarray:
    f = spec.tradeoff
    c = spec.c
    steps = np.ceil(np.abs(x) - 0.5)
    steps = np.where(steps < 0, 0, steps).astype(int)
    centered = x - np.sign(x) * steps
    out = 0.5 + centered * (1.0 - 2.0 * c)
    kmax = int(steps.max(initial=0))
    pos = x > 0.5
    neg = x < -0.5
    for k in range(1, kmax + 1):
        live = steps >= k
        up = live & pos
        if np.any(up):
            out[up] = 1.0 - eval_tradeoff(f, 1.0 - out[up])
        down = live & neg
        if np.any(down):
            out[down] = eval_tradeoff(f, out[down])
    return out


def cnd_cdf(spec: CndSpec, x):
    """CDF of the canonical noise distribution; scalar or ndarray input."""
    arr = np.asarray(x, dtype=float)
    out = _cdf_array(spec, np.atleast_1d(arr).copy())
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def cnd_quantile(spec: CndSpec, u):
    """Inverse CDF by bracket expansion then bisection, resolved to 1e-12."""
    arr = np.asarray(u, dtype=float)
    flat = np.atleast_1d(arr).astype(float)
    if np.any(flat <= 0.0) or np.any(flat >= 1.0):
        raise ValueError("u must lie strictly inside (0, 1)")
    lo, hi = -1.0, 1.0
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        if cnd_cdf(spec, lo) < flat.min() and cnd_cdf(spec, hi) > flat.max():
            break
        lo *= 2.0
        hi *= 2.0
    else:
        raise RuntimeError("quantile bracket expansion failed")
    los = np.full_like(flat, lo)
    his = np.full_like(flat, hi)
    # fixed iteration count: halving until the bracket is below tolerance
    iters = int(np.ceil(np.log2((hi - lo) / _QUANTILE_TOL)))
    for _ in range(iters):
        mid = 0.5 * (los + his)
        below = _cdf_array(spec, mid.copy()) < flat
        los = np.where(below, mid, los)
        his = np.where(below, his, mid)
    out = 0.5 * (los + his)
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def cnd_sample(spec: CndSpec, seed: RngSeed, count: int) -> np.ndarray:
    """Inverse-transform samples from the canonical noise distribution."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = NoiseRng(seed)
    u = np.asarray(rng.uniform_open(size=count))
    return np.asarray(cnd_quantile(spec, u))
