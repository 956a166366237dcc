"""Moments p_q = sum_i |psi_i|^(2q), inverse participation ratio and scaling fits."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientPoints
from .states import amplitudes_of, check_normalized

DEFAULT_QMAX = 4


@dataclass(frozen=True)
class MomentSet:
    p: dict  # q -> p_q
    xi: float

    @property
    def q_max(self):
        return max(self.p)

    def __getitem__(self, q):
        return self.p[q]


@dataclass(frozen=True)
class ScalingFit:
    q: int
    exponent: float  # effective D_q
    intercept: float
    residual: float  # RMS of the log-log fit


def moments(state, q_max=DEFAULT_QMAX):
    """Moments p_2..p_qmax of one normalized state (compensated summation)."""
    if q_max < 2:
        raise ValueError("q_max must be >= 2")
    psi = amplitudes_of(state)
    check_normalized(psi)
    prob = (np.abs(psi) ** 2).tolist()
    p = {q: math.fsum(x**q for x in prob) for q in range(2, q_max + 1)}
    return MomentSet(p=p, xi=1.0 / p[2])


def moment_array(psi, q_max=DEFAULT_QMAX):
    """Moments for a stack of states ``(..., N)``; returns ``(..., q_max - 1)``.

    Column ``q - 2`` holds p_q. Uses numpy's pairwise summation.
    """
    prob = np.abs(np.asarray(psi)) ** 2
    out = np.empty(prob.shape[:-1] + (q_max - 1,))
    pw = prob * prob
    for q in range(2, q_max + 1):
        out[..., q - 2] = np.sum(pw, axis=-1)
        pw = pw * prob
    return out


def ipr(state):
    """Inverse participation ratio xi = 1 / p_2 (vectorized over leading axes)."""
    prob = np.abs(amplitudes_of(state)) ** 2
    return 1.0 / np.sum(prob * prob, axis=-1)


def multifractal_fit(points, q):
    """Fit mean p_q ~ N^(-D_q (q-1)) over at least three sizes.

    ``points`` is an iterable of ``(N, mean_p_q)``. D_q = 1 for ergodic,
    0 for localized scaling.
    """
    pts = sorted((float(n), float(v)) for n, v in points)
    if len({n for n, _ in pts}) < 3:
        raise InsufficientPoints("need at least 3 distinct system sizes")
    if q < 2:
        raise ValueError("q must be >= 2")
    if any(v <= 0 for _, v in pts):
        raise ValueError("mean moments must be positive")
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return ScalingFit(
        q=q,
        exponent=float(-slope / (q - 1)),
        intercept=float(intercept),
        residual=float(np.sqrt(np.mean(resid**2))),
    )
