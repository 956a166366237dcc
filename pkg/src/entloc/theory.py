"""Closed-form predictions for ensemble-averaged entanglement.

Every function here is a deterministic scalar formula of the Hilbert-space
dimension N = 2**n, the support size M, the cut size nu and ensemble-averaged
moments. They serve as oracles for the Monte Carlo harness.
"""

import math
from dataclasses import dataclass

from .errors import ModeUnavailable, OutOfRange

LN2 = math.log(2.0)

# Exact mode of predict_tau_adjacent uses m_r = M mod 2**(r+1). It has been
# checked against exhaustive enumeration over cyclic windows and by Monte Carlo;
# flip this off to fall back to the power-of-two closed form only.
EXACT_ADJACENT_ENABLED = True

_TOL = 1e-12


@dataclass(frozen=True)
class MomentInputs:
    mean_p2: float
    mean_p3: float
    mean_p4: float
    mean_p2_sq: float

    def __post_init__(self):
        vals = (self.mean_p2, self.mean_p3, self.mean_p4, self.mean_p2_sq)
        if any(not (0.0 < v <= 1.0 + _TOL) for v in vals):
            raise OutOfRange(f"moments must lie in (0, 1]: {vals}")
        if self.mean_p2_sq < self.mean_p2**2 * (1 - 1e-9):
            raise OutOfRange("<p2^2> < <p2>^2 violates Jensen")
        if not (self.mean_p4 <= self.mean_p3 * (1 + 1e-9) and self.mean_p3 <= self.mean_p2 * (1 + 1e-9)):
            raise OutOfRange("need <p4> <= <p3> <= <p2>")


def flat_moments(m):
    """Moments of a vector with M equal moduli (deterministic)."""
    return MomentInputs(1.0 / m, 1.0 / m**2, 1.0 / m**3, 1.0 / m**2)


def cue_moments(m):
    """Exact ensemble moments of an M-dimensional Haar-random vector.

    |c_i|^2 is Dirichlet(1, ..., 1), which gives <p_q> = q! M! / (M + q - 1)!
    and <p_2^2> = 4 (M + 5) / ((M + 1)(M + 2)(M + 3)).
    """
    p2 = 2.0 / (m + 1)
    p3 = 6.0 / ((m + 1) * (m + 2))
    p4 = 24.0 / ((m + 1) * (m + 2) * (m + 3))
    p2sq = 4.0 * (m + 5) / ((m + 1) * (m + 2) * (m + 3))
    return MomentInputs(p2, p3, p4, p2sq)


def _need(cond, msg):
    if not cond:
        raise OutOfRange(msg)


def _support(n_dim, m):
    _need(n_dim >= 1 and 1 <= m <= n_dim, f"need 1 <= M <= N, got M={m}, N={n_dim}")


def predict_tau_mean(n_dim, mean_p2):
    """<tau> = (N-2)/(N-1) (1 - <p2>) for the (1, n-1) cuts."""
    _need(n_dim >= 2, "N must be >= 2")
    _need(1.0 / n_dim - _TOL <= mean_p2 <= 1.0 + _TOL, f"<p2>={mean_p2} outside [1/N, 1]")
    return (n_dim - 2) / (n_dim - 1) * (1.0 - mean_p2)


def predict_tau_localized_cue(n_dim, m):
    _support(n_dim, m)
    _need(n_dim >= 2, "N must be >= 2")
    return (m - 1) / (m + 1) * (n_dim - 2) / (n_dim - 1)


def predict_tau_phase(n_dim, m):
    _support(n_dim, m)
    _need(n_dim >= 2, "N must be >= 2")
    return (m - 1) / m * (n_dim - 2) / (n_dim - 1)


def tau_second_moment_coefficients(n_dim, mom):
    """(c_22, c_211, c_1111) from the averaged moments."""
    n = n_dim
    p2, p3, p4, p2sq = mom.mean_p2, mom.mean_p3, mom.mean_p4, mom.mean_p2_sq
    c22 = (p2sq - p4) / (n * (n - 1))
    c211 = (p2 - p2sq - 2 * p3 + 2 * p4) / (n * (n - 1) * (n - 2))
    c1111 = (1 - 6 * p2 + 8 * p3 + 3 * p2sq - 6 * p4) / (n * (n - 1) * (n - 2) * (n - 3))
    return c22, c211, c1111


def predict_tau_second_moment(n_dim, mom):
    """<tau^2> for a (1, n-1) cut from moments up to order four."""
    _need(n_dim >= 4, "N must be >= 4")
    n = n_dim
    c22, c211, c1111 = tau_second_moment_coefficients(n, mom)
    return (
        n * (n - 2) * (n * n - 6 * n + 16) * c1111
        + 4 * n * (n - 2) * (n - 4) * c211
        + 4 * n * (n - 2) * c22
    )


def predict_entropy_tangle_orders(n_dim, mom, order):
    """<S_m(tau)> for m = 1 or 2 using <tau> and, at m = 2, <tau^2>."""
    _need(order in (1, 2), "only orders 1 and 2 are available")
    t1 = predict_tau_mean(n_dim, mom.mean_p2)
    x1 = 1.0 - t1
    acc = x1 / 2.0
    if order == 2:
        t2 = predict_tau_second_moment(n_dim, mom)
        acc += (1.0 - 2.0 * t1 + t2) / 12.0
    return 1.0 - acc / LN2


def predict_cue_entropy(n_dim):
    """<S(tau)> of a Haar-random vector: (1/ln2) sum_{k=N/2+1}^{N-1} 1/k."""
    _need(n_dim >= 4 and n_dim % 2 == 0, "N must be even and >= 4")
    return math.fsum(1.0 / k for k in range(n_dim // 2 + 1, n_dim)) / LN2


def predict_linear_entropy(n_dim, nu, mean_p2):
    """<S_L> for a (nu, n-nu) cut, the nu-generalization of predict_tau_mean."""
    d = 2**nu
    _need(d * d <= n_dim, "need 2**nu <= 2**(n-nu)")
    _need(1.0 / n_dim - _TOL <= mean_p2 <= 1.0 + _TOL, f"<p2>={mean_p2} outside [1/N, 1]")
    return (n_dim - d) / (n_dim - 1) * (1.0 - mean_p2)


def predict_entropy_first_order(n_dim, nu, mean_p2, variant="consistent"):
    """First-order mean von Neumann entropy of a (nu, n-nu) cut.

    ``consistent`` evaluates nu - (2**nu - 1)/(2 ln2) (1 - <S_L>) and reduces to
    order-1 of the tangle expansion at nu = 1. ``literal`` keeps the displayed
    form nu - (2**nu - 1)/(2 ln2) (1 - (N - 2**nu)/(N - 1) <p2>), which goes
    negative for delocalized states when nu >= 2.
    """
    n = round(math.log2(n_dim))
    _need(2**n == n_dim, "N must be a power of two")
    _need(1 <= nu <= n - 1, f"nu must lie in 1..{n - 1}")
    d = 2**nu
    _need(0.0 <= mean_p2 <= 1.0 + _TOL, "<p2> must lie in [0, 1]")
    if variant == "consistent":
        inner = 1.0 - (n_dim - d) / (n_dim - 1) * (1.0 - mean_p2)
    elif variant == "literal":
        inner = 1.0 - (n_dim - d) / (n_dim - 1) * mean_p2
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return nu - (d - 1) / (2.0 * LN2) * inner


def chi_r(r, x):
    """chi_r(x) = x^2 - (2/3) x (x^2 - 1) / 2**r, reflected about 2**r."""
    _need(r >= 0, "r must be >= 0")
    _need(0 <= x <= 2 ** (r + 1), f"x={x} outside [0, 2**(r+1)]")
    if x > 2**r:
        x = 2 ** (r + 1) - x
    return x * x - (2.0 / 3.0) * x * (x * x - 1) / 2**r


def adjacent_bracket(n_dim, m, mode="power_of_two"):
    """Geometric factor of predict_tau_adjacent before (1 - <p2>) / n."""
    n = round(math.log2(n_dim))
    _need(2**n == n_dim, "N must be a power of two")
    _need(2 <= m <= n_dim / 2, f"need 2 <= M <= N/2, got M={m}")
    if mode == "power_of_two":
        r0 = math.log2(m)
        return ((r0 + 4.0 / 3.0) * m * m - 2.0 * (r0 - 1.0) * m - 10.0 / 3.0) / (m * (m - 1)) - 4.0 * (
            m + 1
        ) / (3.0 * n_dim)
    if mode == "exact":
        if not EXACT_ADJACENT_ENABLED:
            raise ModeUnavailable("exact adjacent mode is disabled")
        _need(float(m).is_integer(), "exact mode needs integer M")
        m = int(m)
        r0 = (m - 1).bit_length()  # 2**(r0-1) < M <= 2**r0
        chis = math.fsum(chi_r(r, m % 2 ** (r + 1)) for r in range(r0))
        return (
            (m - 2) / (m - 1) * r0
            + 2.0 * (2**r0 - 1) / (m * (m - 1))
            + 4.0 / 3.0 * (m + 1) * (n_dim - 2**r0) / 2 ** (n + r0)
            - chis / (m * (m - 1))
        )
    raise ValueError(f"unknown mode {mode!r}")


def predict_tau_adjacent(n_dim, m, n, mean_p2, mode="power_of_two"):
    """<tau> averaged over single-qubit cuts for vectors on M adjacent labels."""
    _need(2**n == n_dim, "N must equal 2**n")
    _need(0.0 <= mean_p2 <= 1.0 + _TOL, "<p2> must lie in [0, 1]")
    return adjacent_bracket(n_dim, m, mode) * (1.0 - mean_p2) / n
