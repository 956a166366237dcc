"""Physical models whose eigenvectors are compared with the random-vector formulas.

* disordered spin register ``H = sum_i G_i Z_i + sum_{i<j} J_ij X_i X_j``
* random-phase intermediate map ``U_kl = e^{i phi_k}/N (1 - e^{2 pi i N g}) / (1 - e^{2 pi i (k - l + N g)/N})``
* one-dimensional Anderson chain with Gaussian on-site disorder

Spectra are returned as :class:`Spectrum` with eigenvectors as *rows*.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import rng as rngmod
from .errors import DegenerateGamma, NotPowerOfTwo, TooLarge
from .linalg import check_unitary, hermitian_eig, tridiagonal_sym_eig, unitary_eig
from .states import PureState, qubit_count

MAX_SPIN_QUBITS = 12
MAX_ISRM_DIM = 2**11
MAX_ANDERSON_SITES = 2**12
GAMMA_INTEGER_ATOL = 1e-9


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    vectors: np.ndarray  # rows are eigenvectors

    def __len__(self):
        return self.vectors.shape[0]

    def states(self):
        return [PureState(v) for v in self.vectors]

    def select(self, window):
        """Keep a slice of the (ordered) spectrum; ``window`` is None or 'central50'."""
        if window is None:
            return self
        if window != "central50":
            raise ValueError(f"unknown window {window!r}")
        n = len(self)
        lo, hi = n // 4, n - n // 4
        return Spectrum(self.eigenvalues[lo:hi], self.vectors[lo:hi])


# ---------------------------------------------------------------------------
# spin register


@dataclass(frozen=True)
class SpinModelParams:
    n: int
    delta0: float = 1.0
    delta: float = 1.0
    j_coupling: float = 1.5
    seed: int = 0

    @classmethod
    def from_ratios(cls, n, delta_ratio=1.0, j_over_delta=1.5, seed=0):
        """Delta_0 = 1; delta = delta_ratio; J = j_over_delta * delta."""
        delta = delta_ratio * 1.0
        return cls(n=n, delta0=1.0, delta=delta, j_coupling=j_over_delta * delta, seed=seed)


def spin_couplings(p, rng):
    gammas = rng.uniform(p.delta0 - p.delta / 2, p.delta0 + p.delta / 2, size=p.n)
    jmat = np.zeros((p.n, p.n))
    iu = np.triu_indices(p.n, k=1)
    jmat[iu] = rng.uniform(-p.j_coupling, p.j_coupling, size=len(iu[0]))
    return gammas, jmat


def spin_hamiltonian(gammas, jmat):
    """Dense real symmetric matrix of the spin register.

    ``jmat[i, j]`` for i < j couples qubits i and j; qubit 0 is the most
    significant bit of the basis label.
    """
    gammas = np.asarray(gammas, dtype=float)
    n = len(gammas)
    dim = 2**n
    idx = np.arange(dim)
    h = np.zeros((dim, dim))
    diag = np.zeros(dim)
    for i in range(n):
        bit = (idx >> (n - 1 - i)) & 1
        diag += gammas[i] * (1 - 2 * bit)
    h[idx, idx] = diag
    for i in range(n):
        for j in range(i + 1, n):
            jij = jmat[i, j]
            if jij == 0.0:
                continue
            flip = (1 << (n - 1 - i)) | (1 << (n - 1 - j))
            h[idx, idx ^ flip] += jij
    return h


def spin_eigvectors(p, rng=None, method="lapack"):
    if not 1 <= p.n <= MAX_SPIN_QUBITS:
        raise TooLarge(f"spin model limited to 1..{MAX_SPIN_QUBITS} qubits, got {p.n}")
    rng = rng if rng is not None else rngmod.keyed_rng(p.seed, rngmod.MODEL, 0)
    gammas, jmat = spin_couplings(p, rng)
    dec = hermitian_eig(spin_hamiltonian(gammas, jmat), method=method)
    return Spectrum(dec.eigenvalues, dec.eigenvectors.T.copy())


# ---------------------------------------------------------------------------
# intermediate-statistics map


@dataclass(frozen=True)
class IsrmParams:
    dim: int
    gamma: Fraction | float = Fraction(1, 3)
    seed: int = 0


def parse_gamma(text):
    """'1/3' -> Fraction(1, 3); '0.3' -> 0.3."""
    if isinstance(text, (Fraction, float, int)):
        return Fraction(text) if isinstance(text, int) else text
    text = str(text).strip()
    if "/" in text:
        return Fraction(text)
    return float(text)


def _frac_part(x):
    if isinstance(x, Fraction):
        return float(x - math.floor(x))
    return x - math.floor(x)


def isrm_matrix(dim, gamma, phases):
    """Build the random-phase map for the given row phases ``phases`` (length N)."""
    ng = dim * gamma
    if isinstance(ng, Fraction):
        degenerate = ng.denominator == 1
    else:
        degenerate = abs(ng - round(ng)) < GAMMA_INTEGER_ATOL
    if degenerate:
        raise DegenerateGamma(f"N*gamma = {ng} is an integer")
    numer = 1.0 - np.exp(2j * np.pi * _frac_part(ng))
    # column l, row k depend on k - l only; exponent reduced mod 1 exactly for rational gamma
    diffs = range(-(dim - 1), dim)
    angles = np.array([_frac_part((d + ng) / dim) for d in diffs])
    denom = 1.0 - np.exp(2j * np.pi * angles)
    if np.min(np.abs(denom)) < 1e-12:
        raise DegenerateGamma("vanishing denominator")
    kernel = numer / (dim * denom)
    k = np.arange(dim)
    u = kernel[(k[:, None] - k[None, :]) + dim - 1]
    return np.exp(1j * np.asarray(phases))[:, None] * u


def isrm_eigvectors(p, rng=None, method="lapack"):
    if not 4 <= p.dim <= MAX_ISRM_DIM:
        raise TooLarge(f"ISRM dimension must lie in 4..{MAX_ISRM_DIM}, got {p.dim}")
    rng = rng if rng is not None else rngmod.keyed_rng(p.seed, rngmod.MODEL, 0)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=p.dim)
    u = isrm_matrix(p.dim, p.gamma, phases)
    check_unitary(u)
    dec = unitary_eig(u, rng=rng, method=method)
    return Spectrum(dec.eigenvalues, dec.eigenvectors.T.copy())


# ---------------------------------------------------------------------------
# Anderson chain


@dataclass(frozen=True)
class AndersonParams:
    n_sites: int
    w: float = 1.0
    seed: int = 0


def anderson_eigvectors(p, rng=None, window=None, as_qubits=False, method="lapack"):
    """Eigenvectors of the chain with on-site N(0, w^2) energies and unit hopping.

    ``as_qubits`` demands a power-of-two chain so that the site label can be read
    as an n-qubit basis state.
    """
    if not 2 <= p.n_sites <= MAX_ANDERSON_SITES:
        raise TooLarge(f"chain length must lie in 2..{MAX_ANDERSON_SITES}, got {p.n_sites}")
    if as_qubits and qubit_count(p.n_sites) is None:
        raise NotPowerOfTwo(f"{p.n_sites} sites cannot be read as qubits")
    rng = rng if rng is not None else rngmod.keyed_rng(p.seed, rngmod.MODEL, 0)
    eps = rng.normal(0.0, p.w, size=p.n_sites) if p.w > 0 else np.zeros(p.n_sites)
    dec = tridiagonal_sym_eig(eps, np.ones(p.n_sites - 1), method=method)
    return Spectrum(dec.eigenvalues, dec.eigenvectors.T.copy()).select(window)
