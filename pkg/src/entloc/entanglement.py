"""Bipartite entanglement of pure qubit states.

Functions accept a :class:`~entloc.states.PureState` or a complex array whose
last axis has length 2**n; leading axes are treated as a batch of states.
Entropies are in bits.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidDensityMatrix, InvalidQubitIndex, OutOfRange
from .linalg import hermitian_eigvalsh_batch
from .states import amplitudes_of, qubit_count

LN2 = math.log(2.0)
CLAMP_FLOOR = -1e-8  # eigenvalues in [CLAMP_FLOOR, 0) are set to zero
DM_ATOL = 1e-10
RANGE_ATOL = 1e-12


@dataclass(frozen=True)
class Bipartition:
    n_qubits: int
    subset_a: tuple

    def __post_init__(self):
        a = tuple(int(i) for i in self.subset_a)
        object.__setattr__(self, "subset_a", a)
        if len(set(a)) != len(a):
            raise InvalidQubitIndex(f"repeated qubit in {a}")
        if any(i < 0 or i >= self.n_qubits for i in a):
            raise InvalidQubitIndex(f"qubit index out of range in {a} for n={self.n_qubits}")
        if not 1 <= len(a) <= self.n_qubits - 1:
            raise InvalidQubitIndex(f"|A| = {len(a)} must lie in 1..n-1")

    @property
    def nu(self):
        return len(self.subset_a)

    @property
    def complement(self):
        return tuple(i for i in range(self.n_qubits) if i not in self.subset_a)

    def canonical(self):
        """The same cut described from its smaller side (A kept on ties)."""
        if self.nu <= self.n_qubits - self.nu:
            return self
        return Bipartition(self.n_qubits, self.complement)

    @classmethod
    def leading(cls, n_qubits, nu):
        return cls(n_qubits, tuple(range(nu)))


def _split(state):
    psi = np.asarray(amplitudes_of(state))
    n = qubit_count(psi.shape[-1])
    if n is None:
        raise DimensionMismatch(f"state dimension {psi.shape[-1]} is not a power of two")
    return psi, n


def _check_part(part, n):
    if part.n_qubits != n:
        raise DimensionMismatch(f"partition is for {part.n_qubits} qubits, state has {n}")


def _matricize(psi, n, subset_a):
    """Reshape to ``(..., 2**|A|, 2**|B|)`` with A bits in the given order."""
    lead = psi.shape[:-1]
    rest = tuple(i for i in range(n) if i not in subset_a)
    t = psi.reshape(lead + (2,) * n)
    off = len(lead)
    perm = tuple(range(off)) + tuple(off + i for i in subset_a) + tuple(off + i for i in rest)
    return t.transpose(perm).reshape(lead + (2 ** len(subset_a), 2 ** len(rest)))


def partial_trace(state, part):
    """Reduced density matrix of subsystem ``part.subset_a``."""
    psi, n = _split(state)
    _check_part(part, n)
    x = _matricize(psi, n, part.subset_a)
    return x @ np.swapaxes(x.conj(), -1, -2)


def single_qubit_rdm(state, qubit):
    psi, n = _split(state)
    if n < 2:
        raise DimensionMismatch("need at least 2 qubits")
    if not 0 <= qubit < n:
        raise InvalidQubitIndex(f"qubit {qubit} out of range for n={n}")
    t = psi.reshape(psi.shape[:-1] + (2**qubit, 2, 2 ** (n - 1 - qubit)))
    a0 = t[..., 0, :]
    a1 = t[..., 1, :]
    r00 = np.sum(np.abs(a0) ** 2, axis=(-2, -1))
    r11 = np.sum(np.abs(a1) ** 2, axis=(-2, -1))
    r01 = np.sum(a0 * a1.conj(), axis=(-2, -1))
    rho = np.empty(psi.shape[:-1] + (2, 2), dtype=np.complex128)
    rho[..., 0, 0] = r00
    rho[..., 1, 1] = r11
    rho[..., 0, 1] = r01
    rho[..., 1, 0] = np.conj(r01)
    return rho


def tangle(state, qubit):
    """tau = 4 det rho for the cut separating ``qubit`` from the rest."""
    rho = single_qubit_rdm(state, qubit)
    det = (rho[..., 0, 0] * rho[..., 1, 1]).real - np.abs(rho[..., 0, 1]) ** 2
    return np.clip(4.0 * det, 0.0, 1.0)


def tangles(state):
    """All n single-qubit tangles, shape ``(..., n)``."""
    psi, n = _split(state)
    return np.stack([tangle(psi, j) for j in range(n)], axis=-1)


def meyer_wallach(state):
    """Q = mean single-qubit tangle."""
    return np.mean(tangles(state), axis=-1)


def _binary_entropy(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for y in (x, 1.0 - x):
        pos = y > 0
        out[pos] -= y[pos] * np.log2(y[pos])
    return out


def _check_unit_interval(v, name):
    v = np.asarray(v, dtype=float)
    if np.any(v < -RANGE_ATOL) or np.any(v > 1 + RANGE_ATOL) or np.any(np.isnan(v)):
        raise OutOfRange(f"{name} must lie in [0, 1]")
    return np.clip(v, 0.0, 1.0)


def entropy_from_tangle(tau):
    """S(tau) = h((1 + sqrt(1 - tau)) / 2)."""
    tau = _check_unit_interval(tau, "tau")
    res = _binary_entropy((1.0 + np.sqrt(1.0 - tau)) / 2.0)
    return float(res) if res.ndim == 0 else res


def tangle_expansion(tau, order):
    """Order-m truncation of S(tau) in powers of (1 - tau)."""
    if order < 1:
        raise OutOfRange("order must be >= 1")
    tau = _check_unit_interval(tau, "tau")
    x = 1.0 - tau
    acc = np.zeros_like(x)
    xk = np.ones_like(x)
    for k in range(1, order + 1):
        xk = xk * x
        acc = acc + xk / (2 * k * (2 * k - 1))
    res = 1.0 - acc / LN2
    return float(res) if res.ndim == 0 else res


def density_eigenvalues(rho):
    """Eigenvalues of density matrices after validation and clamping."""
    rho = np.asarray(rho)
    d = rho.shape[-1]
    if rho.ndim < 2 or rho.shape[-2] != d:
        raise InvalidDensityMatrix("density matrix must be square")
    herm = np.max(np.abs(rho - np.swapaxes(rho.conj(), -1, -2)))
    if herm > DM_ATOL:
        raise InvalidDensityMatrix(f"not Hermitian (max deviation {herm:.2e})")
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    if np.max(np.abs(tr - 1.0)) > DM_ATOL:
        raise InvalidDensityMatrix("trace differs from 1")
    lam = hermitian_eigvalsh_batch(rho)
    if np.min(lam) < CLAMP_FLOOR:
        raise InvalidDensityMatrix(f"negative eigenvalue {np.min(lam):.3e}")
    return np.clip(lam, 0.0, None)


def von_neumann_entropy(rho):
    lam = density_eigenvalues(rho)
    logs = np.zeros_like(lam)
    pos = lam > 0
    logs[pos] = np.log2(lam[pos])
    res = -np.sum(lam * logs, axis=-1)
    res = np.maximum(res, 0.0)
    return float(res) if res.ndim == 0 else res


def purity(rho):
    rho = np.asarray(rho)
    return np.sum(np.abs(rho) ** 2, axis=(-2, -1))


def linear_entropy(rho, d=None):
    """S_L = d/(d-1) (1 - tr rho^2).

    ``d`` defaults to the dimension of ``rho``; pass the smaller of the two
    subsystem dimensions when ``rho`` belongs to the larger side.
    """
    rho = np.asarray(rho)
    density_eigenvalues(rho)
    d = rho.shape[-1] if d is None else d
    if d < 2:
        raise InvalidDensityMatrix("linear entropy needs d >= 2")
    res = d / (d - 1) * (1.0 - purity(rho))
    return float(res) if np.ndim(res) == 0 else res


def entropy_expansion_general(rho, order):
    """Truncated expansion of S around the maximally mixed state.

    Diagnostic only: the series converges when every eigenvalue satisfies
    ``|d * lambda - 1| < 1`` (see :func:`in_expansion_domain`).
    """
    if order < 1:
        raise OutOfRange("order must be >= 1")
    lam = density_eigenvalues(rho)
    d = lam.shape[-1]
    nu = math.log2(d)
    mu = lam - 1.0 / d
    acc = np.zeros(lam.shape[:-1])
    for k in range(1, order + 1):
        acc = acc + (-d) ** k / (k * (k + 1)) * np.sum(mu ** (k + 1), axis=-1)
    res = nu + acc / LN2
    return float(res) if res.ndim == 0 else res


def in_expansion_domain(rho):
    lam = density_eigenvalues(rho)
    d = lam.shape[-1]
    return np.all(np.abs(d * lam - 1.0) < 1.0, axis=-1)


def bipartite_entropy(state, part):
    """Von Neumann entropy of the cut, evaluated on its smaller side."""
    psi, n = _split(state)
    _check_part(part, n)
    return von_neumann_entropy(partial_trace(psi, part.canonical()))


def bipartite_linear_entropy(state, part):
    psi, n = _split(state)
    _check_part(part, n)
    return linear_entropy(partial_trace(psi, part.canonical()))


def single_qubit_entropies(state):
    """S(tau_j) for every single-qubit cut, shape ``(..., n)``."""
    return entropy_from_tangle(tangles(state))
